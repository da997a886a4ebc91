"""Named scenarios reproducing the worked examples of the four activities."""

from __future__ import annotations

from .core import (
    CacheSpec, ChainScenario, ControllerLeg, LinkSpec, RachScenario,
    SdnScenario, WebLink, WebScenario,
)

FIELD_LINK = LinkSpec(bitrate=1, length=10, prop_speed=1)
HTTP_FIELD = WebLink(length=15, runner_speed=3, bitrate=1)


def _presets() -> dict[str, dict]:
    return {
        "paper-linear": {"chain": ChainScenario(12, 3, 3, FIELD_LINK)},
        "paper-linear-fast": {"chain": ChainScenario(12, 3, 3, LinkSpec(1, 10, 2))},
        "paper-http": {"web": WebScenario(3, (6, 6, 6), HTTP_FIELD)},
        "paper-http-parallel": {"web": WebScenario(3, (3,) * 6, HTTP_FIELD, 2)},
        "paper-http-cache": {"web": WebScenario(3, (6, 6, 6), HTTP_FIELD,
                                                cache=CacheSpec(3, 3, 1))},
        "paper-rach": {"rach": RachScenario(12, 4)},
        # no field numbers are given for the controller; 2 m at 1 m/s makes
        # each query a 4 s round trip
        "paper-sdn": {"sdn": SdnScenario(6, FIELD_LINK, ControllerLeg(2, 1))},
    }


PRESETS = _presets()


def preset(name: str) -> dict:
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None

