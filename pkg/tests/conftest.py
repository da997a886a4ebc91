"""Print one PASS/FAIL line per acceptance criterion at the end of the run."""


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if rep.when == "call" and "criterion" in props:
                lines.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL",
                              props.get("summary", "")))
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, verdict, summary in sorted(lines):
        terminalreporter.write_line(f"{verdict} criterion {number}: {summary}")
