def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper(), props.get("label", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, outcome, label in sorted(lines):
            terminalreporter.write_line(f"criterion {num}: {'PASS' if outcome == 'PASSED' else 'FAIL'}  {label}")
