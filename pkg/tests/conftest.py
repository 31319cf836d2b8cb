def pytest_terminal_summary(terminalreporter):
    # echo the acceptance lines even when output capture is on
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(RESULTS.items(), key=lambda kv: kv[0].split()[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
