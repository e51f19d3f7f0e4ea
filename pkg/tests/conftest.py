def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the acceptance-criteria verdict lines after the test run."""
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in VERDICTS:
        terminalreporter.write_line(line)
