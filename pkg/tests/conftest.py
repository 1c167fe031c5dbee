def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for i in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.format_line(i, test_acceptance.RESULTS[i]))
