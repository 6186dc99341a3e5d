"""Shared pytest plumbing: collects acceptance-criterion report lines and
echoes them in the terminal summary so they are visible in every run mode."""

ACCEPTANCE_LINES: list = []


def record_acceptance_line(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
