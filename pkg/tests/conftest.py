"""Shared pytest plumbing.

The acceptance tests append one verdict line per gate to
``config.acceptance_lines``; this hook prints them in the terminal summary so
the checklist is visible even when test output is captured.
"""


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
