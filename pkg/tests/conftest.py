"""Suite-wide pytest configuration.

The hypothesis profile is derandomized so that a green run is
reproducible: property tests explore the same examples every time.
"""

from hypothesis import HealthCheck, settings

from helpers import ACCEPTANCE_LINES

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def pytest_terminal_summary(terminalreporter):
    # the acceptance tests register one line per criterion; failures
    # show up in pytest's own summary instead
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
