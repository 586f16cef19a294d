import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        keys = sorted((k for k in ACCEPTANCE if k != "info"),
                      key=lambda k: (int(str(k).split("[")[0]), str(k)))
        for key in keys:
            terminalreporter.write_line(ACCEPTANCE[key])
        for line in ACCEPTANCE.get("info", []):
            terminalreporter.write_line(line)
