import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance checklist collected by test_acceptance, if it ran.

    The module is looked up in sys.modules rather than imported so the
    lines come from the instance the test run actually populated.
    """
    lines = []
    for name in ("test_acceptance", "tests.test_acceptance"):
        mod = sys.modules.get(name)
        if mod is not None and getattr(mod, "CHECKLIST", []):
            lines = mod.CHECKLIST
            break
    if not lines:
        return
    terminalreporter.section("acceptance checklist")
    for line in lines:
        terminalreporter.write_line(line)
