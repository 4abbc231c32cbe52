
CRITERIA = {
    "test_best_response_oracle_equivalence": "1 best-response oracle equivalence",
    "test_threshold_correctness": "2 threshold correctness",
    "test_equilibrium_oracle_equivalence": "3 equilibrium oracle equivalence",
    "test_concavity_certificates": "4 concavity certificates",
    "test_scheme_dominance": "5 scheme dominance",
    "test_trend_reproduction": "6 trend reproduction",
    "test_determinism": "7 determinism",
    "test_feasibility_honesty": "8 feasibility honesty",
}

_outcomes = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1].split("[")[0]
    if "test_acceptance.py" not in report.nodeid or name not in CRITERIA:
        return
    failed = report.failed or _outcomes.get(name) == "FAIL"
    if report.when == "call" or report.failed:
        _outcomes[name] = "FAIL" if failed else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        terminalreporter.write_line(f"{_outcomes.get(name, 'NOT RUN'):8} {label}")
