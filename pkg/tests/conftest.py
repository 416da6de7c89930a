import pytest

from skipseq import DecisionScenario, NonresponseAllScenario, NonresponseSkipScenario

_CRITERIA = []


@pytest.fixture
def record_criterion():
    def record(number, title, ok, detail=""):
        _CRITERIA.append((number, title, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_CRITERIA):
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)


@pytest.fixture
def hrs_skip():
    return NonresponseSkipScenario(0.8508, 0.4039, 0.0197, 0.0723, 0.8705)


@pytest.fixture
def hrs_all():
    return NonresponseAllScenario(0.08, 0.4039)


@pytest.fixture
def hrs(hrs_all, hrs_skip):
    return DecisionScenario(hrs_all, hrs_skip)


@pytest.fixture
def nlsom():
    def build(variant="joint", lam_all=0.15, lam_skip=0.25):
        return DecisionScenario.misclassification(0.073, 0.073, 0.092, lam_all, lam_skip, variant)

    return build
