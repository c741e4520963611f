import pytest

from qmaj.config import DEFAULT
from qmaj.errors import QmajError
from qmaj.suites import SUITES, run_suite


@pytest.mark.parametrize("name", sorted(SUITES))
def test_vacuous_pass(name):
    result = run_suite(name, 7, 0)
    assert result.passed and result.count == 0
    assert result.failures == []
    assert result.worst_slack is None
    assert "vacuous" in result.summary()


def test_unknown_suite():
    with pytest.raises(QmajError):
        run_suite("nonsense", 0, 1)


@pytest.mark.parametrize("name", sorted(SUITES))
def test_small_runs_pass(name):
    result = run_suite(name, 3, 10)
    assert result.passed, result.summary()
    assert result.worst_slack >= -1e-9
    assert all(v >= 0 for v in result.worst_residuals().values())


def test_runs_are_deterministic():
    a, b = run_suite("static", 4, 15), run_suite("static", 4, 15)
    assert a.worst_slack == b.worst_slack
    assert a.worst_residuals() == b.worst_residuals()


def test_tolerance_is_honoured():
    # a negative tolerance demands strict slack and fails the saturated relations
    strict = DEFAULT.with_overrides(majorization=-1e-3)
    assert not run_suite("static", 1, 5, strict).passed
