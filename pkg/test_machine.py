import pytest

from infra.errors import ResourceError
from services.curve.service import on_curve
from services.machine.models import SUITES, CheckResult, SuiteReport
from services.machine.service import check_ids, random_q_points, run_check, run_suite


def test_every_suite_has_checks():
    for suite in SUITES:
        ids = check_ids(suite)
        assert ids, suite
        assert all(i.startswith(suite + ".") for i in ids)
    assert "weil.northcott" in check_ids("weil")
    assert "weil.lower-bound" in check_ids("weil")
    assert "canonical.naive-difference" in check_ids("canonical")
    assert "canonical.parallelogram" in check_ids("canonical")
    assert "moriwaki.section-choice" in check_ids("moriwaki")


def test_random_points_are_reproducible():
    first = random_q_points(10)
    again = random_q_points(10)
    assert [(c.a4, c.a6, p) for c, p in first] == [(c.a4, c.a6, p) for c, p in again]
    for curve, point in first:
        assert not curve.is_singular()
        assert on_curve(curve, point)


def test_run_check_turns_errors_into_failures():
    def exhausted():
        raise ResourceError("out of budget")

    result = run_check("geometric.fake", exhausted)
    assert result == CheckResult(id="geometric.fake", passed=False, detail="error: out of budget")


def test_report_summary():
    report = SuiteReport(suite="weil", results=[
        CheckResult(id="weil.a", passed=True),
        CheckResult(id="weil.b", passed=False, detail="off by one"),
    ])
    assert not report.passed
    assert report.failed_ids == ["weil.b"]


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("arakelov")


def test_weil_suite_passes():
    report = run_suite("weil")
    assert report.passed, report.failed_ids


@pytest.mark.slow
@pytest.mark.parametrize("suite", ["canonical", "geometric", "moriwaki"])
def test_suite_passes(suite):
    report = run_suite(suite)
    assert report.passed, report.failed_ids
