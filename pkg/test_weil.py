import math
from fractions import Fraction

import pytest

from infra.errors import BasePointError, UsageError
from services.weil.models import FormSystem, ProjPointQ
from services.weil.service import (
    additivity_defect,
    dominance_fit,
    normalized_height,
    points_of_bounded_height,
    ratio_limit_table,
    sample_points_of_height,
    coefficient_envelope,
    height_bound_gaps,
    squaring_defect,
    weil_height_forms,
    weil_height_p1,
)

SQUARES = FormSystem.from_text(["x^2", "y^2"])
MIXED = FormSystem.from_text(["x^2 - y^2", "x*y"])


def test_proj_point_is_canonical():
    assert ProjPointQ(p=4, q=-6) == ProjPointQ(p=-2, q=3)
    assert ProjPointQ(p=-5, q=0) == ProjPointQ.of("inf")
    assert ProjPointQ.of(Fraction(-6, 4)).to_fraction() == Fraction(-3, 2)
    assert str(ProjPointQ.of(7)) == "7"
    with pytest.raises(ValueError):
        ProjPointQ(p=0, q=0)


@pytest.mark.parametrize("t, expected", [(Fraction(2, 3), math.log(3)), (0, 0.0), (7, math.log(7))])
def test_weil_height_p1(t, expected):
    assert weil_height_p1(ProjPointQ.of(t)) == pytest.approx(expected, abs=1e-15)


def test_weil_height_forms():
    t = ProjPointQ.of(Fraction(2, 3))
    assert weil_height_forms(t, FormSystem.identity()) == pytest.approx(math.log(3))
    assert weil_height_forms(t, SQUARES) == pytest.approx(math.log(9))
    assert weil_height_forms(ProjPointQ.of(2), MIXED) == pytest.approx(math.log(3))
    assert normalized_height(t, SQUARES) == pytest.approx(math.log(3))


def test_form_systems_without_common_zero():
    identity = FormSystem.identity()
    assert identity.size == 2 and identity.degree == 1
    assert MIXED.forms == ((-1, 0, 1), (0, 1, 0))
    # a pair may share a factor as long as the whole system does not
    triple = FormSystem.from_text(["x^2", "x*y", "y^2"])
    assert triple.size == 3
    with pytest.raises(BasePointError):
        FormSystem.from_text(["x^2 - y^2", "x^2 - x*y"])


def test_forms_with_common_zero_are_rejected():
    with pytest.raises(BasePointError):
        FormSystem.from_text(["x^2", "x*y"])
    with pytest.raises(UsageError):
        FormSystem.from_text(["x^2", "y"])


def test_forms_evaluate_on_coprime_coordinates():
    system = FormSystem.from_text(["x^2 + y^2", "x*y"])
    assert weil_height_forms(ProjPointQ.of(1), system) == pytest.approx(math.log(2))


@pytest.mark.parametrize("bound, count", [(1, 4), (2, 8)])
def test_points_of_bounded_height_counts(bound, count):
    points = points_of_bounded_height(bound)
    assert len(points) == count
    assert len(set(points)) == count


def test_points_of_bounded_height_matches_brute_force():
    bound = 25
    brute = {ProjPointQ(p=p, q=q) for p in range(-bound, bound + 1) for q in range(-bound, bound + 1) if (p, q) != (0, 0)}
    listed = points_of_bounded_height(bound)
    assert set(listed) == brute
    heights = [max(abs(t.p), abs(t.q)) for t in listed]
    assert heights == sorted(heights)
    counts = [len(points_of_bounded_height(h)) for h in range(1, 10)]
    assert counts == sorted(counts)
    with pytest.raises(ValueError):
        points_of_bounded_height(0)


def test_sample_points_have_the_requested_height():
    points = sample_points_of_height(1000, 16)
    assert points
    assert all(max(abs(t.p), abs(t.q)) == 1000 for t in points)


def test_ratio_limit_trivial_cases():
    for row in ratio_limit_table(FormSystem.identity(), SQUARES, [10, 100]):
        assert row.deviation == pytest.approx(0, abs=1e-12)
    for row in ratio_limit_table(MIXED, MIXED, [100]):
        assert row.deviation == pytest.approx(0, abs=1e-12)


def test_ratio_limit_deviation_decays():
    rows = ratio_limit_table(FormSystem.identity(), MIXED, [10 ** 2, 10 ** 4, 10 ** 6])
    devs = [r.deviation for r in rows]
    assert devs[0] > devs[1] > devs[2] > 0


def test_additivity_envelope():
    cubes = FormSystem.from_text(["x^3", "y^3"])
    envelope = math.log(MIXED.size * cubes.size)
    assert max(additivity_defect(t, MIXED, cubes) for t in points_of_bounded_height(40)) <= envelope


def test_squaring_is_exact_on_coprime_coordinates():
    assert max(squaring_defect(t) for t in points_of_bounded_height(40)) <= math.log(2)
    assert squaring_defect(ProjPointQ.of(Fraction(3, 7))) == pytest.approx(0, abs=1e-12)


def test_dominance_fit_recovers_degree():
    fit = dominance_fit(FormSystem.identity(), MIXED, points_of_bounded_height(60))
    assert fit.c == pytest.approx(2, abs=0.05)
    assert fit.constant >= 0


@pytest.mark.parametrize("forms", [["x", "y"], ["x^2 - y^2", "x*y"], ["x^3 - 7*y^3", "12*x*y^2"]])
def test_heights_stay_within_coefficient_bounds(forms):
    system = FormSystem.from_text(forms)
    assert coefficient_envelope(system) > 0
    for t in points_of_bounded_height(40):
        assert weil_height_p1(t) >= 0
        lower, upper = height_bound_gaps(t, system)
        assert lower >= 0, t
        assert upper >= -1e-12, t
