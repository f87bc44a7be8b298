import math
from fractions import Fraction

import pytest

from infra.errors import BadFiberError, PreconditionError
from infra.pool import close_worker_pool, start_worker_pool
from services.curve.models import CurvePoint
from services.curve.service import add, mul_scalar
from services.fixtures.service import load_fixture
from services.specialize.models import BAD_FIBER, RANK_DROP, RANK_DROP_UNCONFIRMED, ScanRecord
from services.specialize.service import (
    decile_summary,
    exceptional_scan,
    fit_ratio_envelope,
    good_fiber,
    homomorphism_check,
    linear_envelope,
    rank_drop_records,
    ratio_envelope,
    residual_slope,
    scan_parameters,
    section_scan,
    specialize_curve,
    specialize_section,
    theorem2_fit,
    theorem3_scan,
    theorem4_scan,
)
from services.weil.models import FormSystem, ProjPointQ


def test_good_and_bad_fibres(tt_surface):
    assert not good_fiber(tt_surface, 0)
    assert not good_fiber(tt_surface, ProjPointQ.of("inf"))
    assert good_fiber(tt_surface, 1)
    assert good_fiber(tt_surface, Fraction(3, 2))
    with pytest.raises(BadFiberError):
        specialize_curve(tt_surface, 0)


def test_specialize_section(tt_surface):
    fiber = specialize_curve(tt_surface, 2)
    assert (fiber.a4, fiber.a6) == (-4, 4)
    assert specialize_section(tt_surface, tt_surface.section("P"), 2) == CurvePoint(Fraction(2), Fraction(2))


def test_specialization_is_a_homomorphism(tt_surface):
    p, q, r = (tt_surface.section(n) for n in "PQR")
    for t in (1, -3, Fraction(5, 2), Fraction(-7, 3)):
        assert homomorphism_check(tt_surface, p, q, t)
        assert homomorphism_check(tt_surface, q, r, t)
        assert homomorphism_check(tt_surface, p, p, t)


def test_scan_parameters():
    everything = scan_parameters(10)
    assert len(everything) == len(set(everything))
    picked = scan_parameters(10, 7)
    assert len(picked) == 7
    assert picked[0] == everything[0] and picked[-1] == everything[-1]
    assert scan_parameters(2, 1000) == scan_parameters(2)


def test_section_scan_rows(tt_surface):
    t_list = scan_parameters(6)
    records = section_scan(tt_surface, tt_surface.section("P"), t_list)
    assert [r.t for r in records] == t_list
    bad = {str(r.t) for r in records if BAD_FIBER in r.flags}
    assert bad == {"0", "inf"}
    for r in records:
        assert r.hhat_geom == Fraction(1, 3)
        if not r.is_bad and r.h_t > 0:
            assert r.ratio == pytest.approx(r.hhat_spec / r.h_t)
            assert r.residual_t4 == pytest.approx((r.hhat_spec - r.h_t / 3) / (1 + math.sqrt(r.h_t)))


def test_scan_is_independent_of_worker_count(tt_surface):
    t_list = scan_parameters(8)
    serial = section_scan(tt_surface, tt_surface.section("P"), t_list)
    start_worker_pool(3)
    try:
        parallel = section_scan(tt_surface, tt_surface.section("P"), t_list)
    finally:
        close_worker_pool()
    assert [r.model_dump() for r in serial] == [r.model_dump() for r in parallel]


def test_base_forms_change_only_the_base_height(tt_surface):
    squares = FormSystem.from_text(["x^2", "y^2"])
    t_list = scan_parameters(5)
    plain = section_scan(tt_surface, tt_surface.section("P"), t_list)
    normalised = section_scan(tt_surface, tt_surface.section("P"), t_list, base_forms=squares)
    for a, b in zip(plain, normalised):
        assert a.h_t == pytest.approx(b.h_t)
        assert a.hhat_spec == b.hhat_spec


def test_isotrivial_surface_is_refused():
    cube = load_fixture("cube-twist").surface
    with pytest.raises(PreconditionError):
        theorem3_scan(cube, cube.section("P"), [1, 2])


def test_ratio_envelope_is_nonincreasing(tt_surface):
    records = theorem3_scan(tt_surface, tt_surface.section("P"), scan_parameters(12))
    envelope = ratio_envelope(records)
    tails = [v for _, v in envelope]
    assert tails == sorted(tails, reverse=True)
    deciles = decile_summary(records)
    assert sum(d.count for d in deciles) == len([r for r in records if not r.is_bad and r.ratio is not None])
    fit = fit_ratio_envelope(records)
    assert fit.constant > 0
    assert fit.train_size + fit.test_size == len(envelope)


def test_theorem4_residual_sup(tt_surface):
    records, sup = theorem4_scan(tt_surface, tt_surface.section("P"), scan_parameters(12))
    assert sup == max(abs(r.residual_t4) for r in records if r.residual_t4 is not None)
    assert math.isfinite(residual_slope(records))


def test_linear_envelope():
    envelope = linear_envelope([(1.0, 2.0), (2.0, 3.0), (3.0, 4.0)])
    assert envelope.c == pytest.approx(1.0)
    assert envelope.c_prime == pytest.approx(1.0)
    flat = linear_envelope([(1.0, 5.0), (4.0, 1.0)])
    assert flat.c == 0 and flat.c_prime == 5.0
    with pytest.raises(ValueError):
        linear_envelope([])


def test_theorem2_envelope_bounds_every_fibre(tt_surface):
    records = section_scan(tt_surface, tt_surface.section("P"), scan_parameters(10))
    envelope = theorem2_fit(tt_surface, tt_surface.section("P"), scan_parameters(10))
    for r in records:
        if r.hhat_spec is not None:
            assert abs(r.hhat_spec - r.naive_spec) <= envelope.c * r.h_t + envelope.c_prime + 1e-9


def test_theorem2_envelope_holds_on_a_disjoint_sample(tt_surface):
    section = tt_surface.section("P")
    params = scan_parameters(12)
    train, validation = params[::2], params[1::2]
    assert not set(train) & set(validation)
    envelope = theorem2_fit(tt_surface, section, train)
    checked = 0
    for r in section_scan(tt_surface, section, validation):
        if r.hhat_spec is not None:
            assert abs(r.hhat_spec - r.naive_spec) <= envelope.c * r.h_t + envelope.c_prime + 1
            checked += 1
    assert checked > 10


def _flagged(records):
    return {str(r.t) for r in records if RANK_DROP in r.flags or RANK_DROP_UNCONFIRMED in r.flags}


def test_rank_drop_flags_are_stable(tt_surface):
    gamma = [tt_surface.section("P"), tt_surface.section("Q")]
    records = rank_drop_records(tt_surface, gamma, 8)
    assert [r.t for r in records] == sorted((r.t for r in records), key=lambda t: max(abs(t.p), t.q))
    assert _flagged(rank_drop_records(tt_surface, gamma, 8, tol=1e-7)) == _flagged(records)
    # unimodular change of basis: (P, Q) -> (P, P + Q)
    other = [gamma[0], add(tt_surface.curve, gamma[0], gamma[1])]
    assert _flagged(rank_drop_records(tt_surface, other, 8)) == _flagged(records)
    confirmed = {str(r.t) for r in exceptional_scan(tt_surface, gamma, 8)}
    assert confirmed <= _flagged(records)


def test_dependent_sections_are_refused(tt_surface):
    p = tt_surface.section("P")
    with pytest.raises(PreconditionError):
        rank_drop_records(tt_surface, [p, mul_scalar(tt_surface.curve, 2, p)], 5)


def test_deciles_ignore_a_late_outlier():
    third = Fraction(1, 3)
    records = [ScanRecord(t_num=n, t_den=1, h_t=float(n), hhat_geom=third, ratio=1 / 3 + 1 / n) for n in range(1, 101)]
    records[-1] = records[-1].model_copy(update={"ratio": 1 / 3 + 2.0})
    deciles = decile_summary(records)
    assert len(deciles) == 10 and all(d.count == 10 for d in deciles)
    assert deciles[-1].max_deviation > deciles[0].max_deviation
    assert deciles[-1].median_deviation < deciles[0].median_deviation
    assert deciles[0].median_deviation == pytest.approx((1 / 5 + 1 / 6) / 2)


@pytest.mark.slow
def test_theorem3_ratio_converges(tt_surface):
    records = theorem3_scan(tt_surface, tt_surface.section("P"), scan_parameters(200, 500))
    deciles = decile_summary(records)
    assert deciles[-1].median_deviation < deciles[0].median_deviation
    assert deciles[-1].mean_deviation < deciles[0].mean_deviation
    assert fit_ratio_envelope(records).validated


@pytest.mark.slow
def test_theorem4_residual_slope(tt_surface):
    records, sup = theorem4_scan(tt_surface, tt_surface.section("P"), scan_parameters(200, 500))
    assert math.isfinite(sup)
    assert residual_slope(records) <= 0.6


@pytest.mark.slow
def test_theorem1_exceptional_set(tt_surface):
    records = rank_drop_records(tt_surface, [tt_surface.section("P")], 50)
    assert not any(RANK_DROP_UNCONFIRMED in r.flags for r in records)
    tighter = rank_drop_records(tt_surface, [tt_surface.section("P")], 50, tol=1e-7)
    assert _flagged(tighter) == _flagged(records)
    negated = rank_drop_records(tt_surface, [mul_scalar(tt_surface.curve, -1, tt_surface.section("P"))], 50)
    assert _flagged(negated) == _flagged(records)
