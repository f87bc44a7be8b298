import itertools
import logging
import math
from fractions import Fraction
from functools import partial
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy

from infra.config import RANK_TOL, TORSION_BOUND, TORSION_HEIGHT_EPS, precision_bits
from infra.errors import BadFiberError, ContractViolation, PoleError, PreconditionError
from infra.pool import WorkerPool
from services.algebra.models import RationalFunction
from services.curve.models import CurvePoint, WeierstrassCurve
from services.curve.service import add, linear_combination, on_curve
from services.curve_ft.models import EllipticSurface
from services.curve_ft.service import (
    geom_height_value,
    gram_geom,
    is_isotrivial,
    model_at_infinity,
    section_at_infinity,
)
from services.curve_q.service import canonical_height_value, gram_q, naive_height_q, torsion_order_q
from services.specialize.models import (
    BAD_FIBER,
    RANK_DROP,
    RANK_DROP_UNCONFIRMED,
    TORSION_SPECIALIZATION,
    DecileRow,
    EnvelopeFit,
    LinearEnvelope,
    ScanRecord,
)
from services.weil.models import FormSystem, ProjPointQ
from services.weil.service import normalized_height, points_of_bounded_height, weil_height_p1

logger = logging.getLogger(__name__)

Param = Union[ProjPointQ, Fraction, int]


def _as_point(t: Param) -> ProjPointQ:
    return t if isinstance(t, ProjPointQ) else ProjPointQ.of(t)


def _chart(curve: WeierstrassCurve, t: ProjPointQ):
    """(model, section map, parameter value) for the chart containing t"""
    if t.is_infinity:
        model, _ = model_at_infinity(curve)
        return model, partial(section_at_infinity, curve), Fraction(0)
    return curve, (lambda point: point), t.to_fraction()


def _evaluate(f, s: Fraction) -> Fraction:
    return RationalFunction.coerce(f)(s)


def _fiber(curve: WeierstrassCurve, t: ProjPointQ) -> Optional[WeierstrassCurve]:
    model, _, s = _chart(curve, t)
    try:
        coeffs = [_evaluate(a, s) for a in model.a_invariants]
    except PoleError:
        return None
    fiber = WeierstrassCurve(*coeffs, name=f"{curve.name}@{t}")
    if fiber.discriminant == 0:
        return None
    return fiber


def good_fiber(surface: EllipticSurface, t: Param) -> bool:
    """Coefficients defined at t and discriminant nonzero there"""
    return _fiber(surface.curve, _as_point(t)) is not None


def specialize_curve(surface: EllipticSurface, t: Param) -> WeierstrassCurve:
    t = _as_point(t)
    fiber = _fiber(surface.curve, t)
    if fiber is None:
        raise BadFiberError(t)
    return fiber


def _specialize_point(curve: WeierstrassCurve, fiber: WeierstrassCurve, point: CurvePoint, t: ProjPointQ) -> CurvePoint:
    if point.is_infinity:
        return point
    _, to_chart, s = _chart(curve, t)
    moved = to_chart(point)
    try:
        image = CurvePoint(_evaluate(moved.x, s), _evaluate(moved.y, s))
    except PoleError:
        return CurvePoint.infinity()
    if not on_curve(fiber, image):
        raise ContractViolation(f"specialization of {point} at t = {t} left the fibre")
    return image


def specialize_section(surface: EllipticSurface, section: CurvePoint, t: Param) -> CurvePoint:
    """sigma_t(P); a pole of x or y at t gives the point at infinity"""
    t = _as_point(t)
    return _specialize_point(surface.curve, specialize_curve(surface, t), section, t)


def homomorphism_check(surface: EllipticSurface, p: CurvePoint, q: CurvePoint, t: Param) -> bool:
    """sigma_t(P + Q) == sigma_t(P) + sigma_t(Q), exactly"""
    t = _as_point(t)
    fiber = specialize_curve(surface, t)
    total = add(surface.curve, p, q)
    lhs = specialize_section(surface, total, t)
    rhs = add(fiber, specialize_section(surface, p, t), specialize_section(surface, q, t))
    return lhs == rhs


def _h_t(t: ProjPointQ, base_forms: Optional[FormSystem]) -> float:
    return normalized_height(t, base_forms) if base_forms is not None else weil_height_p1(t)


def _scan_fiber(job) -> ScanRecord:
    curve, section, t, hhat_geom, base_forms = job
    h_t = _h_t(t, base_forms)
    record = ScanRecord(t_num=t.p, t_den=t.q, h_t=h_t, hhat_geom=hhat_geom)
    fiber = _fiber(curve, t)
    if fiber is None:
        record.flags = [BAD_FIBER]
        return record
    point = _specialize_point(curve, fiber, section, t)
    with mpmath.workprec(precision_bits()):
        hhat = canonical_height_value(fiber, point)
    record.hhat_spec = hhat
    record.naive_spec = naive_height_q(fiber, point)
    record.gram_det = hhat
    if hhat < TORSION_HEIGHT_EPS and torsion_order_q(fiber, point, TORSION_BOUND) is not None:
        record.flags = [TORSION_SPECIALIZATION]
    if h_t > 0:
        record.ratio = hhat / h_t
        if hhat_geom is not None:
            record.residual_t4 = (hhat - float(hhat_geom) * h_t) / (1 + math.sqrt(h_t))
    return record


def scan_parameters(tmax: int, samples: Optional[int] = None) -> List[ProjPointQ]:
    """
    Points of P^1(Q) with max(|p|, |q|) <= tmax in height order; with ``samples``,
    an evenly spaced subsequence of that many of them
    """
    points = points_of_bounded_height(tmax)
    if samples is None or samples >= len(points):
        return points
    if samples < 1:
        raise ValueError("samples must be >= 1")
    picks = numpy.unique(numpy.linspace(0, len(points) - 1, samples).round().astype(int))
    return [points[i] for i in picks]


def _require_theorem_surface(surface: EllipticSurface):
    if is_isotrivial(surface):
        raise PreconditionError(f"{surface.name or surface.curve} is isotrivial; theorem scans need a non-constant j-invariant")


def section_scan(surface: EllipticSurface, section: CurvePoint, t_list: Iterable[Param],
                 base_forms: Optional[FormSystem] = None) -> List[ScanRecord]:
    """
    One ScanRecord per t, in input order; bad fibres are flagged, not dropped
    """
    _require_theorem_surface(surface)
    hhat_geom = geom_height_value(surface, section)
    points = [_as_point(t) for t in t_list]
    jobs = [(surface.curve, section, t, hhat_geom, base_forms) for t in points]
    records = WorkerPool.map(_scan_fiber, jobs)
    skipped = sum(1 for r in records if r.is_bad)
    if skipped:
        logger.warning("skipped %d bad fibres out of %d", skipped, len(records))
    logger.info("scanned %d fibres, hhat_geom = %s", len(records), hhat_geom)
    return records


def theorem3_scan(surface: EllipticSurface, section: CurvePoint, t_list: Iterable[Param],
                  base_forms: Optional[FormSystem] = None) -> List[ScanRecord]:
    """hhat(P_t) / h(t) against hhat_geom(P)"""
    return section_scan(surface, section, t_list, base_forms)


def theorem4_scan(surface: EllipticSurface, section: CurvePoint, t_list: Iterable[Param],
                  base_forms: Optional[FormSystem] = None) -> Tuple[List[ScanRecord], float]:
    """
    Records with the residual (hhat(P_t) - hhat_geom h(t)) / (1 + sqrt(h(t))) and
    its supremum over the scan
    """
    records = section_scan(surface, section, t_list, base_forms)
    sup = max((abs(r.residual_t4) for r in records if r.residual_t4 is not None), default=0.0)
    return records, sup


def _good(records: Sequence[ScanRecord]) -> List[ScanRecord]:
    return [r for r in records if not r.is_bad and r.ratio is not None and r.hhat_geom is not None]


def ratio_envelope(records: Sequence[ScanRecord]) -> List[Tuple[float, float]]:
    """
    (h, max over h_t >= h of |ratio - hhat_geom|) for every h_t in the scan,
    in increasing h; nonincreasing in h
    """
    rows = sorted(_good(records), key=lambda r: r.h_t)
    out = []
    tail = 0.0
    for r in reversed(rows):
        tail = max(tail, abs(r.ratio - float(r.hhat_geom)))
        out.append((r.h_t, tail))
    out.reverse()
    return out


def fit_ratio_envelope(records: Sequence[ScanRecord], slack: float = 1.5) -> EnvelopeFit:
    """
    Fit C in |ratio - hhat_geom| <= C / sqrt(h_t) on alternate rows, check the rest
    against slack * C
    """
    rows = sorted(_good(records), key=lambda r: r.h_t)
    train, test = rows[0::2], rows[1::2]

    def scaled(r):
        return abs(r.ratio - float(r.hhat_geom)) * math.sqrt(r.h_t)

    constant = max((scaled(r) for r in train), default=0.0)
    excess = max((scaled(r) - slack * constant for r in test), default=0.0)
    return EnvelopeFit(
        constant=constant,
        validated=excess <= 0,
        train_size=len(train),
        test_size=len(test),
        worst_test_excess=excess,
    )


def decile_summary(records: Sequence[ScanRecord]) -> List[DecileRow]:
    """
    |ratio - hhat_geom| by deciles of h_t. Convergence is read off the median: a
    few additive fibres near the top of the range dominate the max
    """
    rows = sorted(_good(records), key=lambda r: r.h_t)
    if not rows:
        return []
    out = []
    for chunk in numpy.array_split(numpy.arange(len(rows)), min(10, len(rows))):
        part = [rows[i] for i in chunk]
        devs = [abs(r.ratio - float(r.hhat_geom)) for r in part]
        out.append(DecileRow(
            h_low=part[0].h_t,
            h_high=part[-1].h_t,
            count=len(part),
            mean_deviation=float(numpy.mean(devs)),
            median_deviation=float(numpy.median(devs)),
            max_deviation=float(numpy.max(devs)),
        ))
    return out


def residual_slope(records: Sequence[ScanRecord]) -> float:
    """Least-squares slope of log|residual| against log h_t"""
    pts = [(math.log(r.h_t), math.log(abs(r.residual_t4) * (1 + math.sqrt(r.h_t))))
           for r in records
           if r.residual_t4 is not None and r.h_t > 0 and abs(r.residual_t4) > 1e-12]
    if len(pts) < 2:
        return 0.0
    xs, ys = zip(*pts)
    slope, _ = numpy.polyfit(numpy.array(xs), numpy.array(ys), 1)
    return float(slope)


def linear_envelope(points: Sequence[Tuple[float, float]]) -> LinearEnvelope:
    """
    Line y = c x + c' with c, c' >= 0 above every (x, y), minimising the mean of
    c x + c' over the sample: the upper-hull edge over the mean x
    """
    if not points:
        raise ValueError("envelope of an empty sample")
    pts = sorted(set(points))
    hull: List[Tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    mean_x = sum(x for x, _ in pts) / len(pts)
    c, c_prime = 0.0, max(y for _, y in pts)
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= mean_x <= x2 and x2 > x1:
            c = (y2 - y1) / (x2 - x1)
            c_prime = y1 - c * x1
            break
    if c < 0:
        c, c_prime = 0.0, max(y for _, y in pts)
    if c_prime < 0:
        c_prime = 0.0
        c = max((y / x for x, y in pts if x > 0), default=0.0)
    return LinearEnvelope(c=c, c_prime=c_prime, points=len(pts))


def theorem2_fit(surface: EllipticSurface, section: CurvePoint, t_list: Iterable[Param],
                 base_forms: Optional[FormSystem] = None) -> LinearEnvelope:
    """
    Envelope |hhat(P_t) - h(x(P_t))| <= c h(t) + c' over the scan
    """
    records = section_scan(surface, section, t_list, base_forms)
    return envelope_of_records(records)


def envelope_of_records(records: Sequence[ScanRecord]) -> LinearEnvelope:
    pts = [(r.h_t, abs(r.hhat_spec - r.naive_spec)) for r in records if r.hhat_spec is not None]
    return linear_envelope(pts)


def _small_combinations(rank: int, reach: int = 3):
    for coeffs in itertools.product(range(-reach, reach + 1), repeat=rank):
        if any(coeffs):
            yield coeffs


def _rank_drop_fiber(job) -> ScanRecord:
    curve, sections, t, det_geom, tol, base_forms = job
    h_t = _h_t(t, base_forms)
    record = ScanRecord(t_num=t.p, t_den=t.q, h_t=h_t)
    fiber = _fiber(curve, t)
    if fiber is None:
        record.flags = [BAD_FIBER]
        return record
    points = [_specialize_point(curve, fiber, s, t) for s in sections]
    with mpmath.workprec(precision_bits()):
        det = gram_q(fiber, points).determinant
    record.gram_det = det
    if len(sections) == 1:
        record.hhat_spec = det
        if h_t > 0:
            record.ratio = det / h_t
    scale = det_geom * max(h_t, 1.0) ** len(sections)
    if det < tol * scale:
        confirmed = any(
            torsion_order_q(fiber, linear_combination(fiber, coeffs, points), TORSION_BOUND) is not None
            for coeffs in _small_combinations(len(points))
        )
        record.flags = [RANK_DROP if confirmed else RANK_DROP_UNCONFIRMED]
    return record


def rank_drop_records(surface: EllipticSurface, sections: Sequence[CurvePoint], height_bound: int,
                      tol: float = RANK_TOL, base_forms: Optional[FormSystem] = None,
                      t_list: Optional[Iterable[Param]] = None) -> List[ScanRecord]:
    """
    Every t with max(|p|, |q|) <= height_bound (or every t of ``t_list``), with rank-drop
    flags on those whose specialised Gram determinant falls below
    tol * det(Gram_geom) * max(h_t, 1)^r
    """
    _require_theorem_surface(surface)
    gram = gram_geom(surface, sections)
    if gram.determinant == 0:
        raise PreconditionError("the sections are dependent in the Mordell-Weil group of the surface")
    det_geom = float(gram.determinant)
    jobs = [(surface.curve, tuple(sections), t, det_geom, tol, base_forms)
            for t in (points_of_bounded_height(height_bound) if t_list is None else map(_as_point, t_list))]
    records = WorkerPool.map(_rank_drop_fiber, jobs)
    for r in records:
        if RANK_DROP_UNCONFIRMED in r.flags:
            logger.warning("t = %s: Gram determinant %.3g below threshold but no small torsion combination", r.t, r.gram_det)
    records.sort(key=lambda r: r.h_t)
    return records


def exceptional_scan(surface: EllipticSurface, sections: Sequence[CurvePoint], height_bound: int,
                     tol: float = RANK_TOL, base_forms: Optional[FormSystem] = None) -> List[ScanRecord]:
    """Confirmed rank-drop fibres up to the height bound, sorted by h_t"""
    records = rank_drop_records(surface, sections, height_bound, tol, base_forms)
    return [r for r in records if RANK_DROP in r.flags]
