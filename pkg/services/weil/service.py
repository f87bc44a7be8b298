import logging
import math
from functools import partial
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
from pydantic import BaseModel

from infra.config import precision_bits
from infra.errors import BasePointError
from infra.pool import WorkerPool
from services.weil.models import FormSystem, ProjPointQ

logger = logging.getLogger(__name__)


class RatioRow(BaseModel):
    height_bound: int
    deviation: float
    samples: int


class DominanceFit(BaseModel):
    c: float
    constant: float
    points: int


def _log_abs(n: int) -> float:
    return float(mpmath.log(abs(n)))


def weil_height_p1(t: ProjPointQ) -> float:
    """log max(|p|, |q|)"""
    with mpmath.workprec(precision_bits()):
        return _log_abs(max(abs(t.p), abs(t.q)))


def weil_height_forms(t: ProjPointQ, system: FormSystem) -> float:
    values = system.evaluate(t.p, t.q)
    top = max(abs(v) for v in values)
    if top == 0:
        raise BasePointError(f"all forms vanish at {t}")
    with mpmath.workprec(precision_bits()):
        return _log_abs(top)


def normalized_height(t: ProjPointQ, system: FormSystem) -> float:
    """h_D(t) / deg D: a height on C normalised to degree one"""
    return weil_height_forms(t, system) / system.degree


def points_of_bounded_height(bound: int) -> List[ProjPointQ]:
    """
    Every [p:q] with max(|p|, |q|) <= bound, once each, sorted by (height, p, q)
    """
    if bound < 1:
        raise ValueError("height bound must be >= 1")
    points = [(1, 1, 0)]
    for q in range(1, bound + 1):
        for p in range(-bound, bound + 1):
            if math.gcd(p, q) == 1:
                points.append((max(abs(p), q), p, q))
    points.sort()
    return [ProjPointQ(p=p, q=q) for _, p, q in points]


def sample_points_of_height(bound: int, count: int = 64) -> List[ProjPointQ]:
    """
    Deterministic sample of points with max(|p|, |q|) = bound, spread over q/p in (0, 1]
    """
    if bound < 1:
        raise ValueError("height bound must be >= 1")
    seen = set()
    out = []
    for k in range(1, count + 1):
        q = max(1, round(bound * k / count))
        # nearest coprime partner at or below the target
        while q > 1 and math.gcd(q, bound) != 1:
            q -= 1
        for p, r in ((bound, q), (-bound, q), (q, bound)):
            point = ProjPointQ(p=p, q=r)
            if point not in seen:
                seen.add(point)
                out.append(point)
    return out


def _ratio_deviation(t: ProjPointQ, base: FormSystem, other: FormSystem) -> Optional[float]:
    hd = weil_height_forms(t, base)
    if hd <= 0:
        return None
    return abs(weil_height_forms(t, other) / hd - other.degree / base.degree)


def ratio_limit_table(base: FormSystem, other: FormSystem, heights: Sequence[int], samples: int = 64) -> List[RatioRow]:
    """
    For each H the largest |h_E(t)/h_D(t) - e/d| over sampled t of height log H
    """
    rows = []
    for bound in heights:
        points = sample_points_of_height(bound, samples)
        deviations = [d for d in WorkerPool.map(partial(_ratio_deviation, base=base, other=other), points) if d is not None]
        rows.append(RatioRow(height_bound=bound, deviation=max(deviations, default=0.0), samples=len(deviations)))
        logger.debug("ratio limit at H=%d: %.6g over %d points", bound, rows[-1].deviation, len(deviations))
    return rows


def dominance_fit(base: FormSystem, other: FormSystem, points: Iterable[ProjPointQ]) -> DominanceFit:
    """
    Fit h_other <= c * h_base + O(1): c is the largest ratio over the upper half of
    the base heights, the constant is the largest remaining residual
    """
    pairs: List[Tuple[float, float]] = [(weil_height_forms(t, base), weil_height_forms(t, other)) for t in points]
    if not pairs:
        raise ValueError("dominance fit needs at least one point")
    top = max(h for h, _ in pairs)
    tail = [(h, m) for h, m in pairs if h >= top / 2 and h > 0]
    c = max((m / h for h, m in tail), default=0.0)
    constant = max(m - c * h for h, m in pairs)
    return DominanceFit(c=c, constant=max(constant, 0.0), points=len(pairs))


def product_system(first: FormSystem, second: FormSystem) -> FormSystem:
    return first.product(second)


def additivity_defect(t: ProjPointQ, first: FormSystem, second: FormSystem) -> float:
    """|h_{F.G}(t) - h_F(t) - h_G(t)|, bounded by log(#F * #G)"""
    both = product_system(first, second)
    return abs(weil_height_forms(t, both) - weil_height_forms(t, first) - weil_height_forms(t, second))


def squaring_defect(t: ProjPointQ) -> float:
    """|h(t^2) - 2 h(t)| for the squaring map [p:q] -> [p^2:q^2]"""
    square = ProjPointQ(p=t.p * t.p, q=t.q * t.q)
    return abs(weil_height_p1(square) - 2 * weil_height_p1(t))


def coefficient_envelope(system: FormSystem) -> float:
    """
    log((e + 1) * 2^bits) for coefficients of ``bits`` bits: h_F(t) <= e h(t) plus this
    """
    return math.log(system.degree + 1) + system.coefficient_bits() * math.log(2)


def height_bound_gaps(t: ProjPointQ, system: FormSystem) -> Tuple[float, float]:
    """
    (h_F(t) + bits log 2, e h(t) + envelope - h_F(t)); both are >= 0 for every t
    """
    h = weil_height_forms(t, system)
    lower = h + system.coefficient_bits() * math.log(2)
    upper = system.degree * weil_height_p1(t) + coefficient_envelope(system) - h
    return lower, upper
