import logging
import math
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import mpmath

from infra.config import TORSION_BOUND, TORSION_HEIGHT_EPS, precision_bits
from infra.errors import InconsistencyError
from services.algebra.service import log_mp, mp_from_fraction, valuation
from services.curve.models import CurvePoint, WeierstrassCurve
from services.curve.service import add_unchecked, require_on_curve, x_iterates
from services.curve_q.models import GramQ, HeightRecordQ, ReductionData
from services.curve_q.tate import bad_primes, integral_model, tate_at_prime

logger = logging.getLogger(__name__)


def _bits_for(prec: Optional[float]) -> int:
    bits = precision_bits()
    if prec:
        bits = max(bits, int(math.ceil(-math.log2(prec))) + 16)
    return bits


def _height_of_rational(x: Fraction) -> mpmath.mpf:
    return log_mp(max(abs(x.numerator), x.denominator))


def naive_height_q(curve: WeierstrassCurve, point: CurvePoint) -> float:
    """log max(|num x|, den x); 0 at the point at infinity"""
    if point.is_infinity:
        return 0.0
    with mpmath.workprec(precision_bits()):
        return float(_height_of_rational(Fraction(point.x)))


def _to_integral(curve: WeierstrassCurve, point: CurvePoint) -> Tuple[WeierstrassCurve, CurvePoint]:
    model, transform = integral_model(curve)
    return model, point.change_coordinates(*transform)


def _arch_series(model: WeierstrassCurve, x: Fraction, bits: int) -> mpmath.mpf:
    """
    Archimedean local height on an integral model, on the scale log|x| + O(1),
    by the doubling series in the b-invariants
    """
    mpf = mp_from_fraction
    b2, b4, b6, b8 = mpf(model.b2), mpf(model.b4), mpf(model.b6), mpf(model.b8)
    b2p = b2 - 12
    b4p = b4 - b2 + 6
    b6p = b6 - 2 * b4 + b2 - 4
    b8p = b8 - 3 * b6 + 3 * b4 - b2 + 3

    size = max(mpmath.mpf(4), abs(b2), 2 * abs(b4), 2 * abs(b6), abs(b8))
    digits = bits * math.log10(2)
    terms = int(math.ceil(5 * digits / 3 + 0.5 + 0.75 * math.log(7 + 4 * float(mpmath.log(size)) / 3)))

    xm = mpf(x)
    if abs(xm) >= 0.5:
        t = 1 / xm
        beta = True
    else:
        t = 1 / (xm + 1)
        beta = False
    lam = -mpmath.log(abs(t))
    mu = mpmath.mpf(0)
    four = mpmath.mpf(1)
    for _ in range(terms):
        if beta:
            w = t * (4 + t * (b2 + t * (2 * b4 + t * b6)))
            z = 1 - t * t * (b4 + t * (2 * b6 + t * b8))
            zw = z + w
        else:
            w = t * (4 + t * (b2p + t * (2 * b4p + t * b6p)))
            z = 1 - t * t * (b4p + t * (2 * b6p + t * b8p))
            zw = z - w
        if abs(w) <= 2 * abs(z):
            mu += four * mpmath.log(abs(z))
            t = w / z
        else:
            mu += four * mpmath.log(abs(zw))
            t = w / zw
            beta = not beta
        four /= 4
    return lam + mu / 4


def local_height_arch(curve: WeierstrassCurve, point: CurvePoint, prec: Optional[float] = None) -> float:
    """
    lambda_inf(P) on the integral model of ``curve``; ``prec`` is the absolute
    error target
    """
    require_on_curve(curve, point)
    if point.is_infinity:
        return 0.0
    bits = _bits_for(prec)
    model, p_int = _to_integral(curve, point)
    with mpmath.workprec(bits):
        return float(_arch_series(model, Fraction(p_int.x), bits))


def nonarch_coefficient(model: WeierstrassCurve, point: CurvePoint, data: ReductionData) -> Fraction:
    """
    Rational r with lambda_p(P) = r log p, for P on the integral model ``model``
    """
    p = data.prime
    local = data.local_model
    pt = point.change_coordinates(*data.transform)
    x, y = Fraction(pt.x), Fraction(pt.y)
    a1, a2, a3, a4, a6 = local.a_invariants

    def v(value):
        return valuation(value, p)

    big_a = v(3 * x * x + 2 * a2 * x + a4 - a1 * y)
    big_b = v(2 * y + a1 * x + a3)
    big_c = v(3 * x ** 4 + local.b2 * x ** 3 + 3 * local.b4 * x * x + 3 * local.b6 * x + local.b8)
    n_disc = data.v_min_disc

    if big_a <= 0 or big_b <= 0:
        r = Fraction(max(0, -v(x)))
    elif v(local.c4) == 0:
        n = Fraction(n_disc, 2) if big_b == math.inf else min(Fraction(big_b), Fraction(n_disc, 2))
        r = -n * (n_disc - n) / n_disc
    elif big_c >= 3 * big_b:
        r = Fraction(-2 * big_b, 3)
    else:
        r = Fraction(-big_c, 4)
    return r - 2 * data.scaling_exponent


def local_height_nonarch(curve: WeierstrassCurve, point: CurvePoint, p: int,
                         reduction: Optional[ReductionData] = None) -> float:
    """
    lambda_p(P); a supplied ``reduction`` must come from tate_at_prime(curve, p)
    """
    require_on_curve(curve, point)
    if point.is_infinity:
        return 0.0
    model, p_int = _to_integral(curve, point)
    if reduction is None:
        data = tate_at_prime(model, p)
    else:
        if reduction.prime != p:
            raise ValueError(f"reduction data is for {reduction.prime}, not {p}")
        # its transform already starts from curve, integral scaling included
        p_int, data = point, reduction
    with mpmath.workprec(precision_bits()):
        return float(nonarch_coefficient(model, p_int, data) * mpmath.log(p))


def _local_terms(curve: WeierstrassCurve, point: CurvePoint, bits: int) -> Dict[str, mpmath.mpf]:
    """
    Keys "inf", one per bad prime, and "good": the good primes together contribute
    log of the denominator of x with the bad primes removed
    """
    model, p_int = _to_integral(curve, point)
    terms = {"inf": _arch_series(model, Fraction(p_int.x), bits)}
    rest = Fraction(p_int.x).denominator
    for p in bad_primes(model):
        while rest % p == 0:
            rest //= p
        coeff = nonarch_coefficient(model, p_int, tate_at_prime(model, p))
        if coeff != 0:
            terms[str(p)] = mp_from_fraction(coeff) * mpmath.log(p)
    if rest > 1:
        # x has denominator d^2 at good primes, so lambda_p = 2 v_p(d) log p
        terms["good"] = mpmath.log(rest)
    return terms


def _hhat(curve: WeierstrassCurve, point: CurvePoint, bits: int) -> mpmath.mpf:
    if point.is_infinity:
        return mpmath.mpf(0)
    return mpmath.fsum(_local_terms(curve, point, bits).values())


def canonical_height_q(curve: WeierstrassCurve, point: CurvePoint, prec: Optional[float] = None) -> HeightRecordQ:
    """
    hhat(P) = lambda_inf + sum over primes of lambda_p, on the h(x) scale
    """
    require_on_curve(curve, point)
    if point.is_infinity:
        return HeightRecordQ(point=point, naive=0.0, canonical=0.0, local_terms={})
    bits = _bits_for(prec)
    with mpmath.workprec(bits):
        terms = _local_terms(curve, point, bits)
        total = float(mpmath.fsum(terms.values()))
    if total < 0:
        if total < -TORSION_HEIGHT_EPS:
            logger.warning("negative canonical height %.3g for %s; raise the precision", total, point)
        total = 0.0 if total > -TORSION_HEIGHT_EPS else total
    logger.debug("hhat(%s) = %.15g from %d local terms", point, total, len(terms))
    return HeightRecordQ(
        point=point,
        naive=naive_height_q(curve, point),
        canonical=total,
        local_terms={k: float(v) for k, v in terms.items()},
    )


def canonical_height_value(curve: WeierstrassCurve, point: CurvePoint) -> float:
    return canonical_height_q(curve, point).canonical


def height_pairing_q(curve: WeierstrassCurve, p: CurvePoint, q: CurvePoint) -> float:
    """<P, Q> = (hhat(P + Q) - hhat(P) - hhat(Q)) / 2"""
    require_on_curve(curve, p, q)
    bits = precision_bits()
    with mpmath.workprec(bits):
        return float(_pairing(curve, p, q, bits))


def _pairing(curve, p, q, bits) -> mpmath.mpf:
    return (_hhat(curve, add_unchecked(curve, p, q), bits) - _hhat(curve, p, bits) - _hhat(curve, q, bits)) / 2


def gram_q(curve: WeierstrassCurve, points: Sequence[CurvePoint]) -> GramQ:
    require_on_curve(curve, *points)
    bits = precision_bits()
    n = len(points)
    with mpmath.workprec(bits):
        heights = [_hhat(curve, p, bits) for p in points]
        m = mpmath.matrix(n, n)
        for i in range(n):
            m[i, i] = heights[i]
            for j in range(i + 1, n):
                s = _hhat(curve, add_unchecked(curve, points[i], points[j]), bits)
                m[i, j] = m[j, i] = (s - heights[i] - heights[j]) / 2
        det = mpmath.det(m) if n else mpmath.mpf(1)
        matrix = tuple(tuple(float(m[i, j]) for j in range(n)) for i in range(n))
        return GramQ(matrix=matrix, determinant=float(det))


def torsion_order_q(curve: WeierstrassCurve, point: CurvePoint, bound: int = TORSION_BOUND) -> Optional[int]:
    """Least n <= bound with nP = O, or None"""
    require_on_curve(curve, point)
    multiple = point
    for n in range(1, bound + 1):
        if multiple.is_infinity:
            return n
        multiple = add_unchecked(curve, multiple, point)
    return None


def torsion_test_q(curve: WeierstrassCurve, point: CurvePoint, bound: int = TORSION_BOUND) -> bool:
    """
    nP = O for some n <= bound, cross-checked against hhat(P) < eps
    """
    exact = torsion_order_q(curve, point, bound) is not None
    small = canonical_height_value(curve, point) < TORSION_HEIGHT_EPS
    if exact != small:
        raise InconsistencyError(
            f"torsion search says {exact} but canonical height says {small} for {point}; raise the precision"
        )
    return exact


def doubling_limit_oracle(curve: WeierstrassCurve, point: CurvePoint, depth: int = 6) -> float:
    """
    h(x(2^n P)) / 4^n at n = depth, by x-only doubling; 0 when 2^k P = O on the way
    """
    require_on_curve(curve, point)
    xs = x_iterates(curve, point, depth)
    if len(xs) < depth + 1:
        return 0.0
    with mpmath.workprec(precision_bits()):
        return float(_height_of_rational(Fraction(xs[-1])) / mpmath.mpf(4) ** depth)


def naive_difference_bound(curve: WeierstrassCurve) -> float:
    """
    Envelope for |hhat(P) - h(x(P))| computed from the coefficients of the
    integral model (doubled difference bounds with slack)
    """
    model, _ = integral_model(curve)
    delta = model.discriminant
    with mpmath.workprec(precision_bits()):
        h_delta = _height_of_rational(Fraction(delta))
        c4 = Fraction(model.c4)
        j = c4 ** 3 / delta
        h_j = _height_of_rational(j)
        b2 = Fraction(model.b2)
        two_star = 2 if b2 != 0 else 1
        b2_term = max(mpmath.mpf(0), log_mp(abs(b2) / 12)) if b2 != 0 else mpmath.mpf(0)
        bound = h_j / 4 + h_delta / 6 + 2 * b2_term + 2 * mpmath.log(two_star) + mpmath.mpf("2.14")
        return float(bound)
