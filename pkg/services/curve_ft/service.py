import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from sympy import Matrix, Rational

from infra.config import GEOM_MAX_DEGREE, GEOM_MAX_DEPTH, GEOM_MIN_DEPTH, TORSION_BOUND
from infra.errors import InconsistencyError, ResourceError, SingularCurveError, UnsupportedError
from services.algebra.models import Polynomial, RationalFunction
from services.algebra.service import rational_reconstruct
from services.curve.models import CurvePoint, WeierstrassCurve
from services.curve.service import add_unchecked, double_x, require_on_curve
from services.curve_ft.models import (
    INFINITY_PLACE,
    EllipticSurface,
    FiberReduction,
    GeomHeightRecord,
    GramGeom,
    Place,
)
from services.curve_q.models import kodaira_denominator

logger = logging.getLogger(__name__)

_ADDITIVE_TYPES = {2: "II", 3: "III", 4: "IV", 6: "I0*", 8: "IV*", 9: "III*", 10: "II*"}


def _curve_of(surface: Union[EllipticSurface, WeierstrassCurve]) -> WeierstrassCurve:
    return surface.curve if isinstance(surface, EllipticSurface) else surface


def place_valuation(f, place: Place) -> float:
    f = RationalFunction.coerce(f)
    if f.is_zero():
        return math.inf
    return f.valuation_at_infinity() if place.is_infinity else f.valuation(place.poly)


def place_reduction(surface: Union[EllipticSurface, WeierstrassCurve], place: Place) -> FiberReduction:
    """
    Kodaira type of the fibre over ``place`` from the valuations of c4, c6 and the
    discriminant after minimal rescaling
    """
    curve = _curve_of(surface)
    vc4 = place_valuation(curve.c4, place)
    vc6 = place_valuation(curve.c6, place)
    vd = place_valuation(curve.discriminant, place)
    if vd == math.inf:
        raise SingularCurveError(f"{curve} has zero discriminant")
    shift = vd // 12
    if vc4 != math.inf:
        shift = min(shift, vc4 // 4)
    if vc6 != math.inf:
        shift = min(shift, vc6 // 6)
    vmin = vd - 12 * shift
    c4m = vc4 - 4 * shift
    c6m = vc6 - 6 * shift

    if vmin == 0:
        kodaira = "I0"
    elif c4m == 0:
        kodaira = f"I{vmin}"
    elif vmin > 6 and c4m == 2 and c6m == 3:
        kodaira = f"I{vmin - 6}*"
    elif vmin in _ADDITIVE_TYPES:
        kodaira = _ADDITIVE_TYPES[vmin]
    else:
        raise InconsistencyError(f"no Kodaira type for v(c4)={c4m}, v(c6)={c6m}, v(disc)={vmin} at {place}")
    return FiberReduction(
        place=place, kodaira=kodaira, v_c4=vc4, v_c6=vc6, v_disc=int(vd), v_min_disc=int(vmin), shift=int(shift)
    )


def _place_sort_key(place: Place):
    if place.is_infinity:
        return (1, 0, ())
    return (0, place.poly.degree, place.poly.coeffs)


@lru_cache(maxsize=128)
def _bad_places(curve: WeierstrassCurve) -> Tuple[Place, ...]:
    delta = curve.discriminant
    if delta == 0:
        raise SingularCurveError(f"{curve} has zero discriminant")
    candidates = set()
    for poly in [delta.num, delta.den] + [a.den for a in curve.a_invariants]:
        if poly.is_constant():
            continue
        _, factors = poly.factor()
        candidates.update(Place(f) for f, _ in factors)
    candidates.add(INFINITY_PLACE)
    bad = [place for place in candidates if not place_reduction(curve, place).is_good]
    bad.sort(key=_place_sort_key)
    logger.debug("bad places of %s: %s", curve, ", ".join(map(str, bad)))
    return tuple(bad)


def bad_places(surface: Union[EllipticSurface, WeierstrassCurve]) -> List[Place]:
    """Places with singular minimal fibre, the place at infinity included"""
    return list(_bad_places(_curve_of(surface)))


def fiber_reductions(surface: Union[EllipticSurface, WeierstrassCurve]) -> List[FiberReduction]:
    curve = _curve_of(surface)
    return [place_reduction(curve, place) for place in _bad_places(curve)]


def denominator_bound(surface: Union[EllipticSurface, WeierstrassCurve]) -> int:
    """lcm of the local correction denominators over the bad fibres"""
    bound = 1
    for red in fiber_reductions(surface):
        bound = math.lcm(bound, kodaira_denominator(red.kodaira))
    return bound


def model_at_infinity(surface: Union[EllipticSurface, WeierstrassCurve]) -> Tuple[WeierstrassCurve, int]:
    """
    Model in the chart S = 1/T with the smallest integral rescaling k:
    a_i' = S^(ik) a_i(1/S)
    """
    curve = _curve_of(surface)
    k = None
    for a, i in zip(curve.a_invariants, (1, 2, 3, 4, 6)):
        if a.is_zero():
            continue
        need = -(a.valuation_at_infinity() // i)
        k = need if k is None else max(k, need)
    k = k or 0
    s = RationalFunction.variable()
    coeffs = [a.at_infinity() * s ** (i * k) for a, i in zip(curve.a_invariants, (1, 2, 3, 4, 6))]
    return WeierstrassCurve(*coeffs, name=curve.name), k


def section_at_infinity(surface: Union[EllipticSurface, WeierstrassCurve], point: CurvePoint) -> CurvePoint:
    if point.is_infinity:
        return point
    _, k = model_at_infinity(surface)
    s = RationalFunction.variable()
    return CurvePoint(point.x.at_infinity() * s ** (2 * k), point.y.at_infinity() * s ** (3 * k))


def geom_naive_height(surface: Union[EllipticSurface, WeierstrassCurve], point: CurvePoint) -> int:
    """Degree of x(P) as a map P^1 -> P^1"""
    if point.is_infinity:
        return 0
    return RationalFunction.coerce(point.x).degree


def is_isotrivial(surface: Union[EllipticSurface, WeierstrassCurve]) -> bool:
    return _curve_of(surface).j_invariant.is_constant()


def _settled_estimate(degrees: Sequence[int], bound: int) -> Optional[Fraction]:
    """
    (d_{n+k} - d_n) / (4^n (4^k - 1)) for the last two n, k <= 4; settled when both
    agree and the denominator divides ``bound``
    """
    m = len(degrees) - 1
    for k in range(1, 5):
        n = m - k
        if n - 1 < 0:
            break
        last = Fraction(degrees[m] - degrees[n], 4 ** n * (4 ** k - 1))
        prev = Fraction(degrees[m - 1] - degrees[n - 1], 4 ** (n - 1) * (4 ** k - 1))
        if last == prev and bound % last.denominator == 0:
            return last
    return None


@lru_cache(maxsize=512)
def _geom_hhat(curve: WeierstrassCurve, point: CurvePoint, max_depth: int, max_degree: int, min_depth: int):
    if point.is_infinity:
        return Fraction(0), 0, ()
    bound = denominator_bound(curve)
    x = RationalFunction.coerce(point.x)
    degrees = [x.degree]
    for depth in range(1, max_depth + 1):
        nxt = double_x(curve, x)
        if nxt is None:
            # 2^depth P = O
            return Fraction(0), depth, tuple(degrees)
        if max(nxt.num.degree if not nxt.is_zero() else 0, nxt.den.degree) > max_degree:
            logger.info("degree budget %d reached after %d doublings", max_degree, depth - 1)
            break
        x = nxt
        degrees.append(x.degree)
        if depth >= min_depth:
            settled = _settled_estimate(degrees, bound)
            if settled is not None:
                return settled, depth, tuple(degrees)
    m = len(degrees) - 1
    if m >= 1:
        estimate = Fraction(degrees[m] - degrees[m - 1], 3 * 4 ** (m - 1))
        guess = rational_reconstruct(estimate, bound, Fraction(1, 4 ** (m - 1)))
        if guess is not None:
            logger.warning("geometric height of %s reconstructed from depth %d: %s", point, m, guess)
            return guess, m, tuple(degrees)
    raise ResourceError(f"geometric canonical height of {point} did not settle; achieved depth {m}")


def geom_canonical_height(surface: Union[EllipticSurface, WeierstrassCurve], point: CurvePoint, name: str = "",
                          max_depth: int = GEOM_MAX_DEPTH, max_degree: int = GEOM_MAX_DEGREE,
                          min_depth: int = GEOM_MIN_DEPTH) -> GeomHeightRecord:
    """
    lim deg x(2^n P) / 4^n, exact: the periodic part of the degree sequence cancels
    in differences d_{n+k} - d_n once the period k is reached. At least ``min_depth``
    doublings are made unless the budget or a torsion point stops the sequence first
    """
    curve = _curve_of(surface)
    require_on_curve(curve, point)
    value, depth, degrees = _geom_hhat(curve, point, max_depth, max_degree, min(min_depth, max_depth))
    return GeomHeightRecord(
        name=name,
        naive=geom_naive_height(curve, point),
        canonical_exact=value,
        canonical=float(value),
        depth=depth,
        degrees=degrees,
    )


def geom_height_value(surface, point: CurvePoint) -> Fraction:
    return geom_canonical_height(surface, point).canonical_exact


def _require_non_isotrivial(curve: WeierstrassCurve):
    if is_isotrivial(curve):
        raise UnsupportedError("height pairing on an isotrivial surface needs the Chow trace, which is not supported")


def geom_pairing(surface: Union[EllipticSurface, WeierstrassCurve], p: CurvePoint, q: CurvePoint) -> Fraction:
    """<P, Q> = (hhat(P + Q) - hhat(P) - hhat(Q)) / 2, exact"""
    curve = _curve_of(surface)
    _require_non_isotrivial(curve)
    require_on_curve(curve, p, q)
    total = geom_height_value(curve, add_unchecked(curve, p, q))
    return (total - geom_height_value(curve, p) - geom_height_value(curve, q)) / 2


def gram_geom(surface: Union[EllipticSurface, WeierstrassCurve], points: Sequence[CurvePoint]) -> GramGeom:
    curve = _curve_of(surface)
    _require_non_isotrivial(curve)
    require_on_curve(curve, *points)
    heights = [geom_height_value(curve, p) for p in points]
    n = len(points)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = heights[i]
        for j in range(i + 1, n):
            s = geom_height_value(curve, add_unchecked(curve, points[i], points[j]))
            rows[i][j] = rows[j][i] = (s - heights[i] - heights[j]) / 2
    if n:
        det = Matrix([[Rational(v.numerator, v.denominator) for v in row] for row in rows]).det()
        det = Fraction(int(det.p), int(det.q))
    else:
        det = Fraction(1)
    return GramGeom(matrix=tuple(tuple(row) for row in rows), determinant=det)


def torsion_order_ft(surface, point: CurvePoint, bound: int = TORSION_BOUND) -> Optional[int]:
    curve = _curve_of(surface)
    require_on_curve(curve, point)
    multiple = point
    for n in range(1, bound + 1):
        if multiple.is_infinity:
            return n
        multiple = add_unchecked(curve, multiple, point)
    return None


def torsion_test_ft(surface, point: CurvePoint, bound: int = TORSION_BOUND) -> bool:
    """
    nP = O for some n <= bound; on non-isotrivial surfaces cross-checked with hhat_geom = 0
    """
    curve = _curve_of(surface)
    exact = torsion_order_ft(curve, point, bound) is not None
    if not is_isotrivial(curve):
        zero = geom_height_value(curve, point) == 0
        if zero != exact:
            raise InconsistencyError(f"torsion search says {exact} but hhat_geom = 0 is {zero} for {point}")
    return exact


def factored_string(f: RationalFunction, var: str = "T") -> str:
    """
    f as unit * product of primitive integer irreducible factors, e.g.
    16*T^4*(4*T^2 - 27)
    """
    f = RationalFunction.coerce(f)
    if f.is_zero():
        return "0"

    def parts(poly: Polynomial):
        unit, factors = poly.factor()
        out = []
        for g, e in factors:
            m, ints = g.integer_coefficients()
            content = math.gcd(*ints)
            unit *= Fraction(content, m) ** e
            prim = Polynomial(tuple(Fraction(a, content) for a in ints))
            body = prim.to_string(var)
            if len(prim.coeffs) > 2 or (len(prim.coeffs) == 2 and prim.coeffs[0] != 0):
                body = f"({body})"
            out.append(body if e == 1 else f"{body}^{e}")
        return unit, out

    unit_n, num = parts(f.num)
    unit_d, den = parts(f.den)
    unit = unit_n / unit_d
    if not num:
        text = str(unit)
    elif unit == 1:
        text = "*".join(num)
    elif unit == -1:
        text = "-" + "*".join(num)
    else:
        text = f"{unit}*" + "*".join(num)
    if den:
        text += "/" + ("*".join(den) if len(den) == 1 else "(" + "*".join(den) + ")")
    return text
