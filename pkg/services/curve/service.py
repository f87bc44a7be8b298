import logging
from typing import Tuple

from infra.errors import ContractViolation
from services.curve.models import CurvePoint, WeierstrassCurve, coerce_field

logger = logging.getLogger(__name__)

INFINITY = CurvePoint.infinity()


def discriminant(curve: WeierstrassCurve):
    return curve.discriminant


def j_invariant(curve: WeierstrassCurve):
    return curve.j_invariant


def make_point(curve: WeierstrassCurve, x, y) -> CurvePoint:
    """Point with coordinates in the field of the curve, checked to lie on it"""
    x, y = coerce_field((x, y, curve.a1))[:2]
    point = CurvePoint(x, y)
    if not on_curve(curve, point):
        raise ContractViolation(f"{point} is not on {curve}")
    return point


def on_curve(curve: WeierstrassCurve, point: CurvePoint) -> bool:
    if point.is_infinity:
        return True
    a1, a2, a3, a4, a6 = curve.a_invariants
    x, y = point.x, point.y
    return y * y + a1 * x * y + a3 * y == x * x * x + a2 * x * x + a4 * x + a6


def require_on_curve(curve: WeierstrassCurve, *points: CurvePoint):
    for point in points:
        if not on_curve(curve, point):
            raise ContractViolation(f"{point} is not on {curve}")


def neg(curve: WeierstrassCurve, point: CurvePoint) -> CurvePoint:
    require_on_curve(curve, point)
    return _neg(curve, point)


def _neg(curve: WeierstrassCurve, point: CurvePoint) -> CurvePoint:
    if point.is_infinity:
        return point
    return CurvePoint(point.x, -point.y - curve.a1 * point.x - curve.a3)


def add(curve: WeierstrassCurve, p: CurvePoint, q: CurvePoint) -> CurvePoint:
    """Chord-tangent addition"""
    require_on_curve(curve, p, q)
    return add_unchecked(curve, p, q)


def add_unchecked(curve: WeierstrassCurve, p: CurvePoint, q: CurvePoint) -> CurvePoint:
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    a1, a2, a3, a4, a6 = curve.a_invariants
    x1, y1, x2, y2 = p.x, p.y, q.x, q.y
    if x1 == x2:
        denom = y1 + y2 + a1 * x2 + a3
        if denom == 0:
            return INFINITY
        # tangent (x1 == x2 and not opposite forces p == q)
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / denom
        nu = (-x1 * x1 * x1 + a4 * x1 + 2 * a6 - a3 * y1) / denom
    else:
        dx = x2 - x1
        lam = (y2 - y1) / dx
        nu = (y1 * x2 - y2 * x1) / dx
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return CurvePoint(x3, y3)


def double(curve: WeierstrassCurve, point: CurvePoint) -> CurvePoint:
    return add(curve, point, point)


def mul_scalar(curve: WeierstrassCurve, n: int, point: CurvePoint) -> CurvePoint:
    """[n]P by double-and-add"""
    require_on_curve(curve, point)
    if n < 0:
        return mul_scalar(curve, -n, _neg(curve, point))
    result = INFINITY
    addend = point
    while n:
        if n & 1:
            result = add_unchecked(curve, result, addend)
        n >>= 1
        if n:
            addend = add_unchecked(curve, addend, addend)
    return result


def linear_combination(curve: WeierstrassCurve, coefficients, points) -> CurvePoint:
    result = INFINITY
    for n, point in zip(coefficients, points):
        if n:
            result = add_unchecked(curve, result, mul_scalar(curve, n, point))
    return result


def double_x(curve: WeierstrassCurve, x):
    """
    x(2P) from x(P); None when 2P is the point at infinity
    """
    b2, b4, b6, b8 = curve.b2, curve.b4, curve.b6, curve.b8
    x2 = x * x
    num = x2 * x2 - b4 * x2 - 2 * b6 * x - b8
    den = 4 * x2 * x + b2 * x2 + 2 * b4 * x + b6
    if den == 0:
        return None
    return num / den


def x_iterates(curve: WeierstrassCurve, point: CurvePoint, depth: int) -> Tuple:
    """x(P), x(2P), ..., x(2^depth P); stops early at the point at infinity"""
    if point.is_infinity:
        return ()
    xs = [point.x]
    for _ in range(depth):
        nxt = double_x(curve, xs[-1])
        if nxt is None:
            break
        xs.append(nxt)
    return tuple(xs)
