"""
Tate's algorithm over Q: local minimal model, Kodaira symbol, Tamagawa number
and conductor exponent at one prime.
"""
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

from sympy import Poly, isprime, symbols
from sympy.ntheory import is_quad_residue

from services.algebra.service import int_factor, valuation
from services.curve.models import WeierstrassCurve
from services.curve_q.models import ReductionData

logger = logging.getLogger(__name__)

_X = symbols("X")

Transform = Tuple[Fraction, Fraction, Fraction, Fraction]
IDENTITY: Transform = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))


def compose(first: Transform, second: Transform) -> Transform:
    """Transform equal to applying ``first`` and then ``second``"""
    u1, r1, s1, t1 = first
    u2, r2, s2, t2 = second
    return (
        u1 * u2,
        r1 + u1 * u1 * r2,
        s1 + u1 * s2,
        t1 + u1 * u1 * s1 * r2 + u1 * u1 * u1 * t2,
    )


def integral_scaling(curve: WeierstrassCurve) -> int:
    """
    Least positive integer u with u^i a_i integral for every coefficient
    """
    u = 1
    dens = [(Fraction(a).denominator, i) for a, i in zip(curve.a_invariants, (1, 2, 3, 4, 6))]
    primes = set()
    for den, _ in dens:
        if den > 1:
            primes.update(p for p, _ in int_factor(den))
    for p in primes:
        e = max(-(-valuation(den, p) // i) for den, i in dens)
        u *= p ** e
    return u


@lru_cache(maxsize=256)
def integral_model(curve: WeierstrassCurve) -> Tuple[WeierstrassCurve, Transform]:
    """
    Integral model and the transform (u, 0, 0, 0) reaching it; points map by
    x' = x/u^2, y' = y/u^3
    """
    u = integral_scaling(curve)
    if u == 1:
        return curve, IDENTITY
    transform = (Fraction(1, u), Fraction(0), Fraction(0), Fraction(0))
    return curve.change_coordinates(*transform), transform


class _Local:
    """Residue-field helpers at p"""

    def __init__(self, p: int):
        self.p = p
        self.half = pow(2, -1, p) if p != 2 else None

    def val(self, x) -> float:
        return valuation(Fraction(x), self.p)

    def divides(self, x) -> bool:
        return x == 0 or self.val(x) > 0

    def reduce(self, x) -> int:
        x = Fraction(x)
        return (x.numerator * pow(x.denominator, -1, self.p)) % self.p

    def inv(self, x) -> int:
        return pow(self.reduce(x), -1, self.p)

    def quad_has_roots(self, a, b, c) -> bool:
        """a X^2 + b X + c has a root in F_p"""
        a, b, c = self.reduce(a), self.reduce(b), self.reduce(c)
        p = self.p
        if a == 0:
            return b != 0 or c == 0
        if p == 2:
            return any((a * x * x + b * x + c) % 2 == 0 for x in (0, 1))
        return is_quad_residue((b * b - 4 * a * c) % p, p)

    def cubic_root_count(self, b, c, d) -> int:
        """Distinct roots in F_p of X^3 + b X^2 + c X + d"""
        poly = Poly([1, self.reduce(b), self.reduce(c), self.reduce(d)], _X, modulus=self.p)
        _, factors = poly.factor_list()
        return sum(1 for f, _ in factors if f.degree() == 1)


@lru_cache(maxsize=1024)
def tate_at_prime(curve: WeierstrassCurve, p: int) -> ReductionData:
    """
    Run Tate's algorithm at p on ``curve``; non-integral input is first moved to
    its integral model and the returned transform starts from ``curve``
    """
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    model, transform = integral_model(curve)
    loc = _Local(p)
    scaling = 0

    while True:
        delta = model.discriminant
        vd = loc.val(delta)
        if vd == 0:
            return _data(p, "I0", 0, 1, 0, model, transform, scaling)

        a1, a2, a3, a4, a6 = model.a_invariants
        b2, b4, b6, b8 = model.b2, model.b4, model.b6, model.b8
        c4, c6 = model.c4, model.c6

        # move the singular point to (0, 0) mod p
        if p == 2:
            if loc.divides(b2):
                r = loc.reduce(a4)
                t = loc.reduce(((r + a2) * r + a4) * r + a6)
            else:
                r = loc.reduce(a3)
                t = loc.reduce(a4 + r * r)
        elif p == 3:
            r = loc.reduce(-b6) if loc.divides(b2) else loc.reduce(-loc.inv(b2) * b4)
            t = loc.reduce(a1 * r + a3)
        else:
            if loc.divides(c4):
                r = loc.reduce(-loc.inv(12) * b2)
            else:
                r = loc.reduce(-loc.inv(12 * c4) * (c6 + b2 * c4))
            t = loc.reduce(-loc.half * (a1 * r + a3))
        model, transform = _apply(model, transform, (1, r, 0, t))
        a1, a2, a3, a4, a6 = model.a_invariants
        b2, b4, b6, b8 = model.b2, model.b4, model.b6, model.b8

        if not loc.divides(c4):
            if loc.quad_has_roots(1, a1, -a2):
                cp = vd
            else:
                cp = 2 if vd % 2 == 0 else 1
            return _data(p, f"I{vd}", vd, cp, 1, model, transform, scaling)
        if loc.val(a6) < 2:
            return _data(p, "II", vd, 1, vd, model, transform, scaling)
        if loc.val(b8) < 3:
            return _data(p, "III", vd, 2, vd - 1, model, transform, scaling)
        if loc.val(b6) < 3:
            cp = 3 if loc.quad_has_roots(1, a3 / p, -a6 / (p * p)) else 1
            return _data(p, "IV", vd, cp, vd - 2, model, transform, scaling)

        # p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p == 2:
            s = loc.reduce(a2)
            t = 2 * loc.reduce(a6 / 4)
        elif p == 3:
            s = a1
            t = a3
        else:
            s = loc.reduce(-a1 * loc.half)
            t = loc.reduce(-a3 * loc.half)
        model, transform = _apply(model, transform, (1, 0, s, t))
        a1, a2, a3, a4, a6 = model.a_invariants

        b = a2 / p
        c = a4 / (p * p)
        d = a6 / (p ** 3)
        w = 27 * d * d - b * b * c * c + 4 * b ** 3 * d - 18 * b * c * d + 4 * c ** 3
        x = 3 * c - b * b

        if not loc.divides(w):
            cp = 1 + loc.cubic_root_count(b, c, d)
            return _data(p, "I0*", vd, cp, vd - 4, model, transform, scaling)

        if not loc.divides(x):
            # double root: move it to 0 and peel off powers of p
            if p == 2:
                r = loc.reduce(c)
            elif p == 3:
                r = loc.reduce(c * loc.inv(b))
            else:
                r = loc.reduce((b * c - 9 * d) * loc.inv(2 * x))
            model, transform = _apply(model, transform, (1, p * r, 0, 0))
            a1, a2, a3, a4, a6 = model.a_invariants
            ix, iy = 3, 3
            mx, my = p * p, p * p
            while True:
                a2t = a2 / p
                a3t = a3 / my
                a4t = a4 / (p * mx)
                a6t = a6 / (mx * my)
                if not loc.divides(a3t * a3t + 4 * a6t):
                    cp = 4 if loc.quad_has_roots(1, a3t, -a6t) else 2
                    break
                t = my * (loc.reduce(a6t) if p == 2 else loc.reduce(-a3t * loc.half))
                model, transform = _apply(model, transform, (1, 0, 0, t))
                a1, a2, a3, a4, a6 = model.a_invariants
                my *= p
                iy += 1
                a2t = a2 / p
                a3t = a3 / my
                a4t = a4 / (p * mx)
                a6t = a6 / (mx * my)
                if not loc.divides(a4t * a4t - 4 * a6t * a2t):
                    cp = 4 if loc.quad_has_roots(a2t, a4t, a6t) else 2
                    break
                if p == 2:
                    r = mx * loc.reduce(a6t * loc.inv(a2t))
                else:
                    r = mx * loc.reduce(-a4t * loc.inv(2 * a2t))
                model, transform = _apply(model, transform, (1, r, 0, 0))
                a1, a2, a3, a4, a6 = model.a_invariants
                mx *= p
                ix += 1
            n = ix + iy - 5
            return _data(p, f"I{n}*", vd, cp, vd - ix - iy + 1, model, transform, scaling)

        # triple root: move it to 0
        if p == 2:
            r = loc.reduce(b)
        elif p == 3:
            r = loc.reduce(-d)
        else:
            r = loc.reduce(-b * loc.inv(3))
        model, transform = _apply(model, transform, (1, p * r, 0, 0))
        a1, a2, a3, a4, a6 = model.a_invariants
        x3t = a3 / (p * p)
        x6t = a6 / (p ** 4)
        if not loc.divides(x3t * x3t + 4 * x6t):
            cp = 3 if loc.quad_has_roots(1, x3t, -x6t) else 1
            return _data(p, "IV*", vd, cp, vd - 6, model, transform, scaling)
        if p == 2:
            t = -4 * loc.reduce(x6t)
        else:
            t = p * p * loc.reduce(-x3t * loc.half)
        model, transform = _apply(model, transform, (1, 0, 0, t))
        a1, a2, a3, a4, a6 = model.a_invariants
        if loc.val(a4) < 4:
            return _data(p, "III*", vd, 2, vd - 7, model, transform, scaling)
        if loc.val(a6) < 6:
            return _data(p, "II*", vd, 1, vd - 8, model, transform, scaling)

        # not minimal at p
        logger.debug("model not minimal at %d, scaling by p", p)
        model, transform = _apply(model, transform, (p, 0, 0, 0))
        scaling += 1


def _apply(model: WeierstrassCurve, transform: Transform, step) -> Tuple[WeierstrassCurve, Transform]:
    step = tuple(Fraction(v) for v in step)
    return model.change_coordinates(*step), compose(transform, step)


def _data(p, kodaira, vd, cp, fp, model, transform, scaling) -> ReductionData:
    logger.debug("p=%d: %s, v(disc)=%d, c_p=%d", p, kodaira, vd, cp)
    return ReductionData(
        prime=p,
        kodaira=kodaira,
        v_min_disc=int(vd),
        tamagawa=int(cp),
        conductor_exponent=int(fp),
        local_model=model,
        transform=transform,
        scaling_exponent=scaling,
    )


@lru_cache(maxsize=256)
def bad_primes(curve: WeierstrassCurve) -> Tuple[int, ...]:
    """Primes dividing the discriminant of the integral model"""
    model, _ = integral_model(curve)
    delta = model.discriminant
    return tuple(p for p, _ in int_factor(delta.numerator))


__all__ = [
    "tate_at_prime",
    "integral_model",
    "integral_scaling",
    "bad_primes",
    "compose",
]
