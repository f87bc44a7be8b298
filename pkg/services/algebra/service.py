import logging
import math
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import mpmath
from sympy import factorint

from infra.errors import UndefinedGcdError
from services.algebra.models import Polynomial, RationalFunction, normalize_rational

logger = logging.getLogger(__name__)

Real = Union[float, mpmath.mpf, Fraction]


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """
    Monic greatest common divisor
    """
    if a.is_zero() and b.is_zero():
        raise UndefinedGcdError("gcd of two zero polynomials is undefined")
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    return a.gcd(b)


def ratfunc_eval(f: RationalFunction, t: Fraction) -> Fraction:
    return f(Fraction(t))


def int_factor(n: int) -> List[Tuple[int, int]]:
    """
    Prime factorisation of |n| as sorted (prime, exponent) pairs
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    return sorted((int(p), int(e)) for p, e in factorint(abs(n)).items())


def to_fraction(x: Real) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, mpmath.mpf):
        man, exp = x.man_exp
        man = int(man)
        return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)
    return Fraction(x)


def continued_fraction_convergents(x: Fraction, denom_bound: int):
    """Yield the convergents p/q of x with q <= denom_bound"""
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    rest = x
    while True:
        a = math.floor(rest)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        if k > denom_bound:
            return
        yield Fraction(h, k)
        frac = rest - a
        if frac == 0:
            return
        rest = 1 / frac


def rational_reconstruct(x: Real, denom_bound: int, tol: Real) -> Optional[Fraction]:
    """
    First continued-fraction convergent of x with denominator <= denom_bound that
    lies within tol of x, or None
    """
    if denom_bound < 1 or tol <= 0:
        raise ValueError("rational_reconstruct needs denom_bound >= 1 and tol > 0")
    exact = to_fraction(x)
    tol = to_fraction(tol)
    for c in continued_fraction_convergents(exact, denom_bound):
        if abs(exact - c) <= tol:
            return c
    return None


def valuation(n: Union[int, Fraction], p: int):
    """p-adic valuation of a rational; math.inf for 0"""
    n = Fraction(n)
    if n == 0:
        return math.inf
    v = 0
    num, den = n.numerator, n.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def log_mp(n: Union[int, Fraction]) -> mpmath.mpf:
    return mpmath.log(mpmath.mpf(n.numerator) / n.denominator) if isinstance(n, Fraction) else mpmath.log(n)


def mp_from_fraction(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


__all__ = [
    "normalize_rational",
    "poly_gcd",
    "ratfunc_eval",
    "int_factor",
    "rational_reconstruct",
    "valuation",
    "to_fraction",
    "mp_from_fraction",
    "log_mp",
]
