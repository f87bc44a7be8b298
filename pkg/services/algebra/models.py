"""
Exact scalar types: rationals (fractions.Fraction), polynomials over Q in one
variable and rational functions, all immutable.
"""
import math
from fractions import Fraction
from typing import Iterable, List, Tuple, Union

import sympy
from sympy import Poly, QQ

from infra.errors import PoleError

_GEN = sympy.Symbol("T")

Scalar = Union[int, Fraction]


def normalize_rational(n: int, d: int) -> Fraction:
    """
    Lowest terms with positive denominator; raises ZeroDivisionError for d = 0
    """
    return Fraction(n, d)


class _NegativeInfinity:
    """Degree of the zero polynomial. Compares below every integer, supports no arithmetic."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("-oo")

    def __repr__(self):
        return "-oo"

    def _no_arithmetic(self, *_):
        raise TypeError("the degree of the zero polynomial does not support arithmetic")

    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = __neg__ = _no_arithmetic
    __int__ = __index__ = _no_arithmetic


NEG_INF = _NegativeInfinity()


def _strip(coeffs: Iterable[Scalar]) -> Tuple[Fraction, ...]:
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


class Polynomial:
    """
    Polynomial over Q; ``coeffs[i]`` is the coefficient of T^i and the highest
    stored coefficient is nonzero (the zero polynomial has no coefficients).
    Multiplication, division and gcd are delegated to sympy's dense polynomials.
    """
    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        self.coeffs = _strip(coeffs)
        self._hash = None

    # construction helpers
    @classmethod
    def constant(cls, c: Scalar) -> "Polynomial":
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c: Scalar = 1) -> "Polynomial":
        return cls([0] * degree + [c])

    @classmethod
    def variable(cls) -> "Polynomial":
        return cls((0, 1))

    @classmethod
    def _from_poly(cls, p: Poly) -> "Polynomial":
        out = [Fraction(int(c.numerator), int(c.denominator)) for c in reversed(p.rep.to_list())]
        return cls(out)

    def _poly(self) -> Poly:
        items = [QQ(c.numerator, c.denominator) for c in reversed(self.coeffs)]
        return Poly.from_list(items or [QQ(0)], _GEN, domain=QQ)

    @staticmethod
    def coerce(value: Union["Polynomial", Scalar]) -> "Polynomial":
        if isinstance(value, Polynomial):
            return value
        if isinstance(value, (int, Fraction)):
            return Polynomial.constant(value)
        return NotImplemented

    # basic queries
    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coefficient(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        lc = self.leading_coefficient
        return Polynomial(c / lc for c in self.coeffs)

    def scale(self, c: Scalar) -> "Polynomial":
        return Polynomial(Fraction(c) * a for a in self.coeffs)

    def __call__(self, t: Scalar) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def reversed(self, degree: int) -> "Polynomial":
        """T^degree * f(1/T) for degree >= deg f"""
        padded = list(self.coeffs) + [Fraction(0)] * (degree + 1 - len(self.coeffs))
        return Polynomial(reversed(padded))

    def valuation_at_zero(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        raise ValueError("valuation of the zero polynomial")

    # arithmetic
    def __add__(self, other):
        other = Polynomial.coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(self.coefficient(i) + other.coefficient(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        other = Polynomial.coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return Polynomial.coerce(other) - self

    def __mul__(self, other):
        other = Polynomial.coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return Polynomial()
        if other.is_constant():
            return self.scale(other.coeffs[0])
        if self.is_constant():
            return other.scale(self.coeffs[0])
        return Polynomial._from_poly(self._poly() * other._poly())

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        if n == 0:
            return Polynomial.constant(1)
        return Polynomial._from_poly(self._poly() ** n)

    def divmod(self, other: "Polynomial") -> Tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = self._poly().div(other._poly())
        return Polynomial._from_poly(q), Polynomial._from_poly(r)

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def gcd(self, other: "Polynomial") -> "Polynomial":
        return Polynomial._from_poly(self._poly().gcd(other._poly())).monic()

    def factor(self) -> Tuple[Fraction, List[Tuple["Polynomial", int]]]:
        """Irreducible factorisation over Q: (unit, [(monic factor, multiplicity)])"""
        unit, factors = self._poly().factor_list()
        out = []
        lead = Fraction(int(sympy.Rational(unit).p), int(sympy.Rational(unit).q))
        for f, e in factors:
            g = Polynomial._from_poly(f)
            lead *= g.leading_coefficient ** e
            out.append((g.monic(), e))
        out.sort(key=lambda fe: (fe[0].degree, fe[0].coeffs))
        return lead, out

    def integer_coefficients(self) -> Tuple[int, Tuple[int, ...]]:
        """(common denominator m, integer coefficients of m*self)"""
        m = math.lcm(1, *(c.denominator for c in self.coeffs))
        return m, tuple(int(c * m) for c in self.coeffs)

    # comparison / display
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("Polynomial", self.coeffs))
        return self._hash

    def __getstate__(self):
        return self.coeffs

    def __setstate__(self, state):
        self.coeffs = state
        self._hash = None

    def to_string(self, var: str = "T") -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if i == 0:
                body = str(a)
            else:
                mono = var if i == 1 else f"{var}^{i}"
                body = mono if a == 1 else f"{a}*{mono}"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"Polynomial({self.to_string()})"


class RationalFunction:
    """
    Element of Q(T) as num/den with gcd(num, den) = 1 and den monic.
    """
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Union[Polynomial, Scalar], den: Union[Polynomial, Scalar] = 1, normalized: bool = False):
        num = Polynomial.coerce(num)
        den = Polynomial.coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not normalized:
            if num.is_zero():
                den = Polynomial.constant(1)
            elif not den.is_constant():
                g = num.gcd(den)
                if not g.is_constant():
                    num = num.exact_div(g)
                    den = den.exact_div(g)
            lc = den.leading_coefficient
            if lc != 1:
                num = num.scale(1 / lc)
                den = den.scale(1 / lc)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def variable(cls) -> "RationalFunction":
        return cls(Polynomial.variable(), normalized=True)

    @staticmethod
    def coerce(value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, (int, Fraction, Polynomial)):
            return RationalFunction(value, normalized=isinstance(value, (int, Fraction)))
        return NotImplemented

    # queries
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("rational function is not constant")
        return self.num.coefficient(0)

    @property
    def degree(self) -> int:
        """Degree of the morphism [f : 1]: P^1 -> P^1"""
        dn = self.num.degree
        return max(0 if dn is NEG_INF else dn, self.den.degree)

    def __call__(self, t: Scalar) -> Fraction:
        d = self.den(t)
        if d == 0:
            raise PoleError(t)
        return self.num(t) / d

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def valuation(self, place: Polynomial) -> int:
        """Order of vanishing along an irreducible polynomial place"""
        if self.is_zero():
            raise ValueError("valuation of zero")
        return _poly_valuation(self.num, place) - _poly_valuation(self.den, place)

    def valuation_at_infinity(self) -> int:
        if self.is_zero():
            raise ValueError("valuation of zero")
        return self.den.degree - self.num.degree

    def at_infinity(self) -> "RationalFunction":
        """f(1/S) as a rational function of S"""
        if self.is_zero():
            return self
        dn, dd = self.num.degree, self.den.degree
        num = self.num.reversed(dn)
        den = self.den.reversed(dd)
        shift = dd - dn
        if shift >= 0:
            num = num * Polynomial.monomial(shift)
        else:
            den = den * Polynomial.monomial(-shift)
        return RationalFunction(num, den)

    # arithmetic
    def __add__(self, other):
        other = RationalFunction.coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, normalized=True)

    def __sub__(self, other):
        other = RationalFunction.coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return RationalFunction.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalFunction(self.num.scale(other), self.den, normalized=other != 0)
        other = RationalFunction.coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalFunction.coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RationalFunction.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return RationalFunction(1) / (self ** -n)
        return RationalFunction(self.num ** n, self.den ** n, normalized=True)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            other = RationalFunction.coerce(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("RationalFunction", self.num.coeffs, self.den.coeffs))
        return self._hash

    def __getstate__(self):
        return (self.num, self.den)

    def __setstate__(self, state):
        self.num, self.den = state
        self._hash = None

    def to_string(self, var: str = "T") -> str:
        n = self.num.to_string(var)
        if self.den == 1:
            return n
        return f"({n})/({self.den.to_string(var)})"

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"RationalFunction({self.to_string()})"


def _poly_valuation(f: Polynomial, place: Polynomial) -> int:
    v = 0
    while not f.is_zero():
        q, r = f.divmod(place)
        if not r.is_zero():
            break
        f = q
        v += 1
    return v
