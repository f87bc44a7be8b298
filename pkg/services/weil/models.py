import math
from fractions import Fraction
from functools import reduce
from typing import List, Tuple, Union

from pydantic import BaseModel, ConfigDict, model_validator
from sympy import Poly, symbols

from infra.errors import BasePointError, UsageError
from services.algebra.parser import parse_binary_form

_x, _y = symbols("x y")


class ProjPointQ(BaseModel):
    """
    Point [p:q] of P^1(Q) with coprime coordinates and q > 0 (or [1:0])
    """
    model_config = ConfigDict(frozen=True)

    p: int
    q: int

    @model_validator(mode="before")
    @classmethod
    def _canonical(cls, data):
        if isinstance(data, dict):
            p, q = int(data["p"]), int(data["q"])
            if p == 0 and q == 0:
                raise ValueError("[0:0] is not a point of P^1")
            g = math.gcd(p, q)
            p, q = p // g, q // g
            if q < 0 or (q == 0 and p < 0):
                p, q = -p, -q
            return {"p": p, "q": q}
        return data

    @classmethod
    def of(cls, value: Union[int, Fraction, str, Tuple[int, int]]) -> "ProjPointQ":
        if isinstance(value, tuple):
            return cls(p=value[0], q=value[1])
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo"):
            return cls(p=1, q=0)
        f = Fraction(value)
        return cls(p=f.numerator, q=f.denominator)

    @property
    def is_infinity(self) -> bool:
        return self.q == 0

    def to_fraction(self) -> Fraction:
        if self.q == 0:
            raise ValueError("the point at infinity has no affine coordinate")
        return Fraction(self.p, self.q)

    def __str__(self):
        if self.q == 0:
            return "inf"
        return str(self.p) if self.q == 1 else f"{self.p}/{self.q}"


class FormSystem(BaseModel):
    """
    Homogeneous integer forms of a common degree without common projective zero.
    Each form is stored as coefficients c_i of x^i y^(degree - i).
    """
    model_config = ConfigDict(frozen=True)

    degree: int
    forms: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check(self):
        if self.degree < 1:
            raise ValueError("form systems need degree >= 1")
        if len(self.forms) < 2:
            raise ValueError("form systems need at least two forms")
        for f in self.forms:
            if len(f) != self.degree + 1:
                raise ValueError(f"form {f} does not have degree {self.degree}")
            if not any(f):
                raise ValueError("zero form in a form system")
        common = reduce(lambda a, b: a.gcd(b), (self.as_poly(i) for i in range(len(self.forms))))
        if common.total_degree() > 0:
            raise BasePointError(f"forms share the projective zero locus {common.as_expr()} = 0")
        return self

    def as_poly(self, i: int) -> Poly:
        e = self.degree
        return Poly(sum(c * _x ** k * _y ** (e - k) for k, c in enumerate(self.forms[i])), _x, _y)

    def evaluate(self, p: int, q: int) -> List[int]:
        e = self.degree
        out = []
        for f in self.forms:
            # Horner in x/y, homogenised
            acc = 0
            for k in range(e, -1, -1):
                acc = acc * p + f[k] * q ** (e - k)
            out.append(acc)
        return out

    @property
    def size(self) -> int:
        return len(self.forms)

    @classmethod
    def identity(cls) -> "FormSystem":
        """{x, y}: the standard height on P^1"""
        return cls(degree=1, forms=((1, 0), (0, 1)))

    @classmethod
    def from_text(cls, texts: List[str], source: str = "<forms>") -> "FormSystem":
        """
        Build from strings such as ["x^2 - y^2", "x*y"]
        """
        parsed = [parse_binary_form(t, source=source, line=i + 1) for i, t in enumerate(texts)]
        degrees = set()
        for form in parsed:
            degrees |= form.total_degrees()
        if len(degrees) != 1:
            raise UsageError(f"{source}: forms must be homogeneous of one common degree, got degrees {sorted(degrees)}")
        e = degrees.pop()
        forms = []
        for form in parsed:
            coeffs = [Fraction(0)] * (e + 1)
            for (i, _j), c in form.terms.items():
                coeffs[i] = c
            if any(c.denominator != 1 for c in coeffs):
                raise UsageError(f"{source}: form coefficients must be integers")
            forms.append(tuple(int(c) for c in coeffs))
        try:
            return cls(degree=e, forms=tuple(forms))
        except ValueError as err:
            raise UsageError(f"{source}: {err}")

    def product(self, other: "FormSystem") -> "FormSystem":
        """All pairwise products F_i G_j"""
        forms = []
        for f in self.forms:
            for g in other.forms:
                h = [0] * (self.degree + other.degree + 1)
                for i, a in enumerate(f):
                    for j, b in enumerate(g):
                        h[i + j] += a * b
                forms.append(tuple(h))
        return FormSystem(degree=self.degree + other.degree, forms=tuple(forms))

    def coefficient_bits(self) -> int:
        return reduce(max, (abs(c).bit_length() for f in self.forms for c in f), 0)
