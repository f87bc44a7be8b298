import math
from functools import reduce
from typing import Iterable, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from infra.config import QUAD_MAX_ANGULAR_NODES, QUAD_TOL
from services.algebra.models import Polynomial, RationalFunction


class PolarizationConfig(BaseModel):
    """
    Fubini-Study polarization of P^1_Z over Q(u) and the quadrature settings for
    the archimedean integral
    """
    model_config = ConfigDict(frozen=True)

    d: int = 1
    metric: str = "fubini-study"
    tol: float = QUAD_TOL
    initial_angular_nodes: int = 8
    max_angular_nodes: int = QUAD_MAX_ANGULAR_NODES

    @model_validator(mode="after")
    def _check(self):
        if self.d != 1:
            raise ValueError("only transcendence degree 1 polarizations are supported")
        if self.metric != "fubini-study":
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.tol <= 0:
            raise ValueError("quadrature tolerance must be positive")
        if self.initial_angular_nodes < 2 or self.max_angular_nodes < self.initial_angular_nodes:
            raise ValueError("angular node budget must satisfy 2 <= initial <= max")
        return self


class PolyPoint(BaseModel):
    """
    Point of P^N over Q(u) as integer polynomials (coefficients low to high)
    homogenised to ``degree``, jointly primitive and without common factor
    """
    model_config = ConfigDict(frozen=True)

    coords: Tuple[Tuple[int, ...], ...]
    degree: int

    @model_validator(mode="after")
    def _check(self):
        if len(self.coords) < 2:
            raise ValueError("a projective point needs at least two coordinates")
        if not any(any(c) for c in self.coords):
            raise ValueError("all coordinates are zero")
        if any(len(c) != self.degree + 1 for c in self.coords):
            raise ValueError("coordinates must be padded to the common degree")
        if reduce(math.gcd, (a for c in self.coords for a in c), 0) != 1:
            raise ValueError("coordinates are not jointly primitive")
        if not any(c[-1] for c in self.coords):
            raise ValueError("no coordinate reaches the common degree")
        return self

    @classmethod
    def from_coordinates(cls, coords: Iterable) -> "PolyPoint":
        """
        Clear denominators, remove the common polynomial factor and the integer content
        """
        funcs = [RationalFunction.coerce(c) for c in coords]
        if all(f.is_zero() for f in funcs):
            raise ValueError("all coordinates are zero")
        common = Polynomial.constant(1)
        for f in funcs:
            common = common * f.den.exact_div(common.gcd(f.den))
        polys = [f.num * common.exact_div(f.den) for f in funcs]
        g = None
        for p in polys:
            if p.is_zero():
                continue
            g = p.monic() if g is None else g.gcd(p)
        polys = [p.exact_div(g) if not p.is_zero() else p for p in polys]
        degree = max(p.degree for p in polys if not p.is_zero())
        den = reduce(math.lcm, (c.denominator for p in polys for c in p.coeffs), 1)
        ints = [[int(c * den) for c in p.coeffs] for p in polys]
        content = reduce(math.gcd, (a for c in ints for a in c), 0)
        padded = []
        for c in ints:
            c = [a // content for a in c] + [0] * (degree + 1 - len(c))
            padded.append(tuple(c))
        lead = next(c[-1] for c in padded if c[-1])
        if lead < 0:
            padded = [tuple(-a for a in c) for c in padded]
        return cls(coords=tuple(padded), degree=degree)

    @classmethod
    def from_rational_function(cls, x) -> "PolyPoint":
        """[x : 1] for x in Q(u)"""
        return cls.from_coordinates([x, 1])

    def reparametrized(self) -> "PolyPoint":
        """The same point in the coordinate v = 1/u: u^D f_i(1/u)"""
        return PolyPoint.from_coordinates([Polynomial(tuple(reversed(c))) for c in self.coords])

    @property
    def leading_vector(self) -> Tuple[int, ...]:
        return tuple(c[-1] for c in self.coords)

    @property
    def is_constant(self) -> bool:
        return self.degree == 0


class MoriwakiRecord(BaseModel):
    finite_horizontal: float
    finite_vertical: float
    finite: float
    arch: float
    arch_error: float
    height: float
    section: str = "infinity"
