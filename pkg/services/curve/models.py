from dataclasses import dataclass, field
from fractions import Fraction
from typing import Generic, Optional, Tuple, TypeVar

from infra.errors import SingularCurveError
from services.algebra.models import Polynomial, RationalFunction

F = TypeVar("F", Fraction, RationalFunction)


def coerce_field(values) -> tuple:
    """Bring scalars into one field: Q(T) as soon as one entry lives there"""
    if any(isinstance(v, (RationalFunction, Polynomial)) for v in values):
        return tuple(RationalFunction.coerce(v) for v in values)
    return tuple(Fraction(v) for v in values)


@dataclass(frozen=True)
class WeierstrassCurve(Generic[F]):
    """
    y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q or Q(T)
    """
    a1: F
    a2: F
    a3: F
    a4: F
    a6: F
    name: str = field(default="", compare=False)

    def __post_init__(self):
        coeffs = coerce_field(self.a_invariants)
        for attr, value in zip(("a1", "a2", "a3", "a4", "a6"), coeffs):
            object.__setattr__(self, attr, value)

    @classmethod
    def from_ainvs(cls, ainvs, name: str = "") -> "WeierstrassCurve":
        if len(ainvs) != 5:
            raise ValueError("a Weierstrass model needs five coefficients a1, a2, a3, a4, a6")
        return cls(*ainvs, name=name)

    @property
    def a_invariants(self) -> Tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def over_function_field(self) -> bool:
        return isinstance(self.a1, RationalFunction)

    @property
    def b2(self):
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self):
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self):
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self):
        a1, a2, a3, a4, a6 = self.a_invariants
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def c4(self):
        return self.b2 * self.b2 - 24 * self.b4

    @property
    def c6(self):
        b2, b4, b6 = self.b2, self.b4, self.b6
        return -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self):
        delta = self.discriminant
        if delta == 0:
            raise SingularCurveError(f"j-invariant of the singular model {self}")
        c4 = self.c4
        return c4 * c4 * c4 / delta

    def is_singular(self) -> bool:
        return self.discriminant == 0

    def change_coordinates(self, u, r, s, t) -> "WeierstrassCurve":
        """
        Model for x = u^2 x' + r, y = u^3 y' + s u^2 x' + t
        """
        a1, a2, a3, a4, a6 = self.a_invariants
        u2 = u * u
        u3 = u2 * u
        return WeierstrassCurve(
            (a1 + 2 * s) / u,
            (a2 - s * a1 + 3 * r - s * s) / u2,
            (a3 + r * a1 + 2 * t) / u3,
            (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / (u2 * u2),
            (a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1) / (u3 * u3),
            name=self.name,
        )

    def to_string(self, var: str = "T") -> str:
        a1, a2, a3, a4, a6 = self.a_invariants

        def fmt(c):
            return c.to_string(var) if hasattr(c, "to_string") else str(c)

        left = "y^2"
        for c, mono in ((a1, "x*y"), (a3, "y")):
            if c != 0:
                left += f" + ({fmt(c)})*{mono}"
        right = "x^3"
        for c, mono in ((a2, "x^2"), (a4, "x"), (a6, "")):
            if c != 0:
                right += f" + ({fmt(c)})" + (f"*{mono}" if mono else "")
        return f"{left} = {right}"

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True)
class CurvePoint(Generic[F]):
    """
    Affine point (x, y) or the point at infinity (x = y = None)
    """
    x: Optional[F] = None
    y: Optional[F] = None

    @classmethod
    def infinity(cls) -> "CurvePoint":
        return cls()

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def change_coordinates(self, u, r, s, t) -> "CurvePoint":
        """Image under the coordinate change of WeierstrassCurve.change_coordinates"""
        if self.is_infinity:
            return self
        x = (self.x - r) / (u * u)
        y = (self.y - s * (self.x - r) - t) / (u * u * u)
        return CurvePoint(x, y)

    def __str__(self):
        if self.is_infinity:
            return "O"
        return f"({self.x}, {self.y})"
