from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

from services.algebra.models import Polynomial
from services.curve.models import CurvePoint, WeierstrassCurve


@dataclass(frozen=True)
class Place:
    """
    Place of Q(T): a monic irreducible polynomial, or infinity when ``poly`` is None
    """
    poly: Optional[Polynomial] = None

    @property
    def is_infinity(self) -> bool:
        return self.poly is None

    @property
    def degree(self) -> int:
        return 1 if self.poly is None else self.poly.degree

    def label(self, var: str = "T") -> str:
        return "inf" if self.poly is None else self.poly.to_string(var)

    def __str__(self):
        return self.label()


INFINITY_PLACE = Place()


@dataclass(frozen=True)
class FiberReduction:
    """Valuations and Kodaira type of the fibre over one place (residue characteristic 0)"""
    place: Place
    kodaira: str
    v_c4: float
    v_c6: float
    v_disc: int
    v_min_disc: int
    shift: int

    @property
    def is_good(self) -> bool:
        return self.v_min_disc == 0


@dataclass(frozen=True)
class EllipticSurface:
    """
    Elliptic surface over P^1 given by a Weierstrass model over Q(T) and named sections
    """
    curve: WeierstrassCurve
    sections: Dict[str, CurvePoint] = field(default_factory=dict, hash=False, compare=False)
    name: str = ""
    variable: str = "T"

    def section(self, name: str) -> CurvePoint:
        if name not in self.sections:
            known = ", ".join(self.sections) or "none"
            raise KeyError(f"unknown section {name!r} (known: {known})")
        return self.sections[name]


@dataclass(frozen=True)
class GeomHeightRecord:
    name: str
    naive: int
    canonical_exact: Optional[Fraction]
    canonical: float
    depth: int
    degrees: Tuple[int, ...] = ()

    @property
    def is_exact(self) -> bool:
        return self.canonical_exact is not None


@dataclass(frozen=True)
class GramGeom:
    matrix: Tuple[Tuple[Fraction, ...], ...]
    determinant: Fraction
