from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Tuple

from pydantic import BaseModel

from services.curve.models import CurvePoint, WeierstrassCurve

# Upper bound on the Tamagawa number for every type except I_n, where it divides n
TAMAGAWA_BOUND = {"II": 1, "III": 2, "IV": 3, "I0*": 4, "In*": 4, "IV*": 3, "III*": 2, "II*": 1}


@dataclass(frozen=True)
class ReductionData:
    """
    Local data at one prime. ``transform`` = (u, r, s, t) takes the model handed to
    Tate's algorithm to ``local_model``; u = p^scaling_exponent.
    """
    prime: int
    kodaira: str
    v_min_disc: int
    tamagawa: int
    conductor_exponent: int
    local_model: WeierstrassCurve
    transform: Tuple[Fraction, Fraction, Fraction, Fraction]
    scaling_exponent: int = 0

    @property
    def is_good(self) -> bool:
        return self.kodaira == "I0"

    @property
    def is_multiplicative(self) -> bool:
        return self.kodaira.startswith("I") and not self.kodaira.endswith("*") and self.kodaira != "I0"


@dataclass(frozen=True)
class HeightRecordQ:
    point: CurvePoint
    naive: float
    canonical: float
    local_terms: Dict[str, float] = field(default_factory=dict)


class GramQ(BaseModel):
    matrix: Tuple[Tuple[float, ...], ...]
    determinant: float


def kodaira_denominator(kodaira: str) -> int:
    """
    Denominator bound for the local height correction of a fibre type:
    n for I_n, 4 for I_n*, 3 for IV and IV*, 2 for III and III*
    """
    if kodaira in ("I0", "II", "II*"):
        return 1
    if kodaira in ("IV", "IV*"):
        return 3
    if kodaira in ("III", "III*"):
        return 2
    if kodaira.endswith("*"):
        return 4
    return int(kodaira[1:])
