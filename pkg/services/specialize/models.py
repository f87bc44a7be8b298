from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from services.weil.models import ProjPointQ

BAD_FIBER = "bad-fiber"
TORSION_SPECIALIZATION = "torsion-specialization"
RANK_DROP = "rank-drop"
RANK_DROP_UNCONFIRMED = "rank-drop-unconfirmed"

CSV_COLUMNS = ["t_num", "t_den", "h_t", "hhat_geom", "hhat_spec", "ratio", "residual_t4", "gram_det", "flags"]


class ScanRecord(BaseModel):
    """One fibre of a scan; unset numeric fields are reported as nan"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    t_num: int
    t_den: int
    h_t: float
    hhat_geom: Optional[Fraction] = None
    hhat_spec: Optional[float] = None
    naive_spec: Optional[float] = None
    ratio: Optional[float] = None
    residual_t4: Optional[float] = None
    gram_det: Optional[float] = None
    flags: List[str] = []

    @property
    def t(self) -> ProjPointQ:
        return ProjPointQ(p=self.t_num, q=self.t_den)

    @property
    def is_bad(self) -> bool:
        return BAD_FIBER in self.flags


class EnvelopeFit(BaseModel):
    """|ratio - hhat_geom| <= constant / sqrt(h_t), fitted on one half and checked on the other"""
    constant: float
    validated: bool
    train_size: int
    test_size: int
    worst_test_excess: float


class LinearEnvelope(BaseModel):
    """|hhat_spec - h(x(P_t))| <= c * h_t + c_prime"""
    c: float
    c_prime: float
    points: int


class DecileRow(BaseModel):
    h_low: float
    h_high: float
    count: int
    mean_deviation: float
    median_deviation: float
    max_deviation: float
