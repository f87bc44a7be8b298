from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, model_validator

from services.curve.models import CurvePoint, WeierstrassCurve
from services.curve_ft.models import EllipticSurface

FieldTag = Literal["Q", "Q(T)", "Q(u)"]


class SectionSpec(BaseModel):
    name: str
    x: str
    y: Optional[str] = None


class ScanSpec(BaseModel):
    tmax: Optional[int] = None
    hbound: Optional[int] = None
    samples: Optional[int] = None
    base_forms: Optional[List[str]] = None


class CurveFile(BaseModel):
    """Contents of a curve file before any expression is parsed"""
    field: FieldTag
    name: str = ""
    description: str = ""
    a1: Optional[str] = None
    a2: Optional[str] = None
    a3: Optional[str] = None
    a4: Optional[str] = None
    a6: Optional[str] = None
    sections: List[SectionSpec] = []
    scan: Optional[ScanSpec] = None

    @model_validator(mode="after")
    def _check(self):
        names = [s.name for s in self.sections]
        if len(names) != len(set(names)):
            raise ValueError("section names must be unique")
        if self.has_curve:
            for s in self.sections:
                if s.y is None:
                    raise ValueError(f"section {s.name!r} needs a y coordinate")
        elif self.field != "Q(u)":
            raise ValueError("curve coefficients are required unless the field is Q(u)")
        return self

    @property
    def has_curve(self) -> bool:
        return any(getattr(self, a) is not None for a in ("a1", "a2", "a3", "a4", "a6"))

    @property
    def variable(self) -> Optional[str]:
        return {"Q": None, "Q(T)": "T", "Q(u)": "u"}[self.field]


@dataclass
class LoadedCurve:
    """A parsed and validated curve file"""
    spec: CurveFile
    source: str
    curve: Optional[WeierstrassCurve] = None
    points: Dict[str, CurvePoint] = field(default_factory=dict)
    # x-coordinates of Q(u) points given without a curve
    values: Dict[str, object] = field(default_factory=dict)

    @property
    def surface(self) -> Optional[EllipticSurface]:
        if self.curve is None or not self.curve.over_function_field:
            return None
        return EllipticSurface(curve=self.curve, sections=dict(self.points), name=self.spec.name,
                               variable=self.spec.variable or "T")

    @property
    def field_tag(self) -> str:
        return self.spec.field
