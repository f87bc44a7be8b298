import logging
import re
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from pydantic import ValidationError

from infra.errors import ContractViolation, ParseError, SingularCurveError, UsageError
from services.algebra.parser import parse_rational, parse_rational_function
from services.curve.models import WeierstrassCurve
from services.curve.service import make_point, mul_scalar
from services.fixtures.models import CurveFile, LoadedCurve

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"

_TOML_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")


def fixture_names() -> List[str]:
    return sorted(p.stem for p in DATA_DIR.glob("*.toml"))


def fixture_path(name: str) -> Path:
    path = DATA_DIR / f"{name}.toml"
    if not path.exists():
        raise UsageError(f"unknown fixture {name!r}; known fixtures: {', '.join(fixture_names())}")
    return path


def _locate(lines: List[str], key: str, value: str) -> Tuple[int, int]:
    """1-based line and column where the string ``value`` of ``key`` starts"""
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for i, line in enumerate(lines):
        if pattern.match(line):
            col = line.find(value)
            if col >= 0:
                return i + 1, col + 1
    return 1, 1


def _parse_with_position(parse, text: str, key: str, lines: List[str], source: str, **kwargs):
    line, col = _locate(lines, key, text)
    try:
        return parse(text, source=source, line=line, **kwargs)
    except ParseError as e:
        raise ParseError(e.message, line, col + e.column - 1, source) from None


def parse_curve_file(text: str, source: str = "<curve>") -> LoadedCurve:
    """
    Parse and validate a TOML curve file: a ``[curve]`` table and ``[[section]]`` entries
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        m = _TOML_POSITION.search(str(e))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (1, 1)
        raise ParseError(_TOML_POSITION.sub("", str(e)).strip(), line, col, source) from None

    table = dict(raw.get("curve", {}))
    table["sections"] = raw.get("section", [])
    if "scan" in raw:
        table["scan"] = raw["scan"]
    try:
        spec = CurveFile(**table)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "curve"
        raise UsageError(f"{source}: {where}: {first['msg']}") from None

    lines = text.splitlines()
    loaded = LoadedCurve(spec=spec, source=source)
    var = spec.variable

    def parse_scalar(expr: str, key: str):
        if var is None:
            return _parse_with_position(parse_rational, expr, key, lines, source)
        return _parse_with_position(parse_rational_function, expr, key, lines, source, variable=var)

    if spec.has_curve:
        coeffs = [parse_scalar(getattr(spec, a) or "0", a) for a in ("a1", "a2", "a3", "a4", "a6")]
        curve = WeierstrassCurve(*coeffs, name=spec.name or Path(source).stem)
        if curve.is_singular():
            raise SingularCurveError(f"{source}: the model {curve} is singular")
        loaded.curve = curve

    for section in spec.sections:
        x = parse_scalar(section.x, "x")
        if loaded.curve is None:
            loaded.values[section.name] = x
            continue
        y = parse_scalar(section.y, "y")
        try:
            loaded.points[section.name] = make_point(loaded.curve, x, y)
        except ContractViolation:
            raise UsageError(f"{source}: section {section.name!r} = ({section.x}, {section.y}) is not on the curve") from None
    logger.info("loaded %s: field %s, %d sections", source, spec.field, len(spec.sections))
    return loaded


def load_curve_file(path: str) -> LoadedCurve:
    """
    Load ``path``; a bare fixture name (or ``fixture:NAME``) selects a built-in curve
    """
    if path.startswith("fixture:"):
        file = fixture_path(path.split(":", 1)[1])
    else:
        file = Path(path)
        if not file.exists():
            if (DATA_DIR / f"{path}.toml").exists():
                file = DATA_DIR / f"{path}.toml"
            else:
                raise UsageError(f"no such curve file or fixture: {path}")
    return parse_curve_file(file.read_text(), source=str(file) if not file.is_relative_to(DATA_DIR) else file.stem)


def load_fixture(name: str) -> LoadedCurve:
    return parse_curve_file(fixture_path(name).read_text(), source=name)


def all_fixtures() -> Dict[str, LoadedCurve]:
    return {name: load_fixture(name) for name in fixture_names()}


def select_points(loaded: LoadedCurve, names: Optional[List[str]]) -> List:
    """
    Resolve ``--section`` values; ``k*NAME`` is the k-th multiple of a named section
    """
    if not names:
        names = list(loaded.points) or list(loaded.values)
    out = []
    for raw in names:
        k, _, name = raw.rpartition("*")
        try:
            factor = int(k) if k else 1
        except ValueError:
            raise UsageError(f"bad section multiple {raw!r}; expected k*NAME") from None
        if name in loaded.points:
            point = loaded.points[name]
            out.append(mul_scalar(loaded.curve, factor, point) if factor != 1 else point)
        elif name in loaded.values and factor == 1:
            out.append(loaded.values[name])
        else:
            known = ", ".join(list(loaded.points) + list(loaded.values)) or "none"
            raise UsageError(f"unknown section {raw!r} in {loaded.source} (known: {known})")
    return out
