from typing import List, Optional

import click

from api.options import command_context, format_number, precision_option, section_option, tagged
from infra.errors import UsageError
from services.algebra.parser import parse_rational_function
from services.curve_ft.service import geom_canonical_height, geom_naive_height
from services.curve_q.service import canonical_height_q, naive_height_q
from services.fixtures.service import load_curve_file, select_points
from services.moriwaki.models import PolarizationConfig
from services.moriwaki.service import moriwaki_height


KINDS = ("naive", "canonical", "geometric", "moriwaki")
FIELDS = ("Q", "Q(T)", "Q(u)")

# kind -> field tags it accepts
_FIELDS = {
    "naive": ("Q", "Q(T)"),
    "canonical": ("Q",),
    "geometric": ("Q(T)",),
    "moriwaki": ("Q(u)",),
}


# field -> kind used when only --field is given
_NATIVE_KIND = {"Q": "canonical", "Q(T)": "geometric", "Q(u)": "moriwaki"}


def resolve_kind(kind: Optional[str], field: Optional[str], loaded=None) -> str:
    """
    Kind of height for ``height``: --kind wins, then the kind native to --field;
    --field must agree with both --kind and the curve file
    """
    if field is not None:
        if loaded is not None and loaded.field_tag != field:
            raise UsageError(f"--field {field} does not match the curve file over {loaded.field_tag}")
        if kind is None:
            return _NATIVE_KIND[field]
        _check_kind(kind, field)
    return kind or "canonical"


def _check_kind(kind: str, field: str):
    if field not in _FIELDS[kind]:
        allowed = " or ".join(_FIELDS[kind])
        raise UsageError(f"--kind {kind} needs a curve file over {allowed}, got {field}")


def height_lines(loaded, kind: str, names: Optional[List[str]] = None, x_text: Optional[str] = None,
                 tol: Optional[float] = None, at: str = "infinity", local: bool = False) -> List[str]:
    """Report lines for ``height``; one or more per point"""
    if x_text is not None:
        if kind != "moriwaki":
            raise UsageError("--x is only meaningful with --kind moriwaki or --field Q(u)")
        values = [parse_rational_function(x_text, variable="u", source="--x")]
        labels = [x_text]
    else:
        if loaded is None:
            raise UsageError("give --curve or --x")
        _check_kind(kind, loaded.field_tag)
        labels = list(names) if names else list(loaded.points) or list(loaded.values)
        values = select_points(loaded, labels)

    lines = []
    if kind == "moriwaki":
        config = PolarizationConfig() if tol is None else PolarizationConfig(tol=tol)
        for label, value in zip(labels, values):
            record = moriwaki_height(value, config, section=at)
            lines.append(tagged(f"moriwaki {label} = {format_number(record.height)}"))
            lines.append(f"  finite {format_number(record.finite)} (horizontal {format_number(record.finite_horizontal)}, "
                         f"vertical {format_number(record.finite_vertical)})")
            lines.append(f"  arch {format_number(record.arch)} +- {format_number(record.arch_error)}")
        return lines

    curve = loaded.curve
    for label, point in zip(labels, values):
        if kind == "naive":
            value = geom_naive_height(curve, point) if curve.over_function_field else naive_height_q(curve, point)
            lines.append(tagged(f"naive {label} = {format_number(value)}"))
        elif kind == "canonical":
            record = canonical_height_q(curve, point)
            lines.append(tagged(f"canonical {label} = {format_number(record.canonical)}"))
            if local:
                for place, term in record.local_terms.items():
                    lines.append(f"  lambda_{place} = {format_number(term)}")
        else:
            record = geom_canonical_height(curve, point, name=label)
            lines.append(tagged(f"geometric {label} = {format_number(record.canonical_exact)} "
                                f"({format_number(record.canonical)}, depth {record.depth})"))
    return lines


@click.command("height")
@click.option("--curve", "curve_path", default=None, metavar="FILE",
              help="Curve file (TOML) or the name of a built-in fixture.")
@section_option
@click.option("--kind", type=click.Choice(KINDS), default=None,
              help="Kind of height [default: canonical, or the kind native to --field].")
@click.option("--field", type=click.Choice(FIELDS), default=None,
              help="Field of definition; --field Q(u) with --x gives a Moriwaki height.")
@click.option("--x", "x_text", default=None, metavar="EXPR", help="A Q(u) point [x : 1] for --kind moriwaki.")
@click.option("--tol", type=float, default=None, help="Quadrature tolerance for --kind moriwaki.")
@click.option("--at", type=click.Choice(["infinity", "zero"]), default="infinity", show_default=True,
              help="Section of O(1) on the base used for --kind moriwaki.")
@click.option("--local", is_flag=True, help="Also print the local terms of a canonical height.")
@precision_option
def height(curve_path, sections, kind, field, x_text, tol, at, local, precision):
    """Naive, canonical, geometric or Moriwaki height of points in a curve file."""
    with command_context(precision, 1):
        loaded = load_curve_file(curve_path) if curve_path else None
        kind = resolve_kind(kind, field, loaded)
        for line in height_lines(loaded, kind, list(sections), x_text, tol, at, local):
            click.echo(line)
