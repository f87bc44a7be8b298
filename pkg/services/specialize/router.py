import csv
import logging
import sys
from typing import Iterable, List, Optional

import click

from api.options import (
    command_context,
    curve_option,
    format_number,
    jobs_option,
    out_option,
    precision_option,
    section_option,
    tagged,
)
from infra.config import RANK_TOL
from infra.errors import UnsupportedError, UsageError
from infra.pool import WorkerPool
from services.curve_ft.service import is_isotrivial
from services.fixtures.service import load_curve_file, select_points
from services.specialize.models import CSV_COLUMNS, RANK_DROP, RANK_DROP_UNCONFIRMED, ScanRecord
from services.specialize.service import (
    decile_summary,
    envelope_of_records,
    fit_ratio_envelope,
    rank_drop_records,
    residual_slope,
    scan_parameters,
    section_scan,
)
from services.weil.models import FormSystem

logger = logging.getLogger(__name__)

# fibres handed to the pool per CSV flush, per worker
BATCH_PER_JOB = 32


def record_row(record: ScanRecord) -> List[str]:
    return [
        str(record.t_num),
        str(record.t_den),
        format_number(record.h_t),
        format_number(record.hhat_geom),
        format_number(record.hhat_spec),
        format_number(record.ratio),
        format_number(record.residual_t4),
        format_number(record.gram_det),
        ";".join(record.flags),
    ]


def _batches(items: List, size: int) -> Iterable[List]:
    for start in range(0, len(items), size):
        yield items[start:start + size]


def summary_lines(theorem: int, records: List[ScanRecord]) -> List[str]:
    good = [r for r in records if not r.is_bad]
    lines = [f"theorem {theorem}: {len(records)} fibres, {len(records) - len(good)} bad"]
    if theorem == 1:
        confirmed = [r for r in records if RANK_DROP in r.flags]
        unconfirmed = [r for r in records if RANK_DROP_UNCONFIRMED in r.flags]
        top = max((max(abs(r.t_num), r.t_den) for r in confirmed), default=0)
        lines.append(tagged(f"rank drops: {len(confirmed)} confirmed, {len(unconfirmed)} unconfirmed, "
                            f"max height of a flagged t {top}"))
        for r in confirmed:
            lines.append(f"  t = {r.t}")
    elif theorem == 2:
        envelope = envelope_of_records(good)
        lines.append(tagged(f"|hhat(P_t) - h(x(P_t))| <= {format_number(envelope.c)} h(t) + "
                            f"{format_number(envelope.c_prime)} over {envelope.points} fibres"))
    elif theorem == 3:
        deciles = decile_summary(records)
        if deciles:
            low, high = deciles[0], deciles[-1]
            lines.append(tagged(f"median |ratio - hhat_geom|: bottom decile {format_number(low.median_deviation)}, "
                                f"top decile {format_number(high.median_deviation)}"))
            lines.append(tagged(f"max |ratio - hhat_geom|: bottom decile {format_number(low.max_deviation)}, "
                                f"top decile {format_number(high.max_deviation)}"))
        fit = fit_ratio_envelope(records)
        lines.append(tagged(f"|ratio - hhat_geom| <= {format_number(fit.constant)} / sqrt(h(t)), "
                            f"validated {str(fit.validated).lower()}"))
    else:
        sup = max((abs(r.residual_t4) for r in records if r.residual_t4 is not None), default=0.0)
        lines.append(tagged(f"sup |residual_t4| = {format_number(sup)}, log-log slope "
                            f"{format_number(residual_slope(records))}"))
    return lines


def run_scan(loaded, theorem: int, names: Optional[List[str]], tmax: Optional[int], hbound: Optional[int],
             samples: Optional[int], tol: float, base_texts: Optional[List[str]], stream) -> List[str]:
    """
    Write the CSV for one scan to ``stream`` batch by batch and return the summary lines
    """
    surface = loaded.surface
    if surface is None:
        raise UsageError(f"scan needs an elliptic surface over Q(T), {loaded.source} is over {loaded.field_tag}")
    if is_isotrivial(surface):
        raise UnsupportedError(f"{loaded.source} is isotrivial; theorem scans need a non-constant j-invariant")
    preset = loaded.spec.scan
    sections = select_points(loaded, names)
    if not sections:
        raise UsageError(f"{loaded.source} has no sections to scan")
    base_texts = base_texts or (preset.base_forms if preset else None)
    base_forms = FormSystem.from_text(base_texts, source="--base-forms") if base_texts else None

    if theorem == 1:
        bound = hbound or (preset.hbound if preset and preset.hbound else None)
        if bound is None:
            raise UsageError("theorem 1 needs --hbound")
        t_list = scan_parameters(bound)
    else:
        if len(sections) != 1:
            raise UsageError(f"theorem {theorem} scans a single section, got {len(sections)}")
        bound = tmax or (preset.tmax if preset and preset.tmax else None)
        if bound is None:
            raise UsageError(f"theorem {theorem} needs --tmax")
        t_list = scan_parameters(bound, samples or (preset.samples if preset else None))

    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    records: List[ScanRecord] = []
    for batch in _batches(t_list, BATCH_PER_JOB * WorkerPool.jobs):
        if theorem == 1:
            rows = rank_drop_records(surface, sections, bound, tol, base_forms, t_list=batch)
        else:
            rows = section_scan(surface, sections[0], batch, base_forms)
        for record in rows:
            writer.writerow(record_row(record))
        stream.flush()
        records.extend(rows)
        logger.info("scan progress: %d of %d fibres", len(records), len(t_list))
    return summary_lines(theorem, records)


@click.command("scan")
@curve_option
@section_option
@click.option("--theorem", type=click.IntRange(1, 4), required=True,
              help="1 rank drops, 2 naive envelope, 3 ratio limit, 4 residual.")
@click.option("--tmax", type=click.IntRange(min=1), default=None, help="Height bound on t for theorems 2-4.")
@click.option("--hbound", type=click.IntRange(min=1), default=None, help="Height bound on t for theorem 1.")
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Evenly spaced subsample of the t range.")
@click.option("--tol", type=float, default=RANK_TOL, show_default=True, help="Relative rank-drop threshold.")
@click.option("--base-forms", "base_forms", multiple=True, metavar="FORM",
              help="Binary forms defining the height on the base; repeatable.")
@out_option
@jobs_option
@precision_option
def scan(curve_path, sections, theorem, tmax, hbound, samples, tol, base_forms, out, jobs, precision):
    """Specialisation scans over fibres of an elliptic surface; CSV rows plus a summary."""
    with command_context(precision, jobs):
        loaded = load_curve_file(curve_path)
        if out is None:
            summary = run_scan(loaded, theorem, list(sections), tmax, hbound, samples, tol, list(base_forms), sys.stdout)
        else:
            with open(out, "w", newline="") as stream:
                summary = run_scan(loaded, theorem, list(sections), tmax, hbound, samples, tol, list(base_forms), stream)
        for line in summary:
            click.echo(line, err=out is None)
