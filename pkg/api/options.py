"""Options and helpers shared by the commands"""
import logging
from contextlib import contextmanager
from fractions import Fraction
from typing import Optional

import click

from infra import config
from infra.pool import close_worker_pool, start_worker_pool

logger = logging.getLogger(__name__)

curve_option = click.option("--curve", "curve_path", required=True, metavar="FILE",
                            help="Curve file (TOML) or the name of a built-in fixture.")
section_option = click.option("--section", "sections", multiple=True, metavar="NAME",
                              help="Section or point name; repeatable; k*NAME for a multiple.")
precision_option = click.option("--precision", type=click.IntRange(min=16), default=None, metavar="BITS",
                                help="Binary working precision (default ELLHEIGHT_PRECISION_BITS).")
jobs_option = click.option("--jobs", type=click.IntRange(min=1), default=None, metavar="N",
                           help="Worker processes (default ELLHEIGHT_JOBS).")
out_option = click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None, metavar="FILE",
                          help="Write CSV rows here instead of stdout.")


@contextmanager
def command_context(precision: Optional[int] = None, jobs: Optional[int] = None):
    """Apply the precision override and own the worker pool for one command"""
    if precision is not None:
        config.set_precision_bits(precision)
    start_worker_pool(jobs if jobs is not None else config.DEFAULT_JOBS)
    try:
        yield
    finally:
        close_worker_pool()


def format_number(value) -> str:
    """12 significant digits for reals, p/q for exact rationals, nan when missing"""
    if value is None:
        return "nan"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def tagged(line: str) -> str:
    return f"{line}  [{config.NORMALIZATION_TAG}]"
