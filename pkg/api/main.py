import logging
import sys

import click

from infra import config
from infra.errors import HeightError
from services.curve_ft.router import curve_info
from services.heights.router import height
from services.machine.router import verify_machine
from services.specialize.router import scan


class HeightGroup(click.Group):
    """Maps HeightError to its exit code, with the detail on stderr"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except HeightError as err:
            click.echo(f"error: {err.detail}", err=True)
            ctx.exit(err.exit_code)


@click.group(cls=HeightGroup)
@click.option("-v", "--verbose", is_flag=True, help="Log progress at INFO level.")
def cli(verbose):
    """Heights on elliptic curves over Q and elliptic surfaces over Q(T)."""
    level = logging.INFO if verbose else getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger().setLevel(level)


cli.add_command(curve_info)
cli.add_command(height)
cli.add_command(scan)
cli.add_command(verify_machine)


def main():
    cli(prog_name="ellheight")
