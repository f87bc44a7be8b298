import click

from api.options import command_context, precision_option
from infra.errors import PropertyFailure
from services.machine.models import SUITES
from services.machine.service import run_suites


@click.command("verify-machine")
@click.option("--suite", type=click.Choice(SUITES + ("all",)), default="all", show_default=True)
@precision_option
def verify_machine(suite, precision):
    """Run the height machine property suites; exit 1 listing any failed check."""
    with command_context(precision, 1):
        reports = run_suites(suite)
    failed = []
    for report in reports:
        for result in report.results:
            click.echo(f"{'PASS' if result.passed else 'FAIL'}  {result.id:<28} {result.detail}")
        failed.extend(report.failed_ids)
    if failed:
        raise PropertyFailure("failed checks: " + ", ".join(failed))
    click.echo(f"all {sum(len(r.results) for r in reports)} checks passed")
