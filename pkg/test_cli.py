import csv
import io
import math

import pytest

from api.main import cli
from services.specialize.models import CSV_COLUMNS

TAG = "[norm=hhat~h(x),ln]"


def test_curve_info_surface(runner):
    result = runner.invoke(cli, ["curve-info", "--curve", "tt-surface"])
    assert result.exit_code == 0, result.output
    out = result.stdout
    assert "discriminant: 16*T^4*(4*T^2 - 27)" in out
    assert "isotrivial: false" in out
    assert "  T: IV v(disc)=4 v_min(disc)=4" in out
    assert "  inf: I0* " in out


def test_curve_info_constant_surface(runner):
    result = runner.invoke(cli, ["curve-info", "--curve", "constant-x3-plus-1"])
    assert result.exit_code == 0
    assert "isotrivial: true" in result.stdout


def test_curve_info_over_q(runner):
    result = runner.invoke(cli, ["curve-info", "--curve", "37a"])
    assert result.exit_code == 0
    assert "discriminant: 37" in result.stdout
    assert "  37: I1 " in result.stdout


def test_malformed_file_is_a_usage_error(runner, tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[curve]\nfield = "Q"\na6 = "1 +"\n')
    result = runner.invoke(cli, ["curve-info", "--curve", str(path)])
    assert result.exit_code == 2
    assert result.stderr.startswith("error: ")
    assert ":3:" in result.stderr


def test_canonical_height(runner):
    result = runner.invoke(cli, ["height", "--curve", "37a", "--section", "P", "--local"])
    assert result.exit_code == 0, result.output
    first = result.stdout.splitlines()[0]
    assert first.startswith("canonical P = 0.0511114082")
    assert first.endswith(TAG)
    assert "lambda_inf" in result.stdout


def test_geometric_height_of_torsion_section(runner):
    result = runner.invoke(cli, ["height", "--curve", "cube-twist", "--kind", "geometric"])
    assert result.exit_code == 0, result.output
    assert result.stdout.startswith("geometric P = 0 (0, depth ")


def test_geometric_height(runner):
    result = runner.invoke(cli, ["height", "--curve", "tt-surface", "--kind", "geometric", "--section", "Q"])
    assert result.exit_code == 0, result.output
    assert result.stdout.startswith("geometric Q = 1 (1, depth ")


def test_moriwaki_height(runner):
    result = runner.invoke(cli, ["height", "--kind", "moriwaki", "--x", "u"])
    assert result.exit_code == 0, result.output
    value = float(result.stdout.splitlines()[0].split("=")[1].split()[0])
    assert value == pytest.approx(0.5, abs=1e-5)


def test_field_selects_the_height(runner):
    result = runner.invoke(cli, ["height", "--field", "Q(u)", "--x", "u^2"])
    assert result.exit_code == 0, result.output
    assert result.stdout.startswith("moriwaki u^2 = ")
    value = float(result.stdout.splitlines()[0].split("=")[1].split()[0])
    assert value == pytest.approx(math.pi / 4, abs=1e-5)
    result = runner.invoke(cli, ["height", "--curve", "tt-surface", "--field", "Q(T)", "--section", "Q"])
    assert result.exit_code == 0, result.output
    assert result.stdout.startswith("geometric Q = 1 ")


@pytest.mark.parametrize(
    "args",
    [
        ["height", "--curve", "37a", "--kind", "geometric"],
        ["height", "--curve", "tt-surface", "--kind", "canonical"],
        ["height", "--curve", "37a", "--x", "u"],
        ["height", "--kind", "moriwaki"],
        ["height", "--curve", "37a", "--field", "Q(T)"],
        ["height", "--field", "Q(u)", "--kind", "canonical", "--x", "u"],
        ["height", "--curve", "37a", "--section", "Z"],
        ["scan", "--curve", "37a", "--theorem", "3", "--tmax", "5"],
    ],
)
def test_usage_errors(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 2
    assert result.stderr.startswith("error: ")


def test_click_usage_error(runner):
    result = runner.invoke(cli, ["scan", "--curve", "tt-surface", "--theorem", "7"])
    assert result.exit_code == 2


def test_scan_csv(runner):
    result = runner.invoke(cli, ["scan", "--curve", "tt-surface", "--section", "P", "--theorem", "3",
                                 "--tmax", "6", "--samples", "12"])
    assert result.exit_code == 0, result.output
    rows = list(csv.reader(io.StringIO(result.stdout)))
    assert rows[0] == list(CSV_COLUMNS)
    assert len(rows) == 13
    assert all(len(row) == len(CSV_COLUMNS) for row in rows)
    bad = {(row[0], row[1]) for row in rows[1:] if "bad-fiber" in row[-1].split(";")}
    assert bad <= {("0", "1"), ("1", "0")}
    assert "theorem 3: 12 fibres" in result.stderr
    assert TAG in result.stderr


def test_scan_jobs_do_not_change_output(runner, tmp_path):
    outputs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"scan-{jobs}.csv"
        result = runner.invoke(cli, ["scan", "--curve", "tt-surface", "--section", "P", "--theorem", "4",
                                     "--tmax", "8", "--out", str(out), "--jobs", jobs])
        assert result.exit_code == 0, result.output
        assert "theorem 4" in result.stdout
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_rank_drop_needs_independent_sections(runner):
    result = runner.invoke(cli, ["scan", "--curve", "tt-surface", "--section", "P", "--section", "2*P",
                                 "--theorem", "1", "--hbound", "5"])
    assert result.exit_code == 3
    assert result.stderr.startswith("error: ")


def test_isotrivial_scan_is_refused(runner):
    result = runner.invoke(cli, ["scan", "--curve", "cube-twist", "--theorem", "3", "--tmax", "5"])
    assert result.exit_code == 3
    assert "isotrivial" in result.stderr
    assert result.stdout == ""


def test_verify_machine_weil(runner):
    result = runner.invoke(cli, ["verify-machine", "--suite", "weil"])
    assert result.exit_code == 0, result.output
    assert "PASS  weil.northcott" in result.stdout
    assert result.stdout.rstrip().endswith("checks passed")


@pytest.mark.slow
def test_verify_machine_all(runner):
    result = runner.invoke(cli, ["verify-machine"])
    assert result.exit_code == 0, result.output
