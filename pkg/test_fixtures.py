from fractions import Fraction

import pytest

from infra.errors import ParseError, SingularCurveError, UsageError
from services.fixtures.service import (
    all_fixtures,
    fixture_names,
    load_curve_file,
    load_fixture,
    parse_curve_file,
    select_points,
)

BAD_EXPRESSION = """[curve]
field = "Q(T)"
a4 = "-T"
a6 = "T^^2"
"""


def test_all_fixtures_load():
    loaded = all_fixtures()
    assert "37a" in loaded and "tt-surface" in loaded
    assert len(loaded) == len(fixture_names())
    for name, curve in loaded.items():
        if curve.field_tag == "Q(u)":
            assert curve.curve is None and curve.values, name
        else:
            assert curve.curve is not None, name


def test_fixture_fields():
    assert load_fixture("37a").surface is None
    surface = load_fixture("tt-surface").surface
    assert set(surface.sections) == {"P", "Q", "R"}
    assert load_fixture("tt-surface").spec.scan.tmax == 200


def test_unknown_fixture():
    with pytest.raises(UsageError) as e:
        load_fixture("no-such-curve")
    assert "known fixtures" in e.value.detail


def test_load_curve_file_by_name_and_path(tmp_path):
    assert load_curve_file("37a").curve.name == "37a"
    assert load_curve_file("fixture:389a").source == "389a"
    path = tmp_path / "mine.toml"
    path.write_text('[curve]\nfield = "Q"\na6 = "1"\n\n[[section]]\nname = "P"\nx = "0"\ny = "1"\n')
    loaded = load_curve_file(str(path))
    assert loaded.curve.name == "mine"
    assert loaded.points["P"].x == 0
    with pytest.raises(UsageError):
        load_curve_file(str(tmp_path / "missing.toml"))


def test_expression_error_position():
    with pytest.raises(ParseError) as e:
        parse_curve_file(BAD_EXPRESSION, source="bad.toml")
    assert (e.value.line, e.value.column) == (4, 9)
    assert e.value.detail.startswith("bad.toml:4:9:")
    assert e.value.exit_code == 2


def test_toml_syntax_error():
    with pytest.raises(ParseError) as e:
        parse_curve_file('[curve\nfield = "Q"\n', source="broken.toml")
    assert e.value.line == 1


@pytest.mark.parametrize(
    "text",
    [
        '[curve]\nfield = "Q(x)"\na6 = "1"\n',
        '[curve]\nfield = "Q"\n',
        '[curve]\nfield = "Q"\na6 = "1"\n[[section]]\nname = "P"\nx = "0"\n',
        '[curve]\nfield = "Q"\na6 = "1"\n[[section]]\nname = "P"\nx = "0"\ny = "1"\n'
        '[[section]]\nname = "P"\nx = "0"\ny = "-1"\n',
    ],
)
def test_invalid_files(text):
    with pytest.raises(UsageError):
        parse_curve_file(text)


def test_point_off_curve():
    with pytest.raises(UsageError) as e:
        parse_curve_file('[curve]\nfield = "Q"\na6 = "1"\n[[section]]\nname = "P"\nx = "1"\ny = "1"\n')
    assert "not on the curve" in e.value.detail


def test_singular_model():
    with pytest.raises(SingularCurveError):
        parse_curve_file('[curve]\nfield = "Q"\na4 = "0"\na6 = "0"\n')


def test_select_points():
    loaded = load_fixture("37a")
    p, p2 = select_points(loaded, ["P", "2*P"])
    assert p2.x == 1 and p2.y == 0
    assert select_points(loaded, None) == [p]
    with pytest.raises(UsageError):
        select_points(loaded, ["Q"])
    with pytest.raises(UsageError):
        select_points(loaded, ["two*P"])


def test_select_values():
    loaded = load_fixture("fs-points")
    (x,) = select_points(loaded, ["half-line"])
    assert x(Fraction(4)) == 2
    with pytest.raises(UsageError):
        select_points(loaded, ["2*identity"])
