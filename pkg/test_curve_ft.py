from fractions import Fraction

import pytest

from infra.errors import ResourceError, UnsupportedError
from services.algebra.models import Polynomial, RationalFunction
from services.curve.service import add, mul_scalar
from services.curve_ft.models import INFINITY_PLACE, Place
from services.curve_ft.service import (
    bad_places,
    denominator_bound,
    factored_string,
    fiber_reductions,
    geom_canonical_height,
    geom_height_value,
    geom_naive_height,
    geom_pairing,
    gram_geom,
    is_isotrivial,
    model_at_infinity,
    place_reduction,
    section_at_infinity,
    torsion_order_ft,
    torsion_test_ft,
)
from services.fixtures.service import load_fixture

S = RationalFunction.variable()


def test_bad_fibres_of_tt_surface(tt_surface):
    reductions = fiber_reductions(tt_surface)
    assert [(r.place.label(), r.kodaira, r.v_min_disc) for r in reductions] == [
        ("T", "IV", 4),
        ("T^2 - 27/4", "I1", 1),
        ("inf", "I0*", 6),
    ]
    assert bad_places(tt_surface)[-1] == INFINITY_PLACE
    assert denominator_bound(tt_surface) == 12


def test_place_reduction_at_a_good_place(tt_surface):
    good = place_reduction(tt_surface, Place(Polynomial((-1, 1))))
    assert good.is_good
    assert good.kodaira == "I0"


def test_model_at_infinity(tt_surface):
    model, k = model_at_infinity(tt_surface)
    assert k == 1
    assert (model.a4, model.a6) == (-S ** 2, S ** 4)
    at_inf = section_at_infinity(tt_surface, tt_surface.section("Q"))
    assert (at_inf.x, at_inf.y) == (S ** 2, S ** 3)


def test_factored_discriminant(tt_surface):
    assert factored_string(tt_surface.curve.discriminant) == "16*T^4*(4*T^2 - 27)"
    assert factored_string(-2 / (S * S - 1), "S") == "-2/((S - 1)*(S + 1))"


def test_isotriviality():
    assert is_isotrivial(load_fixture("cube-twist").surface)
    assert is_isotrivial(load_fixture("constant-x3-plus-1").surface)
    assert not is_isotrivial(load_fixture("tt-surface").surface)


def test_geometric_heights_of_tt_sections(tt_surface):
    record = geom_canonical_height(tt_surface, tt_surface.section("P"), name="P")
    assert record.canonical_exact == Fraction(1, 3)
    assert record.degrees[:5] == (1, 2, 6, 22, 86)
    assert record.naive == 1
    assert record.is_exact
    assert geom_height_value(tt_surface, tt_surface.section("Q")) == 1
    assert geom_height_value(tt_surface, tt_surface.section("R")) == Fraction(1, 3)


def test_reproduced_one_level_deeper(tt_surface):
    p = tt_surface.section("P")
    first = geom_canonical_height(tt_surface, p)
    deeper = geom_canonical_height(tt_surface, p, min_depth=first.depth + 1, max_depth=first.depth + 1)
    assert deeper.canonical_exact == first.canonical_exact


def test_quadraticity_is_exact(tt_surface):
    p = tt_surface.section("P")
    for n in (2, 3):
        assert geom_height_value(tt_surface, mul_scalar(tt_surface.curve, n, p)) == n * n * Fraction(1, 3)


def test_pairing_and_gram(tt_surface):
    p, q = tt_surface.section("P"), tt_surface.section("Q")
    assert geom_height_value(tt_surface, add(tt_surface.curve, p, q)) == Fraction(1, 3)
    assert geom_pairing(tt_surface, p, q) == Fraction(-1, 2)
    gram = gram_geom(tt_surface, [p, q])
    assert gram.matrix == ((Fraction(1, 3), Fraction(-1, 2)), (Fraction(-1, 2), Fraction(1)))
    assert gram.determinant == Fraction(1, 12)
    assert gram_geom(tt_surface, [p, mul_scalar(tt_surface.curve, 2, p)]).determinant == 0


def test_torsion_sections_have_height_zero():
    cube = load_fixture("cube-twist").surface
    p = cube.section("P")
    assert torsion_order_ft(cube, p) == 3
    assert geom_height_value(cube, p) == 0
    family = load_fixture("two-torsion-family").surface
    assert torsion_test_ft(family, family.section("T2"))
    assert geom_height_value(family, family.section("T2")) == 0


def test_non_torsion_section(tt_surface):
    assert torsion_order_ft(tt_surface, tt_surface.section("P")) is None
    assert not torsion_test_ft(tt_surface, tt_surface.section("P"))


def test_pairing_refused_on_isotrivial_surface():
    cube = load_fixture("cube-twist").surface
    with pytest.raises(UnsupportedError):
        geom_pairing(cube, cube.section("P"), cube.section("P"))


def test_naive_height_is_degree_of_x(tt_surface):
    assert geom_naive_height(tt_surface, mul_scalar(tt_surface.curve, 2, tt_surface.section("P"))) == 2


def test_degree_budget_exhausted(tt_surface):
    with pytest.raises(ResourceError):
        geom_canonical_height(tt_surface, tt_surface.section("P"), max_depth=1, max_degree=1)
