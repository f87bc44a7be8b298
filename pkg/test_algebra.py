import math
import random
from fractions import Fraction

import mpmath
import pytest

from infra.errors import ParseError, PoleError, UndefinedGcdError
from services.algebra.models import NEG_INF, Polynomial, RationalFunction, normalize_rational
from services.algebra.parser import parse_binary_form, parse_rational, parse_rational_function
from services.algebra.service import (
    int_factor,
    poly_gcd,
    ratfunc_eval,
    rational_reconstruct,
    to_fraction,
    valuation,
)

T = RationalFunction.variable()


def test_normalize_rational():
    assert normalize_rational(6, -4) == Fraction(-3, 2)
    assert normalize_rational(0, 5) == 0
    with pytest.raises(ZeroDivisionError):
        normalize_rational(1, 0)


def test_poly_gcd_is_monic():
    a = Polynomial((-1, 0, 1))  # T^2 - 1
    b = Polynomial((2, 2))  # 2T + 2
    assert poly_gcd(a, b) == Polynomial((1, 1))
    assert poly_gcd(Polynomial(), Polynomial((0, 3))) == Polynomial((0, 1))
    with pytest.raises(UndefinedGcdError):
        poly_gcd(Polynomial(), Polynomial())


def _random_polynomial(rng, degree):
    coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(degree)]
    return Polynomial(coeffs + [rng.choice([-3, -2, -1, 1, 2, 3])])


def test_poly_gcd_ignores_scaling():
    rng = random.Random(11)
    for _ in range(20):
        common = _random_polynomial(rng, rng.randint(1, 2))
        a = common * _random_polynomial(rng, rng.randint(0, 3))
        b = common * _random_polynomial(rng, rng.randint(0, 3))
        g = poly_gcd(a, b)
        assert g.leading_coefficient == 1
        assert a.divmod(g)[1].is_zero() and b.divmod(g)[1].is_zero()
        assert g.divmod(common.monic())[1].is_zero()
        c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        assert poly_gcd(a.scale(c), b) == g
        assert poly_gcd(b, a) == g


def test_zero_polynomial_degree():
    assert Polynomial().degree is NEG_INF
    assert Polynomial().degree < 0
    assert Polynomial((5,)).degree == 0


def test_rational_function_normal_form():
    f = RationalFunction(Polynomial((-1, 0, 1)), Polynomial((2, 2)))
    assert f.num == Polynomial((Fraction(-1, 2), Fraction(1, 2)))
    assert f.den == Polynomial((1,))
    assert (T + 1) / (T * T - 1) == 1 / (T - 1)


def test_ratfunc_eval_and_pole():
    f = (T * T + 1) / (T - 2)
    assert ratfunc_eval(f, Fraction(1, 2)) == Fraction(5, 4) / Fraction(-3, 2)
    with pytest.raises(PoleError) as err:
        ratfunc_eval(f, 2)
    assert err.value.place == 2


def test_ratfunc_eval_is_a_homomorphism():
    rng = random.Random(5)
    for _ in range(20):
        f = RationalFunction(_random_polynomial(rng, 2), _random_polynomial(rng, rng.randint(0, 2)))
        g = RationalFunction(_random_polynomial(rng, 1), _random_polynomial(rng, rng.randint(0, 2)))
        t = Fraction(rng.randint(-20, 20), rng.randint(1, 7))
        try:
            ft, gt = ratfunc_eval(f, t), ratfunc_eval(g, t)
        except PoleError:
            continue
        assert ratfunc_eval(f + g, t) == ft + gt
        assert ratfunc_eval(f * g, t) == ft * gt


def test_valuations_over_q_t():
    f = T ** 4 * (4 * T * T - 27) / (T - 1) ** 2
    assert f.valuation(Polynomial((0, 1))) == 4
    assert f.valuation(Polynomial((-1, 1))) == -2
    assert f.valuation_at_infinity() == 2 - 6
    assert f.at_infinity() == (1 / T ** 4) * (4 / T ** 2 - 27) / (1 / T - 1) ** 2


def test_int_factor_round_trip():
    n = -2 ** 5 * 3 * 101 ** 2 * 1000003
    factors = int_factor(n)
    assert factors == [(2, 5), (3, 1), (101, 2), (1000003, 1)]
    assert math.prod(p ** e for p, e in factors) == abs(n)
    with pytest.raises(ValueError):
        int_factor(0)


def test_valuation_of_rationals():
    assert valuation(Fraction(50, 3), 5) == 2
    assert valuation(Fraction(50, 3), 3) == -1
    assert valuation(0, 7) == math.inf


def test_rational_reconstruct():
    assert rational_reconstruct(mpmath.mpf(1) / 3, 12, 1e-9) == Fraction(1, 3)
    assert rational_reconstruct(0.1234567, 10, 1e-9) is None
    assert rational_reconstruct(Fraction(7, 12), 12, Fraction(1, 10 ** 6)) == Fraction(7, 12)
    with pytest.raises(ValueError):
        rational_reconstruct(0.5, 0, 1e-3)


def test_rational_reconstruct_recovers_perturbed_fractions():
    rng = random.Random(97)
    bound = 50
    tol = Fraction(1, 4 * bound * bound)
    for _ in range(30):
        exact = Fraction(rng.randint(-500, 500), rng.randint(1, bound))
        noise = rng.choice([-1, 1]) * Fraction(rng.randint(1, 1000), 1000) * tol
        assert rational_reconstruct(exact + noise, bound, tol) == exact
        assert rational_reconstruct(exact + noise, bound, abs(noise) / 2) is None


def test_to_fraction_of_mpf_is_exact():
    assert to_fraction(mpmath.mpf(0.375)) == Fraction(3, 8)


def test_parse_rational_function():
    assert parse_rational_function("-T^2") == -T * T
    assert parse_rational_function("(t + 1)/(T^2 - 1)") == 1 / (T - 1)
    assert parse_rational_function("2T**2 - 3") == 2 * T * T - 3
    assert parse_rational_function("T^-2") == 1 / (T * T)
    u = parse_rational_function("(u + 1)/(u - 3)", variable="u")
    assert u(Fraction(5)) == 3


def test_parse_rational():
    assert parse_rational("-7/21") == Fraction(-1, 3)
    assert parse_rational("2^3 - 1/2") == Fraction(15, 2)


@pytest.mark.parametrize(
    "text, column",
    [
        ("T^^2", 3),
        ("2 $ 3", 3),
        ("(T + 1", 7),
        ("x + 1", 1),
    ],
)
def test_parse_errors_carry_position(text, column):
    with pytest.raises(ParseError) as err:
        parse_rational_function(text, source="curve.toml", line=4)
    assert err.value.line == 4
    assert err.value.column == column
    assert err.value.detail.startswith("curve.toml:4:")


def test_parse_division_by_zero():
    with pytest.raises(ParseError):
        parse_rational("1/(2 - 2)")


def test_parse_binary_form():
    form = parse_binary_form("(x - y)^2 + 3*x*y")
    assert form.terms == {(2, 0): 1, (1, 1): 1, (0, 2): 1}
    assert form.total_degrees() == {2}
