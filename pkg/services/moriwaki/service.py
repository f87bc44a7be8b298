import logging
import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import List, Optional, Sequence, Tuple, Union

import mpmath

from infra.config import precision_bits
from infra.errors import ResourceError
from services.algebra.models import RationalFunction
from services.moriwaki.models import MoriwakiRecord, PolarizationConfig, PolyPoint

logger = logging.getLogger(__name__)

DEFAULT_POLARIZATION = PolarizationConfig()


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> List[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub(a: Sequence[int], b: Sequence[int]) -> List[int]:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]


def _derivative(a: Sequence[int]) -> List[int]:
    return [i * a[i] for i in range(1, len(a))] or [0]


def wronskians(point: PolyPoint) -> List[List[int]]:
    """f_i f_j' - f_j f_i' for i < j, as integer polynomials; only nonzero ones"""
    out = []
    coords = point.coords
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            w = _poly_sub(_poly_mul(coords[i], _derivative(coords[j])), _poly_mul(coords[j], _derivative(coords[i])))
            if any(w):
                out.append(w)
    return out


def _horner(coeffs: Sequence[int], u):
    acc = mpmath.mpc(0)
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


def _density(coords, wrons, u) -> mpmath.mpf:
    """Pullback of the unit-mass Fubini-Study form: (1/pi) sum |W_ij|^2 / (sum |f_i|^2)^2"""
    s = mpmath.fsum(abs(_horner(c, u)) ** 2 for c in coords)
    w = mpmath.fsum(abs(_horner(c, u)) ** 2 for c in wrons)
    return w / (mpmath.pi * s * s)


def quadrature_bits(tol: float) -> int:
    """Working precision for one radial integral: the bits of tol plus guard bits"""
    return min(precision_bits(), math.ceil(-math.log2(tol)) + 24)


def _radial(coords, wrons, theta, bits: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """
    Integral over r in [0, inf) at angle theta, in s = r^2/(1+r^2):
    -(1/2) log(1-s) * density / (2 (1-s)^2) ds
    """

    def integrand(s):
        if s >= 1:
            return mpmath.mpf(0)
        r = mpmath.sqrt(s / (1 - s))
        return -mpmath.log1p(-s) / 2 * _density(coords, wrons, r * direction) / (2 * (1 - s) ** 2)

    with mpmath.workprec(bits):
        direction = mpmath.expj(theta)
        value, err = mpmath.quad(integrand, [0, 1], error=True)
    return value, err


def _angular_sampler(coords, wrons, tol: float):
    """
    Radial integral at angle 2 pi k / n. Integer coefficients make the density
    symmetric under u -> conj(u), so angles t and 1 - t (in turns) share a value
    """
    bits = quadrature_bits(tol)

    @lru_cache(maxsize=None)
    def at_turn(turn: Fraction):
        return _radial(coords, wrons, 2 * mpmath.pi * turn.numerator / turn.denominator, bits)

    def at(k: int, n: int):
        turn = Fraction(k, n)
        return at_turn(min(turn, 1 - turn))

    at.cache_info = at_turn.cache_info
    return at


def moriwaki_arch_term(point: PolyPoint, config: PolarizationConfig = DEFAULT_POLARIZATION) -> Tuple[float, float]:
    """
    integral over C of log sqrt(1 + |u|^2) against the pulled back Fubini-Study form;
    returns (value, error estimate). Constant maps give exactly 0.
    """
    wrons = wronskians(point)
    if point.is_constant or not wrons:
        return 0.0, 0.0
    with mpmath.workprec(precision_bits()):
        radial_at = _angular_sampler(point.coords, wrons, config.tol)
        n = config.initial_angular_nodes
        radial = [radial_at(k, n) for k in range(n)]
        total = 2 * mpmath.pi / n * mpmath.fsum(v for v, _ in radial)
        quad_err = max(e for _, e in radial)
        while True:
            # doubling the trapezoid only needs the odd nodes
            m = 2 * n
            if m > config.max_angular_nodes:
                raise ResourceError(
                    f"archimedean integral did not reach tolerance {config.tol} with {n} angular nodes"
                )
            extra = [radial_at(2 * k + 1, m) for k in range(n)]
            refined = total / 2 + mpmath.pi / n * mpmath.fsum(v for v, _ in extra)
            quad_err = max([quad_err] + [e for _, e in extra])
            change = abs(refined - total)
            total, n = refined, m
            if change < config.tol / 2:
                break
        logger.debug("arch term %s with %d angular nodes (%d radial integrals), change %s",
                     total, n, radial_at.cache_info().currsize, change)
        return float(total), float(change + 2 * mpmath.pi * quad_err)


def moriwaki_finite_term(point: PolyPoint) -> Tuple[float, float]:
    """
    (horizontal, vertical) parts at u = infinity: log of the Euclidean norm of the
    leading vector divided by its content c, and log c
    """
    lead = point.leading_vector
    content = reduce(math.gcd, lead, 0)
    with mpmath.workprec(precision_bits()):
        norm = mpmath.sqrt(mpmath.fsum(mpmath.mpf(a) ** 2 for a in lead))
        horizontal = mpmath.log(norm) - mpmath.log(content)
        return float(horizontal), float(mpmath.log(content))


def moriwaki_height(value: Union[PolyPoint, RationalFunction, int], config: PolarizationConfig = DEFAULT_POLARIZATION,
                    section: str = "infinity") -> MoriwakiRecord:
    """
    Height of a Q(u)-point of P^N: finite term + archimedean term. ``section`` picks the
    section of O(1) on the base used to evaluate it ("infinity" or "zero")
    """
    point = value if isinstance(value, PolyPoint) else PolyPoint.from_rational_function(value)
    if section == "zero":
        point = point.reparametrized()
    elif section != "infinity":
        raise ValueError(f"unknown section {section!r}")
    horizontal, vertical = moriwaki_finite_term(point)
    arch, err = moriwaki_arch_term(point, config)
    finite = horizontal + vertical
    return MoriwakiRecord(
        finite_horizontal=horizontal,
        finite_vertical=vertical,
        finite=finite,
        arch=arch,
        arch_error=err,
        height=finite + arch,
        section=section,
    )


def moriwaki_height_value(value, config: Optional[PolarizationConfig] = None) -> float:
    return moriwaki_height(value, config or DEFAULT_POLARIZATION).height
