"""
Executable property suites for the height machine: each check has a dotted id
(``weil.northcott``, ``canonical.parallelogram``, ...) and runs on the built-in
fixtures or on curves generated from a fixed seed
"""
import logging
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

from infra.config import GEOM_MAX_DEPTH, QUAD_TOL, precision_bits
from infra.errors import HeightError
from services.algebra.models import RationalFunction
from services.curve.models import CurvePoint, WeierstrassCurve
from services.curve.service import add, make_point, mul_scalar, neg
from services.curve_ft.service import denominator_bound, geom_canonical_height, geom_height_value, torsion_order_ft
from services.curve_q.service import (
    canonical_height_value,
    doubling_limit_oracle,
    naive_difference_bound,
    naive_height_q,
    torsion_test_q,
)
from services.fixtures.service import all_fixtures
from services.machine.models import SUITES, CheckResult, SuiteReport
from services.moriwaki.models import PolarizationConfig
from services.moriwaki.service import moriwaki_height
from services.weil.models import FormSystem, ProjPointQ
from services.weil.service import (
    additivity_defect,
    dominance_fit,
    height_bound_gaps,
    points_of_bounded_height,
    ratio_limit_table,
    squaring_defect,
    weil_height_p1,
)

logger = logging.getLogger(__name__)

REFERENCE_37A = 0.0511114082
ORACLE_DEPTH = 6
SEED = 20240611

# forms without a common zero, used by the weil checks
QUADRATIC_FORMS = ["x^2 - y^2", "x*y"]
CUBIC_FORMS = ["x^3", "y^3"]
RATIO_FORMS = ["x^2 + x*y", "y^2 - 3*x*y"]

CheckFn = Callable[[], Tuple[bool, str]]
_CHECKS: Dict[str, List[Tuple[str, CheckFn]]] = {suite: [] for suite in SUITES}


def check(check_id: str):
    suite = check_id.split(".", 1)[0]

    def register(fn: CheckFn) -> CheckFn:
        _CHECKS[suite].append((check_id, fn))
        return fn

    return register


def check_ids(suite: str) -> List[str]:
    return [check_id for check_id, _ in _CHECKS[suite]]


def _q_points() -> List[Tuple[str, WeierstrassCurve, Dict[str, CurvePoint]]]:
    out = []
    for name, loaded in all_fixtures().items():
        if loaded.curve is not None and not loaded.curve.over_function_field and loaded.points:
            out.append((name, loaded.curve, loaded.points))
    return out


def _surfaces():
    return [loaded.surface for loaded in all_fixtures().values() if loaded.surface is not None]


def random_q_points(count: int, seed: int = SEED) -> List[Tuple[WeierstrassCurve, CurvePoint]]:
    """
    Curves y^2 = x^3 + a x + b through a chosen small integral point
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        x0, y0, a = rng.randint(-5, 5), rng.randint(1, 6), rng.randint(-6, 6)
        b = y0 * y0 - x0 ** 3 - a * x0
        if 4 * a ** 3 + 27 * b ** 2 == 0:
            continue
        curve = WeierstrassCurve(0, 0, 0, a, b, name=f"[0,0,0,{a},{b}]")
        out.append((curve, make_point(curve, x0, y0)))
    return out


# weil

@check("weil.northcott")
def _northcott() -> Tuple[bool, str]:
    for bound in (1, 2, 20, 100):
        listed = points_of_bounded_height(bound)
        brute = {ProjPointQ(p=p, q=q) for p in range(-bound, bound + 1) for q in range(-bound, bound + 1)
                 if (p, q) != (0, 0)}
        if len(listed) != len(brute) or set(listed) != brute:
            return False, f"H <= {bound}: enumerated {len(listed)}, brute force {len(brute)}"
    return True, f"{len(listed)} points of height <= 100"


@check("weil.lower-bound")
def _lower_bound() -> Tuple[bool, str]:
    systems = [FormSystem.identity()] + [FormSystem.from_text(f) for f in (QUADRATIC_FORMS, CUBIC_FORMS, RATIO_FORMS)]
    worst_lower = worst_upper = math.inf
    for t in points_of_bounded_height(100):
        if weil_height_p1(t) < 0:
            return False, f"negative height at {t}"
        for system in systems:
            lower, upper = height_bound_gaps(t, system)
            worst_lower, worst_upper = min(worst_lower, lower), min(worst_upper, upper)
    ok = worst_lower >= 0 and worst_upper >= -1e-12
    return ok, f"least slack below {worst_lower:.3g}, above {worst_upper:.3g}"


@check("weil.additivity")
def _additivity() -> Tuple[bool, str]:
    first = FormSystem.from_text(QUADRATIC_FORMS)
    second = FormSystem.from_text(CUBIC_FORMS)
    envelope = math.log(len(first.forms) * len(second.forms))
    worst = max(additivity_defect(t, first, second) for t in points_of_bounded_height(100))
    return worst <= envelope + 1e-12, f"max defect {worst:.3g}, envelope {envelope:.3g}"


@check("weil.functoriality")
def _functoriality() -> Tuple[bool, str]:
    worst = max(squaring_defect(t) for t in points_of_bounded_height(100))
    return worst <= math.log(2), f"max |h(t^2) - 2h(t)| = {worst:.3g}"


@check("weil.dominance")
def _dominance() -> Tuple[bool, str]:
    fit = dominance_fit(FormSystem.identity(), FormSystem.from_text(QUADRATIC_FORMS), points_of_bounded_height(100))
    return abs(fit.c - 2) < 0.05, f"c = {fit.c:.4f}, O(1) = {fit.constant:.3g}"


@check("weil.ratio-limit")
def _ratio_limit() -> Tuple[bool, str]:
    rows = ratio_limit_table(FormSystem.identity(), FormSystem.from_text(RATIO_FORMS), [10 ** 2, 10 ** 4, 10 ** 6])
    devs = [r.deviation for r in rows]
    decreasing = all(a > b for a, b in zip(devs, devs[1:]))
    # deviations shrink like 1/log H: a factor of about 3 from 10^2 to 10^6
    shape = devs[-1] * 2.5 <= devs[0]
    return decreasing and shape, "deviations " + ", ".join(f"{d:.3g}" for d in devs)


# canonical

@check("canonical.reference")
def _reference() -> Tuple[bool, str]:
    loaded = all_fixtures()["37a"]
    value = canonical_height_value(loaded.curve, loaded.points["P"])
    oracle = doubling_limit_oracle(loaded.curve, loaded.points["P"], ORACLE_DEPTH)
    ok = abs(value - REFERENCE_37A) < 1e-8 and abs(oracle - value) < 16 * 4.0 ** -ORACLE_DEPTH
    return ok, f"hhat = {value:.10f}, oracle {oracle:.10f}"


@check("canonical.oracle")
def _oracle() -> Tuple[bool, str]:
    worst, count = 0.0, 0
    for _, curve, points in _q_points():
        for point in points.values():
            value = canonical_height_value(curve, point)
            oracle = doubling_limit_oracle(curve, point, ORACLE_DEPTH)
            worst = max(worst, abs(value - oracle) / max(1.0, value))
            count += 1
    return worst < 16 * 4.0 ** -ORACLE_DEPTH, f"{count} points, worst relative gap {worst:.3g}"


@check("canonical.quadraticity")
def _quadraticity() -> Tuple[bool, str]:
    worst = 0.0
    cases = [(c, p) for _, c, pts in _q_points() for p in pts.values()] + random_q_points(50)
    for curve, point in cases:
        base = canonical_height_value(curve, point)
        for n in range(2, 6):
            value = canonical_height_value(curve, mul_scalar(curve, n, point))
            worst = max(worst, abs(value - n * n * base) / max(1.0, value))
    return worst < 1e-8, f"{len(cases)} points, worst relative error {worst:.3g}"


@check("canonical.parallelogram")
def _parallelogram() -> Tuple[bool, str]:
    worst, count = 0.0, 0
    cases = [(c, list(pts.values())) for _, c, pts in _q_points() if len(pts) > 1]
    cases += [(c, [p, mul_scalar(c, 2, p)]) for c, p in random_q_points(50)]
    for curve, points in cases:
        for i, p in enumerate(points):
            for q in points[i + 1:]:
                lhs = canonical_height_value(curve, add(curve, p, q)) + canonical_height_value(curve, add(curve, p, neg(curve, q)))
                rhs = 2 * canonical_height_value(curve, p) + 2 * canonical_height_value(curve, q)
                worst = max(worst, abs(lhs - rhs) / max(1.0, rhs))
                count += 1
    return worst < 1e-8, f"{count} pairs, worst relative error {worst:.3g}"


@check("canonical.naive-difference")
def _naive_difference() -> Tuple[bool, str]:
    failures, count = [], 0
    cases = [(c, list(pts.values())) for _, c, pts in _q_points()] + [(c, [p]) for c, p in random_q_points(50)]
    for curve, points in cases:
        bound = naive_difference_bound(curve)
        for point in points:
            for n in (1, 2, 3):
                multiple = mul_scalar(curve, n, point)
                if multiple.is_infinity:
                    continue
                gap = abs(canonical_height_value(curve, multiple) - naive_height_q(curve, multiple))
                count += 1
                if gap > bound:
                    failures.append(f"{curve.name}: {gap:.3g} > {bound:.3g}")
    return not failures, f"{count} points inside the envelope" if not failures else "; ".join(failures)


@check("canonical.torsion-zero")
def _torsion_zero() -> Tuple[bool, str]:
    disagreements = []
    cases = [(f"{n}:{k}", c, p) for n, c, pts in _q_points() for k, p in pts.items()]
    cases += [(curve.name, curve, p) for curve, p in random_q_points(50)]
    for label, curve, point in cases:
        try:
            torsion_test_q(curve, point)
        except HeightError as err:
            disagreements.append(f"{label} ({err.detail})")
    return not disagreements, f"{len(cases)} points" + (": " + "; ".join(disagreements) if disagreements else "")


# geometric

@check("geometric.exact")
def _geom_exact() -> Tuple[bool, str]:
    failures = []
    for surface in _surfaces():
        bound = denominator_bound(surface)
        for name, section in surface.sections.items():
            record = geom_canonical_height(surface, section, name=name)
            deeper = geom_canonical_height(surface, section, name=name, max_depth=max(record.depth + 1, GEOM_MAX_DEPTH),
                                           min_depth=record.depth + 1)
            if deeper.canonical_exact != record.canonical_exact or bound % record.canonical_exact.denominator:
                failures.append(f"{surface.name}:{name}")
    return not failures, "unstable: " + ", ".join(failures) if failures else "all sections exact"


@check("geometric.quadraticity")
def _geom_quadraticity() -> Tuple[bool, str]:
    failures = []
    for surface in _surfaces():
        for name, section in surface.sections.items():
            base = geom_height_value(surface, section)
            for n in (2, 3):
                if geom_height_value(surface, mul_scalar(surface.curve, n, section)) != n * n * base:
                    failures.append(f"{surface.name}:{n}*{name}")
    return not failures, "failed: " + ", ".join(failures) if failures else "hhat(nP) = n^2 hhat(P) exactly"


@check("geometric.torsion-zero")
def _geom_torsion() -> Tuple[bool, str]:
    failures, count = [], 0
    for surface in _surfaces():
        for name, section in surface.sections.items():
            if torsion_order_ft(surface, section) is None:
                continue
            count += 1
            value = geom_height_value(surface, section)
            if value != 0:
                failures.append(f"{surface.name}:{name} = {value}")
    ok = count > 0 and not failures
    return ok, f"{count} torsion sections" + (": " + ", ".join(failures) if failures else " at height 0")


# moriwaki

def _moriwaki_points():
    return all_fixtures()["fs-points"].values


@lru_cache(maxsize=None)
def _moriwaki_cached(value: RationalFunction, config: PolarizationConfig, section: str, bits: int) -> float:
    return moriwaki_height(value, config, section=section).height


def _moriwaki_value(value: RationalFunction, config: PolarizationConfig, section: str = "infinity") -> float:
    """Heights shared across the moriwaki checks, per working precision"""
    return _moriwaki_cached(value, config, section, precision_bits())


@check("moriwaki.identity")
def _identity() -> Tuple[bool, str]:
    value = _moriwaki_value(_moriwaki_points()["identity"], PolarizationConfig())
    return abs(value - 0.5) < 1e-5, f"h(u) = {value:.8f}"


@check("moriwaki.constants")
def _constants() -> Tuple[bool, str]:
    worst = 0.0
    for c in (Fraction(1), Fraction(2), Fraction(-3), Fraction(5, 7)):
        record = moriwaki_height(RationalFunction.coerce(c))
        if record.arch != 0:
            return False, f"arch term {record.arch} at constant {c}"
        expected = 0.5 * math.log(c.numerator ** 2 + c.denominator ** 2)
        worst = max(worst, abs(record.height - expected))
    return worst <= QUAD_TOL, f"worst gap {worst:.3g}"


@check("moriwaki.section-choice")
def _section_choice() -> Tuple[bool, str]:
    config = PolarizationConfig()
    worst = 0.0
    for value in _moriwaki_points().values():
        at_zero = _moriwaki_value(value, config, section="zero")
        worst = max(worst, abs(_moriwaki_value(value, config) - at_zero))
    return worst <= 2 * config.tol, f"worst gap {worst:.3g}"


@check("moriwaki.squaring")
def _squaring() -> Tuple[bool, str]:
    config = PolarizationConfig()
    worst = 0.0
    for value in _moriwaki_points().values():
        once = _moriwaki_value(value, config)
        twice = _moriwaki_value(value * value, config)
        worst = max(worst, abs(twice - 2 * once))
    return worst <= math.log(2) + 2 * config.tol, f"max |h(x^2) - 2h(x)| = {worst:.3g}"


@check("moriwaki.convergence")
def _convergence() -> Tuple[bool, str]:
    coarse = PolarizationConfig()
    fine = PolarizationConfig(tol=coarse.tol / 2)
    worst = 0.0
    for name in ("identity", "square", "mobius", "cubic-ratio"):
        value = _moriwaki_points()[name]
        worst = max(worst, abs(_moriwaki_value(value, fine) - _moriwaki_value(value, coarse)))
    return worst < coarse.tol, f"change on halving the tolerance {worst:.3g}"


def run_check(check_id: str, fn: CheckFn) -> CheckResult:
    try:
        passed, detail = fn()
    except HeightError as err:
        passed, detail = False, f"error: {err.detail}"
    logger.info("%s: %s (%s)", check_id, "pass" if passed else "FAIL", detail)
    return CheckResult(id=check_id, passed=passed, detail=detail)


def run_suite(suite: str) -> SuiteReport:
    if suite not in _CHECKS:
        raise ValueError(f"unknown suite {suite!r}")
    return SuiteReport(suite=suite, results=[run_check(check_id, fn) for check_id, fn in _CHECKS[suite]])


def run_suites(suite: str = "all") -> List[SuiteReport]:
    names = SUITES if suite == "all" else (suite,)
    return [run_suite(name) for name in names]
