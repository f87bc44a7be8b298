import click

from api.options import command_context, curve_option, precision_option
from services.curve_ft.service import factored_string, fiber_reductions, is_isotrivial, model_at_infinity
from services.curve_q.tate import bad_primes, integral_model, tate_at_prime
from services.fixtures.service import load_curve_file


def curve_info_lines(loaded) -> list:
    """Deterministic text report for a loaded curve file"""
    spec = loaded.spec
    lines = [f"curve: {spec.name or loaded.source}", f"field: {spec.field}"]
    curve = loaded.curve
    if curve is None:
        lines.append("model: none (points of P^1 only)")
        for name, value in loaded.values.items():
            lines.append(f"point {name}: [{value.to_string(spec.variable)} : 1]")
        return lines

    var = spec.variable or "T"
    lines.append(f"model: {curve.to_string(var)}")
    if curve.over_function_field:
        lines.append(f"discriminant: {factored_string(curve.discriminant, var)}")
        lines.append(f"j-invariant: {curve.j_invariant.to_string(var)}")
        lines.append(f"isotrivial: {str(is_isotrivial(curve)).lower()}")
        model, k = model_at_infinity(curve)
        lines.append(f"model at infinity (S = 1/{var}, weight {k}): {model.to_string('S')}")
        lines.append("bad places:")
        for red in fiber_reductions(curve):
            lines.append(
                f"  {red.place.label(var)}: {red.kodaira} v(disc)={red.v_disc} v_min(disc)={red.v_min_disc}"
            )
    else:
        model, _ = integral_model(curve)
        lines.append(f"discriminant: {curve.discriminant}")
        lines.append(f"j-invariant: {curve.j_invariant}")
        if model != curve:
            lines.append(f"integral model: {model}")
        lines.append("bad primes:")
        for p in bad_primes(model):
            data = tate_at_prime(model, p)
            lines.append(
                f"  {p}: {data.kodaira} v_min(disc)={data.v_min_disc} c_p={data.tamagawa} f_p={data.conductor_exponent}"
            )
    for name, point in loaded.points.items():
        if point.is_infinity:
            lines.append(f"section {name}: O")
        elif curve.over_function_field:
            lines.append(f"section {name}: ({point.x.to_string(var)}, {point.y.to_string(var)})")
        else:
            lines.append(f"section {name}: ({point.x}, {point.y})")
    return lines


@click.command("curve-info")
@curve_option
@precision_option
def curve_info(curve_path, precision):
    """Discriminant, j-invariant, bad fibres and isotriviality of a curve file."""
    with command_context(precision, 1):
        loaded = load_curve_file(curve_path)
        for line in curve_info_lines(loaded):
            click.echo(line)
