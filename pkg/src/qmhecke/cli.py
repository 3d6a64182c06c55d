"""Command-line entry point: expand forms, run identity suites, apply Hecke operators."""

from __future__ import annotations

import ast
import json
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from . import heckealg as hk
from .errors import ParseError, QMHeckeError
from .exactq import format_series
from .forms import delta, eisenstein, eisenstein_level_form, working_precision
from .quasimod import G2, QuasiModularForm
from .suites import NEGATIVE_CONTROLS, SUITES, SuiteConfig, build_report, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# ----------------------------------------------------------------- form DSL


def _dump(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2)


def parse_form(text: str, level: int = 1) -> QuasiModularForm:
    """Parse G2, G<K>, DELTA, EISN(k,c,d,N), +, -, *, ^, rationals and parentheses.

    ``@path.json`` loads a serialized quasimodular form.
    """
    text = text.strip()
    if text.startswith("@"):
        return QuasiModularForm.from_json(json.loads(Path(text[1:]).read_text()))
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse form {text!r}: {exc.msg}") from None
    value = _eval_node(tree.body, level)
    if isinstance(value, Fraction):
        return QuasiModularForm.constant(value, level)
    return value.with_level(max(level, value.level))


def _eval_node(node, level: int):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Fraction(node.value)
    if isinstance(node, ast.Name):
        name = node.id
        if name == "G2":
            return G2.with_level(level)
        if name == "DELTA":
            return QuasiModularForm.modular(delta(), level)
        match = re.fullmatch(r"G(\d+)", name)
        if match:
            return QuasiModularForm.modular(eisenstein(int(match.group(1))), level)
        raise ParseError(f"unknown form name {name!r}")
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "EISN":
        args = [_eval_node(a, level) for a in node.args]
        if len(args) != 4 or not all(isinstance(a, Fraction) and a.denominator == 1 for a in args):
            raise ParseError("EISN takes four integers k, c, d, N")
        k, c, d, n = (int(a) for a in args)
        return QuasiModularForm.modular(eisenstein_level_form(k, c, d, n), max(level, n))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _eval_node(node.operand, level)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left, right = _eval_node(node.left, level), _eval_node(node.right, level)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not isinstance(right, Fraction) or right == 0:
                raise ParseError("division is only by nonzero rational scalars")
            return left * (1 / right)
        if isinstance(node.op, ast.Pow):
            if not isinstance(right, Fraction) or right.denominator != 1 or right < 0:
                raise ParseError("exponents must be nonnegative integers")
            return left ** int(right)
    raise ParseError(f"unsupported syntax in form: {ast.dump(node)}")


def parse_operator(text: str, level: int, guard: int) -> hk.TwistedHeckeOp:
    """``T<n>`` (constant 1 on determinant-n cosets), ``E`` (unit) or ``@path.json``."""
    text = text.strip()
    if text.startswith("@"):
        return hk.TwistedHeckeOp.from_json(json.loads(Path(text[1:]).read_text()))
    if text == "E":
        return hk.identity_op(level)
    match = re.fullmatch(r"T(\d+)", text)
    if match and int(match.group(1)) >= 1:
        return hk.tn_op(int(match.group(1)), level, guard)
    raise ParseError(f"unknown operator {text!r}; use T<n>, E or @file.json")


# ---------------------------------------------------------------- commands


@click.group()
def main():
    """Exact computation with quasimodular forms and their Hecke operators."""


def _usage_error(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_USAGE)


@main.command()
@click.argument("form")
@click.option("--prec", default=8, show_default=True, type=int, help="Number of q-coefficients.")
@click.option("--level", default=1, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True, help="Print the serialized series instead of text.")
def expand(form, prec, level, as_json):
    """Print the q-expansion of FORM to O(q^prec)."""
    try:
        f = parse_form(form, level)
        series = f.expansion(prec)
    except (QMHeckeError, ValueError, OSError) as exc:
        _usage_error(str(exc))
    click.echo(_dump(series.to_json()) if as_json else format_series(series))


@main.command()
@click.argument("suite", type=click.Choice(SUITES))
@click.option("--level", default=1, show_default=True, type=int)
@click.option("--prec", default=12, show_default=True, type=int, help="Precision for expansion-level comparisons.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--samples", default=5, show_default=True, type=int)
@click.option("--guard-orbit", default=20_000, show_default=True, type=int)
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write the JSON report here.")
@click.option("--negative-control", type=click.Choice(NEGATIVE_CONTROLS), default=None)
@click.option("--quiet", is_flag=True, help="Only print the summary line.")
def verify(suite, level, prec, seed, samples, guard_orbit, workers, out_path, negative_control, quiet):
    """Run an identity SUITE and report every check; exit 1 if any fails."""
    cfg = SuiteConfig(suite, level, prec, samples, seed, guard_orbit, negative_control)
    try:
        cfg.validate()
    except ValueError as exc:
        _usage_error(str(exc))
    start = time.perf_counter()
    results = run_suite(cfg, workers=max(1, workers))
    elapsed = time.perf_counter() - start
    report = build_report(cfg, results)
    text = _dump(report)
    if out_path:
        Path(out_path).write_text(text + "\n")
    if not quiet and not out_path:
        click.echo(text)
    s = report["summary"]
    click.echo(f"{suite}: {report['status']} ({s['passed']}/{s['checked']} passed) in {elapsed:.2f}s", err=True)
    sys.exit(EXIT_PASS if report["status"] == "pass" else EXIT_FAIL)


@main.group()
def hecke():
    """Apply or multiply Hecke operators."""


@hecke.command("apply")
@click.option("--op", "op_spec", required=True, help="T<n>, E or @operator.json")
@click.option("--form", "form_spec", required=True, help="Form expression or @form.json")
@click.option("--level", default=1, show_default=True, type=int)
@click.option("--prec", default=8, show_default=True, type=int)
@click.option("--guard-orbit", default=20_000, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True, help="Print the serialized result form.")
def hecke_apply(op_spec, form_spec, level, prec, guard_orbit, as_json):
    """Act with an operator on a form: F * f = sum F_beta (f || beta)."""
    try:
        op = parse_operator(op_spec, level, guard_orbit)
        f = parse_form(form_spec, level).with_level(op.level)
        with working_precision(prec):
            image = hk.act_on_form(op, f)
            ratio = _eigenvalue(image, f, prec)
    except (QMHeckeError, ValueError, OSError) as exc:
        _usage_error(str(exc))
    if as_json:
        click.echo(_dump(image.to_json()))
        return
    click.echo(format_series(image.expansion(prec)))
    if ratio is not None:
        dets = {key.det() for key in op.support()}
        line = f"eigenvalue {ratio}"
        if len(dets) == 1 and f.depth == 0:
            n = dets.pop()
            classical = ratio * n ** (f.weight // 2 - 1)
            line += f"; classical normalisation n^(k/2-1) * eigenvalue = {classical}"
        click.echo(line)


def _eigenvalue(image: QuasiModularForm, f: QuasiModularForm, prec: int):
    """The scalar c with image = c f, if there is one."""
    fs = f.expansion(prec)
    if fs.is_zero():
        return None
    lead = fs.valuation()
    ratio = image.expansion(prec).coefficient(lead) / fs.coefficient(lead)
    if not ratio.is_rational():
        return None
    c = ratio.to_fraction()
    return c if image.equals(f * c) else None


@hecke.command("star")
@click.option("--left", "left_spec", required=True)
@click.option("--right", "right_spec", required=True)
@click.option("--level", default=1, show_default=True, type=int)
@click.option("--prec", default=12, show_default=True, type=int)
@click.option("--guard-orbit", default=20_000, show_default=True, type=int)
@click.option("--compare", "compare_spec", default=None, help="Report whether the product equals this operator.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def hecke_star(left_spec, right_spec, level, prec, guard_orbit, compare_spec, out_path):
    """Multiply two operators with the convolution product."""
    try:
        left = parse_operator(left_spec, level, guard_orbit)
        right = parse_operator(right_spec, level, guard_orbit)
        with working_precision(prec):
            product = hk.star(left, right)
            equal = None
            if compare_spec:
                equal = product.equals(parse_operator(compare_spec, level, guard_orbit))
    except (QMHeckeError, ValueError, OSError) as exc:
        _usage_error(str(exc))
    text = _dump(product.to_json())
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        click.echo(text)
    click.echo(f"support: {len(product.support())} cosets", err=True)
    if equal is not None:
        click.echo(f"equal to {compare_spec}: {str(equal).lower()}")
        sys.exit(EXIT_PASS if equal else EXIT_FAIL)


if __name__ == "__main__":
    main()
