"""
CLI entry point for the Gauss/Jacobi/Kloosterman sum laboratory.

Single-computation subcommands (field, gauss, jacobi, kloosterman,
discrepancy, moments, rconst) print one result; verify and sweep run whole
experiment configurations. Exit codes: 0 success, 1 a check failed,
2 usage or input error.
"""

import argparse
import logging
import sys
import time

from .characters import CharSubset, random_subset, tolerance
from .config import acceptance_configs, load_config
from .discrepancy import discrepancy_exact, jacobi_sequence
from .errors import LabError, ProductTrivial, TrivialCharacter
from .exp_sums import (
    gauss_all,
    gauss_sum_twisted,
    jacobi_direct,
    jacobi_via_gauss,
    kloosterman_table,
)
from .exporter import write_metrics
from .finite_field import build_field_q
from .invariant_dims import GroupSpec, RQuery, r_bounds, r_lookup
from .moments_bounds import MomentSpec, moments, sequence_size
from .report import (
    ResultRow,
    format_complex,
    format_json_output,
    format_text_output,
    rows_to_frame,
    save_csv,
    sizes_label,
)
from .sweep import Family, discrepancy_bound, exponent_note, moment_bound, run_config

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if seed < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {seed}")
    return seed


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=["text", "csv", "json"],
        default="text",
        help="Output format (default: %(default)s)",
    )
    common.add_argument(
        "--seed",
        type=_seed,
        default=0,
        help="Seed for random character subsets (default: %(default)s)",
    )
    common.add_argument("--out", help="Write output to this file instead of stdout")
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    return common


def _family_options(sub: argparse.ArgumentParser):
    sub.add_argument("--q", type=int, required=True, help="Field size, a prime power >= 3")
    sub.add_argument("--m", type=int, default=2, help="Number of restricted slots (default: %(default)s)")
    sub.add_argument(
        "--k-extra",
        type=int,
        default=0,
        help="Additional slots ranging over all nontrivial characters (default: %(default)s)",
    )
    choice = sub.add_mutually_exclusive_group()
    choice.add_argument("--full", action="store_true", help="Every slot ranges over all nontrivial characters")
    choice.add_argument("--size", type=int, help="Random subsets of this size, seeded by --seed")
    choice.add_argument(
        "--subset",
        type=_int_list,
        action="append",
        help="Explicit character indices for one slot; repeat once per slot",
    )


def parse_args(argv=None):
    common = _common_options()
    parser = argparse.ArgumentParser(
        description="Gauss, Jacobi and Kloosterman sums over finite fields, their discrepancy and moments"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    sub = subparsers.add_parser("field", parents=[common], help="Show the arithmetic tables of F_q")
    sub.add_argument("--q", type=int, required=True)

    sub = subparsers.add_parser("gauss", parents=[common], help="Gauss sums G(psi_b, chi_j)")
    sub.add_argument("--q", type=int, required=True)
    sub.add_argument("--chars", type=_int_list, help="Character indices j (default: all)")
    sub.add_argument("--b", type=int, default=0, help="Additive character psi_{g^b} (default: psi_1)")

    sub = subparsers.add_parser("jacobi", parents=[common], help="A Jacobi sum J(chi_j1, ..., chi_jm)")
    sub.add_argument("--q", type=int, required=True)
    sub.add_argument("--chars", type=_int_list, required=True, help="Character indices, e.g. 1,1")

    sub = subparsers.add_parser("kloosterman", parents=[common], help="Kloosterman sums Kl_n(g^a)")
    sub.add_argument("--q", type=int, required=True)
    sub.add_argument("--n", type=int, default=2, help="Number of variables (default: %(default)s)")
    sub.add_argument("--a", type=_int_list, help="Discrete logs of the arguments (default: all)")

    sub = subparsers.add_parser("discrepancy", parents=[common], help="Exact discrepancy of a Jacobi-sum family")
    _family_options(sub)
    sub.add_argument("--method", choices=["linear", "pairs"], default="linear")

    sub = subparsers.add_parser("moments", parents=[common], help="Moments M^(n) of a Jacobi-sum family")
    _family_options(sub)
    sub.add_argument("--n-max", type=int, default=6, help="Highest moment order (default: %(default)s)")

    sub = subparsers.add_parser("rconst", parents=[common], help="Invariant dimension R^{k,l} of a group")
    sub.add_argument("--group", required=True, help="g2, spN, soN, slN or muP")
    sub.add_argument("--steps", type=int, required=True, help="k, the number of dual tensor factors")
    sub.add_argument("--l", type=int, default=0, help="l, the number of tensor factors (default: %(default)s)")

    for name, helptext in (("verify", "Run built-in acceptance checks"), ("sweep", "Run a JSON experiment config")):
        sub = subparsers.add_parser(name, parents=[common], help=helptext)
        if name == "verify":
            sub.add_argument("--suite", default="all", help="Acceptance suite name or 'all' (default: %(default)s)")
        else:
            sub.add_argument("--config", required=True, help="Path to the JSON config")
        sub.add_argument("--workers", type=int, help="Worker processes (default: from config)")
        sub.add_argument("--details", action="store_true", help="List passing rows too")
        sub.add_argument("--metrics-file", help="Write Prometheus gauges to this textfile")

    return parser.parse_args(argv)


# ── single computations ─────────────────────────────────────────────────────

def _cmd_field(args) -> tuple:
    field = build_field_q(args.q)
    row = ResultRow(suite="field", case="generator", q=field.q, measured=field.generator,
                    note=f"p={field.p} r={field.r} modulus={list(field.modulus)}")
    lines = [
        f"F_{field.q}: p={field.p}, r={field.r}",
        f"  modulus (low to high): {list(field.modulus)}",
        f"  generator code: {field.generator}",
        f"  units: {field.order}",
    ]
    return [row], "\n".join(lines)


def _cmd_gauss(args) -> tuple:
    field = build_field_q(args.q)
    gt = gauss_all(field)
    chars = args.chars if args.chars is not None else list(range(field.order))
    rows, lines = [], []
    for j in chars:
        if args.b == 0:
            g = gt[j]
        else:
            g = gauss_sum_twisted(gt, args.b % field.order, j)
        rows.append(ResultRow(suite="gauss", case=f"chi_{j % field.order}", q=field.q,
                              value_re=g.real, value_im=g.imag, measured=abs(g), note=f"b={args.b}"))
        lines.append(f"G(psi_{args.b}, chi_{j % field.order}) = {format_complex(g)}   |G| = {abs(g):.12g}")
    return rows, "\n".join(lines)


def _cmd_jacobi(args) -> tuple:
    field = build_field_q(args.q)
    try:
        value = jacobi_via_gauss(gauss_all(field), args.chars)
        route = "gauss"
    except (TrivialCharacter, ProductTrivial):
        value = jacobi_direct(field, args.chars)
        route = "direct"
    label = ",".join(str(j) for j in args.chars)
    row = ResultRow(suite="jacobi", case=f"J({label})", q=field.q, m=len(args.chars),
                    value_re=value.real, value_im=value.imag, measured=abs(value), note=route)
    return [row], format_complex(value)


def _cmd_kloosterman(args) -> tuple:
    field = build_field_q(args.q)
    ktable = kloosterman_table(gauss_all(field), args.n)
    logs = args.a if args.a is not None else list(field.units())
    rows, lines = [], []
    for a in logs:
        value = ktable.at(a % field.order)
        rows.append(ResultRow(suite="kloosterman", case=f"a=g^{a}", q=field.q, n=args.n,
                              value_re=value.real, value_im=value.imag, measured=abs(value)))
        lines.append(f"Kl_{args.n}(g^{a}) = {format_complex(value)}")
    return rows, "\n".join(lines)


def _family(args, field) -> Family:
    if args.subset:
        subsets = [CharSubset(tuple(s), field.order) for s in args.subset]
        return Family(len(subsets), args.k_extra, subsets, False)
    if args.size is not None:
        subsets = [random_subset(field, args.size, [args.seed, field.q, i]) for i in range(args.m)]
        return Family(args.m, args.k_extra, subsets, False)
    return Family(args.m, args.k_extra, [CharSubset.full(field)] * args.m, True)


def _cmd_discrepancy(args) -> tuple:
    field = build_field_q(args.q)
    fam = _family(args, field)
    pts = jacobi_sequence(field, fam.subsets, fam.k_extra)
    result = discrepancy_exact(pts, method=args.method)
    bound, which = discrepancy_bound(field, fam)
    note = exponent_note(field, fam, result.D)
    row = ResultRow(suite="discrepancy", case=which, q=field.q, m=fam.m, k=fam.k_extra,
                    sizes=sizes_label(fam.sizes), seed=args.seed if args.size is not None else -1,
                    measured=result.D, bound=bound, passed=result.D <= bound, note=f"N={pts.N} {note}")
    lines = [
        f"N={pts.N}",
        f"D={result.D:.15g}",
        f"witness: {result.witness.describe() if result.witness else 'none'}",
        f"bound ({which}): {bound:.6g}",
        note,
    ]
    return [row], "\n".join(lines)


def _cmd_moments(args) -> tuple:
    field = build_field_q(args.q)
    fam = _family(args, field)
    spec = MomentSpec(field, fam.subsets, fam.k_extra, args.n_max)
    values = moments(spec)
    N = sequence_size(field, fam.subsets, fam.k_extra)
    rows, lines = [], [f"N={N}"]
    for n, value in enumerate(values, start=1):
        bound, which = moment_bound(field, fam, n, N)
        rows.append(ResultRow(suite="moments", case=f"moment-{which}", q=field.q, m=fam.m, k=fam.k_extra, n=n,
                              sizes=sizes_label(fam.sizes), value_re=value.real, value_im=value.imag,
                              measured=abs(value), bound=bound, passed=abs(value) <= bound + tolerance(N),
                              note=f"N={N}"))
        lines.append(f"M^({n}) = {format_complex(value)}   |M| = {abs(value):.6g} <= {bound:.6g} ({which})")
    return rows, "\n".join(lines)


def _cmd_rconst(args) -> tuple:
    group = GroupSpec.parse(args.group)
    query = RQuery(group, args.steps, args.l)
    R = r_lookup(query)
    bound = r_bounds(query)
    row = ResultRow(suite="rconsts", case=f"{group.name}:k={args.steps},l={args.l}", k=args.steps,
                    measured=R, bound=bound, passed=R <= bound, note=f"l={args.l}")
    return [row], str(R)


# ── experiment runs ─────────────────────────────────────────────────────────

def _run_configs(configs, args) -> tuple:
    start = time.perf_counter()
    rows = []
    for cfg in configs:
        rows.extend(run_config(cfg, workers=args.workers))
    if args.metrics_file:
        write_metrics(rows, args.metrics_file, time.perf_counter() - start)
    return rows


def _cmd_verify(args) -> tuple:
    rows = _run_configs(acceptance_configs(args.suite), args)
    return rows, format_text_output(rows, title=f"ACCEPTANCE: {args.suite}", show_details=args.details)


def _cmd_sweep(args) -> tuple:
    cfg = load_config(args.config)
    if args.out is None and cfg.output_path:
        args.out = cfg.output_path
    rows = _run_configs([cfg], args)
    return rows, format_text_output(rows, title=f"SWEEP: {cfg.name}", show_details=args.details)


COMMANDS = {
    "field": _cmd_field,
    "gauss": _cmd_gauss,
    "jacobi": _cmd_jacobi,
    "kloosterman": _cmd_kloosterman,
    "discrepancy": _cmd_discrepancy,
    "moments": _cmd_moments,
    "rconst": _cmd_rconst,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
}


def emit(rows: list, text: str, fmt: str, out: str = None):
    """Print or write the result in the requested format."""
    if fmt == "csv" and out:
        save_csv(rows, out)
        return
    if fmt == "csv":
        content = rows_to_frame(rows).to_csv(index=False, float_format="%.17g")
    elif fmt == "json":
        content = format_json_output(rows)
    else:
        content = text
    if out:
        with open(out, "w") as fh:
            fh.write(content if content.endswith("\n") else content + "\n")
        logger.info("Output written to %s", out)
    else:
        print(content.rstrip("\n"))


def main(argv=None) -> int:
    args = parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        rows, text = COMMANDS[args.command](args)
    except (LabError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    emit(rows, text, args.format, args.out)

    # Exit with code 1 if any check failed (useful for CI/CD)
    if any(not r.passed for r in rows):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
