"""
Sweep execution: expands an ExperimentConfig into (suite, q, seed) tasks,
runs them (optionally in a process pool) and merges the rows in a
deterministic order. A failing task is logged and recorded, never fatal.
"""

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .characters import CharSubset, random_subset, tolerance
from .config import CHECK_TOLERANCES, ExperimentConfig, validate
from .discrepancy import (
    arc_deviation,
    discrepancy_exact,
    discrepancy_grid,
    jacobi_sequence,
    jacobi_sequence_values,
    points_from_angles,
)
from .errors import LabError, TupleBudgetExceeded
from .exp_sums import (
    fourier_identity_residual,
    gauss_all,
    gauss_sum_naive,
    jacobi_direct,
    jacobi_via_gauss,
    kl_moment_sum,
    kl_twisted_moments,
    kloosterman_all,
    kloosterman_direct_all,
    kloosterman_table,
    lemma_kl_rhs,
)
from .finite_field import build_field
from .invariant_dims import (
    GroupSpec,
    RQuery,
    group_for,
    r_bounds,
    r_constants,
    r_g2,
    r_lookup,
    r_sl,
    r_sl_k1_hook,
    r_sl_kk_syt,
)
from .moments_bounds import (
    MOMENT_SETTINGS,
    MomentSpec,
    empirical_exponent,
    erdos_turan_best,
    f_exponent,
    g_exponent,
    moments,
    moments_brute_force,
    power_sums,
    rhs_m2,
    rhs_m3,
    rhs_moment1,
    rhs_theorem1_sizes,
    rhs_theorem2_best,
    rhs_theorem3,
    sequence_size,
    size_exponent,
)
from .report import ResultRow, sizes_label, sort_rows, summarize

logger = logging.getLogger(__name__)

# values stated for small (k, l) in the literature on Kloosterman monodromy
R_SMALL_TABLE = {
    (1, 1): {"mu5": 1, "sp2": 1, "sp4": 1, "sp6": 1, "so3": 1, "so5": 1, "sl3": 1, "sl5": 1, "g2": 1},
    (2, 1): {"mu5": 0, "sp2": 0, "sp4": 0, "sp6": 0, "so3": 1, "so5": 0, "sl3": 0, "sl5": 0, "g2": 1},
    (2, 2): {"mu5": 1, "sp2": 2, "sp4": 3, "sp6": 3, "so3": 3, "so5": 3, "sl3": 2, "sl5": 2, "g2": 4},
    (3, 3): {"mu5": 1, "sp2": 5, "sp4": 14, "sp6": 15, "so3": 15, "so5": 15, "sl3": 6, "sl5": 6, "g2": 35},
}

G2_SERIES = (1, 0, 1, 1, 4, 10, 35, 120, 455)

F_STATED = (
    ((0, 0), Fraction(0)), ((1, 0), Fraction(0)), ((Fraction(1, 2), Fraction(1, 2)), Fraction(0)),
    ((Fraction(4, 5), Fraction(4, 5)), Fraction(1, 10)), ((1, Fraction(1, 3)), Fraction(1, 6)),
    ((1, Fraction(2, 3)), Fraction(1, 6)), ((Fraction(8, 9), Fraction(8, 9)), Fraction(1, 6)),
    ((1, 1), Fraction(3, 14)),
)


@dataclass(frozen=True)
class Task:
    suite: str
    p: int
    r: int
    seed: int
    cfg: ExperimentConfig

    @property
    def q(self) -> int:
        return self.p ** self.r if self.p else 0


@dataclass
class Family:
    m: int
    k_extra: int
    subsets: list
    full: bool

    @property
    def sizes(self) -> list:
        return [len(s) for s in self.subsets]

    def all_sizes(self, q: int) -> list:
        return self.sizes + [q - 2] * self.k_extra


def _row(task: Task, case: str, **kwargs) -> ResultRow:
    return ResultRow(suite=task.suite, case=case, q=task.q, seed=task.seed, **kwargs)


def _check(task: Task, case: str, measured: float, bound: float, **kwargs) -> ResultRow:
    return _row(task, case, measured=float(measured), bound=float(bound),
                passed=bool(measured <= bound), **kwargs)


def _families(task: Task, field) -> list:
    cfg, policy = task.cfg, task.cfg.subset_policy
    out = []
    if policy.kind == "explicit":
        subsets = [CharSubset(tuple(s), field.order) for s in policy.subsets]
        for k in cfg.k_extra:
            if len(subsets) + k >= 2:
                out.append(Family(len(subsets), k, subsets, False))
        return out
    for m, k in itertools.product(cfg.m, cfg.k_extra):
        if m + k < 2:
            continue
        if policy.kind == "full":
            out.append(Family(m, k, [CharSubset.full(field)] * m, True))
            continue
        for size in policy.sizes_for(field.q):
            subsets = [random_subset(field, size, [task.seed, field.q, i]) for i in range(m)]
            out.append(Family(m, k, subsets, False))
    return out


def _family_row(task: Task, fam: Family, case: str, **kwargs) -> ResultRow:
    return _row(task, case, m=fam.m, k=fam.k_extra, sizes=sizes_label(fam.sizes), **kwargs)


def _skipped(task: Task, fam: Family, case: str, reason: str) -> ResultRow:
    logger.info("Skipping %s q=%d sizes=%s: %s", case, task.q, fam.sizes, reason)
    return _family_row(task, fam, case, note=f"skipped: {reason}")


def _guarded(task: Task, case: str, compute, *args, fam: Family = None, **labels) -> list:
    """Rows from compute(*args); an exception becomes one error row for this item only."""
    try:
        return compute(*args)
    except Exception as e:
        logger.error("Check %s/%s q=%d seed=%d failed: %s", task.suite, case, task.q, task.seed, e)
        error = f"{type(e).__name__}: {e}"
        if fam is not None:
            return [_family_row(task, fam, case, passed=False, error=error, **labels)]
        return [_row(task, case, passed=False, error=error, **labels)]


# ── suites ──────────────────────────────────────────────────────────────────

def _suite_gauss(task: Task) -> list:
    field = build_field(task.p, task.r)
    gt = gauss_all(field)
    sq = math.sqrt(field.q)
    tol = CHECK_TOLERANCES["gauss_modulus"] * sq
    rows = []
    for j in range(1, field.order):
        g = complex(gt.values[j])
        rows.append(_check(task, f"chi_{j}", abs(abs(g) - sq), tol, value_re=g.real, value_im=g.imag))
    g0 = complex(gt.values[0])
    rows.append(_check(task, "trivial", abs(g0 + 1), CHECK_TOLERANCES["gauss_trivial"],
                       value_re=g0.real, value_im=g0.imag))
    if field.q <= 1024:
        def naive_rows():
            worst = max(abs(gauss_sum_naive(field, 0, j) - gt.values[j]) for j in range(field.order))
            return [_check(task, "transform-vs-naive", worst, tol)]

        rows.extend(_guarded(task, "transform-vs-naive", naive_rows))
    return rows


def _identity_tuples(field, m: int, cap: int) -> list:
    order = field.order
    if (order - 1) ** m <= cap:
        tuples = itertools.product(range(1, order), repeat=m)
    else:
        rng = np.random.Generator(np.random.PCG64(field.q))
        tuples = map(tuple, rng.integers(1, order, size=(cap, m)).tolist())
    return [t for t in tuples if sum(t) % order]


def _jacobi_rows(task: Task, field, gt, m: int) -> list:
    cfg = task.cfg
    subsets = [CharSubset.full(field)] * m
    try:
        z = jacobi_sequence_values(field, subsets, gtable=gt, max_tuples=cfg.max_tuples)
    except TupleBudgetExceeded as e:
        return [_row(task, f"modulus-m{m}", m=m, note=f"skipped: {e}")]
    worst = float(np.max(np.abs(np.abs(z) - 1.0)))
    rows = [_check(task, f"modulus-m{m}", worst, CHECK_TOLERANCES["jacobi_modulus"], m=m, note=f"N={z.size}")]
    if cfg.precision_flags.get("identity"):
        scale = field.q ** ((m - 1) / 2)
        tuples = _identity_tuples(field, m, CHECK_TOLERANCES["identity_max_tuples"])
        worst = max(abs(jacobi_direct(field, t) - jacobi_via_gauss(gt, t)) for t in tuples) / scale
        rows.append(_check(task, f"direct-vs-gauss-m{m}", worst, CHECK_TOLERANCES["jacobi_identity"],
                           m=m, note=f"{len(tuples)} tuples"))
    return rows


def _suite_jacobi(task: Task) -> list:
    field = build_field(task.p, task.r)
    gt = gauss_all(field)
    rows = []
    for m in task.cfg.m:
        if m >= 2:
            rows.extend(_guarded(task, f"modulus-m{m}", _jacobi_rows, task, field, gt, m, m=m))
    return rows


def _kloosterman_rows(task: Task, field, gt, n: int) -> list:
    tol = CHECK_TOLERANCES["kloosterman_identity"]
    scale = n * field.q ** ((n - 1) / 2)
    ktable = kloosterman_all(gt, n)
    direct = kloosterman_direct_all(field, n)
    worst = float(np.max(np.abs(ktable.values - direct))) / scale
    residual = fourier_identity_residual(ktable, gt) / field.q ** (n / 2)
    return [
        _check(task, "transform-vs-direct", worst, tol, n=n),
        _check(task, "fourier-identity", residual, tol, n=n),
    ]


def _suite_kloosterman(task: Task) -> list:
    field = build_field(task.p, task.r)
    gt = gauss_all(field)
    rows = []
    for n in task.cfg.kl_n:
        rows.extend(_guarded(task, "transform-vs-direct", _kloosterman_rows, task, field, gt, n, n=n))
    return rows


def _lemma_rows(task: Task, field, gt, n: int) -> list:
    ktable = kloosterman_table(gt, n)
    group = group_for(field.p, n)
    rows = []
    for w in range(1, task.cfg.kl_max_weight + 1):
        slack = tolerance(field.order, n ** w * field.q ** ((n - 1) * w / 2))
        for k in range(w + 1):
            l = w - k
            R = r_lookup(RQuery(group, k, l))
            note = f"l={l} R={R} group={group.name}"
            plain = kl_moment_sum(ktable, k, l)
            bound = lemma_kl_rhs(field.q, n, k, l, False, R)
            rows.append(_check(task, f"k={k},l={l},untwisted", abs(plain), bound + slack, n=n, k=k,
                               value_re=plain.real, value_im=plain.imag, note=note))
            twisted = float(np.max(np.abs(kl_twisted_moments(ktable, k, l)[1:])))
            bound = lemma_kl_rhs(field.q, n, k, l, True, R)
            rows.append(_check(task, f"k={k},l={l},twisted", twisted, bound + slack, n=n, k=k, note=note))
    return rows


def _suite_lemma_kl(task: Task) -> list:
    field = build_field(task.p, task.r)
    gt = gauss_all(field)
    rows = []
    for n in task.cfg.kl_n:
        rows.extend(_guarded(task, "lemma", _lemma_rows, task, field, gt, n, n=n))
    return rows


def discrepancy_bound(field, fam: Family) -> tuple:
    """Smallest applicable theorem bound for the family, with its name."""
    q = field.q
    sizes = fam.all_sizes(q)
    options = [(rhs_theorem1_sizes(q, sizes), "theorem1")]
    if fam.k_extra >= 1:
        options.append((rhs_theorem2_best(q, fam.k_extra, fam.m, max(fam.sizes)), "theorem2"))
    if fam.full:
        options.append((rhs_theorem3(q, fam.m + fam.k_extra), "theorem3"))
    return min(options)


def exponent_note(field, fam: Family, D: float) -> str:
    q = field.q
    measured = empirical_exponent(q, D)
    if fam.k_extra == 0:
        a1, a2 = sorted(fam.sizes, reverse=True)[:2]
        predicted = f_exponent(size_exponent(q, a1), size_exponent(q, a2))
        return f"log_q(1/D)={measured:.6f} f={float(predicted):.6f}"
    predicted = g_exponent(fam.k_extra, fam.m, size_exponent(q, max(fam.sizes)))
    return f"log_q(1/D)={measured:.6f} g={float(predicted):.6f}"


def _discrepancy_rows(task: Task, field, gt, fam: Family) -> list:
    try:
        pts = jacobi_sequence(field, fam.subsets, fam.k_extra, gtable=gt, max_tuples=task.cfg.max_tuples)
    except TupleBudgetExceeded as e:
        return [_skipped(task, fam, "theorem-bound", str(e))]
    result = discrepancy_exact(pts)
    bound, which = discrepancy_bound(field, fam)
    note = f"N={pts.N} {which} {exponent_note(field, fam, result.D)}"
    return [_family_row(task, fam, "theorem-bound", measured=result.D, bound=bound,
                        passed=result.D <= bound + tolerance(pts.N), note=note)]


def _suite_discrepancy(task: Task) -> list:
    field = build_field(task.p, task.r)
    gt = gauss_all(field)
    rows = []
    for fam in _families(task, field):
        rows.extend(_guarded(task, "theorem-bound", _discrepancy_rows, task, field, gt, fam, fam=fam))
    return rows


def moment_bound(field, fam: Family, n: int, N: int) -> tuple:
    q = field.q
    options = [(float(N), "trivial")]
    sizes = fam.all_sizes(q)
    if len(sizes) >= 2:
        options.append((rhs_moment1(q, n, sizes), "moment1"))
    if fam.k_extra >= 1:
        R_k1, R_k1k1 = r_constants(field.p, n, fam.k_extra)
        delta = 0 if fam.m == 1 else 1
        options.append((rhs_m2(q, n, fam.k_extra, fam.sizes, delta, R_k1, R_k1k1), "m2"))
    total = fam.m + fam.k_extra
    if fam.full and total >= 2:
        R_total, _ = r_constants(field.p, n, total)
        options.append((rhs_m3(q, n, total, R_total), "m3"))
    return min(options)


def _moment_row(task: Task, field, fam: Family, n: int, value: complex, N: int) -> list:
    bound, which = moment_bound(field, fam, n, N)
    measured = abs(value)
    return [_family_row(task, fam, f"moment-{which}", n=n, value_re=value.real, value_im=value.imag,
                        measured=measured, bound=bound, passed=measured <= bound + tolerance(N), note=f"N={N}")]


def _oracle_rows(task: Task, field, gt, fam: Family, spec: MomentSpec, values, N: int) -> list:
    if math.prod(fam.all_sizes(field.q)) > MOMENT_SETTINGS["brute_force_max_tuples"]:
        return [_skipped(task, fam, "oracle", "family too large for enumeration")]
    brute = moments_brute_force(spec, gt)
    worst = max(abs(a - b) for a, b in zip(values, brute)) / max(N, 1)
    return [_family_row(task, fam, "oracle", measured=worst, bound=CHECK_TOLERANCES["moment_oracle"],
                        passed=worst <= CHECK_TOLERANCES["moment_oracle"], note=f"N={N}")]


def _moment_rows(task: Task, field, gt, fam: Family) -> list:
    spec = MomentSpec(field, fam.subsets, fam.k_extra, task.cfg.n_max)
    values = moments(spec, gt)
    N = sequence_size(field, fam.subsets, fam.k_extra)
    rows = []
    for n, value in enumerate(values, start=1):
        rows.extend(_guarded(task, "moment", _moment_row, task, field, fam, n, value, N, fam=fam, n=n))
    if task.cfg.precision_flags.get("oracle"):
        rows.extend(_guarded(task, "oracle", _oracle_rows, task, field, gt, fam, spec, values, N, fam=fam))
    return rows


def _suite_moments(task: Task) -> list:
    field = build_field(task.p, task.r)
    gt = gauss_all(field)
    rows = []
    for fam in _families(task, field):
        rows.extend(_guarded(task, "moment", _moment_rows, task, field, gt, fam, fam=fam))
    return rows


def _corollary_rows(task: Task) -> list:
    rows = []
    for (x, y), expected in F_STATED:
        value = f_exponent(x, y)
        rows.append(_row(task, f"f({x},{y})", measured=float(value), bound=float(expected),
                         passed=bool(value == expected), note="stated value, exact"))
    for k in range(1, 6):
        for m in (1, 2):
            at_one = g_exponent(k, m, 1)
            expected = Fraction(2 * k + 1, 2 * (2 * k + 3))
            rows.append(_row(task, f"g_{k},{m}(1)", k=k, m=m, measured=float(at_one), bound=float(expected),
                             passed=bool(at_one == expected), note="stated value, exact"))
            nxt = g_exponent(k + 1, m, 0)
            rows.append(_row(task, f"g_{k},{m}(1)<g_{k + 1},{m}(0)", k=k, m=m, measured=float(at_one),
                             bound=float(nxt), passed=bool(at_one < nxt)))
    return rows


def _erdos_turan_rows(task: Task, field, gt, fam: Family) -> list:
    cfg = task.cfg
    try:
        pts = jacobi_sequence(field, fam.subsets, fam.k_extra, gtable=gt, max_tuples=cfg.max_tuples)
    except TupleBudgetExceeded as e:
        return [_skipped(task, fam, "erdos-turan", str(e))]
    D = discrepancy_exact(pts).D
    if cfg.K_max == 0:
        et, K = 1.0, 0
    else:
        spec = MomentSpec(field, fam.subsets, fam.k_extra, cfg.K_max)
        et, K = erdos_turan_best(power_sums(moments(spec, gt)), pts.N, cfg.K_max)
    return [_family_row(task, fam, "erdos-turan", measured=D, bound=et,
                        passed=D <= et + tolerance(pts.N), note=f"N={pts.N} K={K}")]


def _suite_bounds(task: Task) -> list:
    """Erdős–Turán at the best K against the exact discrepancy, and corollary checks."""
    if task.p == 0:
        return _corollary_rows(task)
    field = build_field(task.p, task.r)
    gt = gauss_all(field)
    rows = []
    for fam in _families(task, field):
        rows.extend(_guarded(task, "erdos-turan", _erdos_turan_rows, task, field, gt, fam, fam=fam))
    return rows


def _rconst_rows(task: Task, name: str) -> list:
    group = GroupSpec.parse(name)
    rows = []
    for w in range(task.cfg.rconst_max_weight + 1):
        for k in range(w + 1):
            R = r_lookup(RQuery(group, k, w - k))
            mirror = r_lookup(RQuery(group, w - k, k))
            bound = r_bounds(RQuery(group, k, w - k))
            rows.append(_row(task, f"{group.name}:k={k},l={w - k}", k=k, measured=R, bound=bound,
                             passed=R <= bound and R == mirror))
    return rows


def _suite_rconsts(task: Task) -> list:
    rows = []
    for name in task.cfg.rconst_groups:
        rows.extend(_guarded(task, f"{name}:weights", _rconst_rows, task, name))
    for (k, l), table in sorted(R_SMALL_TABLE.items()):
        for name, expected in sorted(table.items()):
            R = r_lookup(RQuery(GroupSpec.parse(name), k, l))
            rows.append(_row(task, f"table:{name}:k={k},l={l}", k=k, measured=R, bound=expected,
                             passed=R == expected))
    for k, expected in enumerate(G2_SERIES):
        rows.append(_row(task, f"g2-series:{k}", k=k, measured=r_g2(k), bound=expected, passed=r_g2(k) == expected))
    for n in (3, 5):
        for k in range(1, 14):
            if k % n == 1:
                hook, walk = r_sl_k1_hook(n, k), r_sl(n, k, 1)
                rows.append(_row(task, f"hook:SL_{n}:k={k}", n=n, k=k, measured=hook, bound=walk,
                                 passed=hook == walk))
            syt, walk = r_sl_kk_syt(n, k), r_sl(n, k, k)
            rows.append(_row(task, f"syt:SL_{n}:k={k}", n=n, k=k, measured=syt, bound=walk, passed=syt == walk))
    return rows


def _suite_engine(task: Task) -> list:
    """Self-checks of the discrepancy engine on instances with known answers."""
    rows = []
    exact = [("empty", [], 1.0), ("single", [0.3], 1.0), ("antipodal", [0.1, 0.6], 0.5)]
    exact += [(f"equally-spaced-{N}", np.arange(N) / N, 1.0 / N) for N in range(1, 13)]
    for case, angles, expected in exact:
        D = discrepancy_exact(points_from_angles(angles)).D
        rows.append(_row(task, case, measured=abs(D - expected), bound=1e-12, passed=abs(D - expected) <= 1e-12))
    rng = np.random.Generator(np.random.PCG64(0))
    step = 2.0 ** -12
    for i in range(200):
        N = int(rng.integers(1, 51))
        pts = points_from_angles(rng.random(N))
        result = discrepancy_exact(pts)
        pairs = discrepancy_exact(pts, method="pairs").D
        grid = discrepancy_grid(pts)
        gap = max(abs(result.D - pairs), abs(arc_deviation(pts, result.witness) - result.D),
                  max(0.0, grid - result.D - 1e-12), result.D - grid - 2 * step)
        rows.append(_row(task, f"random-{i}", measured=max(gap, 0.0), bound=1e-12,
                         passed=gap <= 1e-12, note=f"N={N} D={result.D:.12g}"))
    return rows


SUITE_RUNNERS = {
    "gauss": _suite_gauss,
    "jacobi": _suite_jacobi,
    "kloosterman": _suite_kloosterman,
    "lemma-kl": _suite_lemma_kl,
    "discrepancy": _suite_discrepancy,
    "moments": _suite_moments,
    "bounds": _suite_bounds,
    "rconsts": _suite_rconsts,
    "engine": _suite_engine,
}

_FIELDLESS = ("rconsts", "engine")
_SEEDED = ("discrepancy", "moments", "bounds")


def plan_tasks(cfg: ExperimentConfig) -> list:
    tasks = []
    seeds = cfg.subset_policy.seeds if cfg.subset_policy.kind == "random" else (-1,)
    for suite in cfg.suites:
        if suite in _FIELDLESS:
            tasks.append(Task(suite, 0, 0, -1, cfg))
            continue
        if suite == "bounds":
            tasks.append(Task(suite, 0, 0, -1, cfg))
        for p, r in cfg.fields:
            for seed in (seeds if suite in _SEEDED else (-1,)):
                tasks.append(Task(suite, p, r, seed, cfg))
    return tasks


def run_task(task: Task) -> list:
    start = time.perf_counter()
    try:
        rows = SUITE_RUNNERS[task.suite](task)
    except LabError as e:
        logger.error("Task %s q=%d seed=%d failed: %s", task.suite, task.q, task.seed, e)
        rows = [_row(task, "task", passed=False, error=f"{type(e).__name__}: {e}")]
    except Exception as e:
        logger.error("Task %s q=%d seed=%d crashed: %s", task.suite, task.q, task.seed, e)
        rows = [_row(task, "task", passed=False, error=f"{type(e).__name__}: {e}")]
    if task.cfg.record_timings:
        elapsed = time.perf_counter() - start
        for row in rows:
            row.wall_time = elapsed
    for row in rows:
        if not row.passed and not row.error:
            logger.warning("Check failed: %s/%s q=%d measured=%.6g bound=%.6g",
                           row.suite, row.case, row.q, row.measured, row.bound)
    return rows


def run_config(cfg: ExperimentConfig, workers: int = None) -> list:
    """Run every task of the config; rows come back sorted by (suite, q, seed)."""
    validate(cfg)
    tasks = plan_tasks(cfg)
    workers = workers or cfg.resolved_workers()
    logger.info("Running %r: %d tasks on %d worker(s)", cfg.name, len(tasks), workers)
    start = time.perf_counter()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_task, tasks))
    else:
        chunks = [run_task(t) for t in tasks]
    rows = sort_rows([row for chunk in chunks for row in chunk])
    summary = summarize(rows)
    logger.info("Finished %r in %.1fs: %d rows, %d failed",
                cfg.name, time.perf_counter() - start, summary["total"], summary["failed"])
    return rows
