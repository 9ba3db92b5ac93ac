"""
Moments of the normalized Jacobi-sum families, the Erdős–Turán bound, and the
closed-form right-hand sides of the moment and discrepancy theorems.

Moments are computed from normalized Gauss values G^(j) = G(chi_j)/sqrt(q):

    M^(n) = sum_{rho != 0} conv[rho] * conj(G^(rho))^n,
    conv  = f_1 * ... * f_s  (cyclic over Z/(q-1)),   f_i = [j in A_i] G^(j)^n,

which never overflows whatever n is, since every factor has modulus 1.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np
import sympy

from .dft_engine import check_length_cap, cyclic_convolve_many
from .discrepancy import jacobi_sequence_values
from .errors import DomainError, SizeOutOfRange
from .exp_sums import GaussTable, gauss_all
from .finite_field import FieldTable

logger = logging.getLogger(__name__)

MOMENT_SETTINGS = {
    "brute_force_max_tuples": 10 ** 6,
    "erdos_turan_k_max": 50,
    # moments per batched transform
    "batch": 8,
}


@dataclass(frozen=True, eq=False)
class MomentSpec:
    field: FieldTable
    subsets: tuple
    k_extra: int = 0
    n_max: int = 1

    def __post_init__(self):
        object.__setattr__(self, "subsets", tuple(self.subsets))
        if not self.subsets:
            raise ValueError("need at least one subset")
        if len(self.subsets) + self.k_extra < 2:
            raise ValueError("need m + k_extra >= 2")
        if self.k_extra < 0 or self.n_max < 1:
            raise ValueError("need k_extra >= 0 and n_max >= 1")
        for s in self.subsets:
            if s.modulus != self.field.order:
                raise ValueError("subset belongs to a different field")
            if len(s) == 0:
                raise ValueError("subsets must be nonempty")

    @property
    def sizes(self) -> tuple:
        return tuple(len(s) for s in self.subsets) + (self.field.order - 1,) * self.k_extra

    def indicators(self) -> list:
        full = np.ones(self.field.order)
        full[0] = 0.0
        return [s.indicator() for s in self.subsets] + [full] * self.k_extra


@dataclass(frozen=True)
class BoundSpec:
    q: int
    m: int
    k: int
    n: int
    A: tuple
    delta: int
    R_k1: int = 0
    R_k1k1: int = 0

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(int(a) for a in self.A))
        if self.delta != (0 if self.m == 1 else 1):
            raise DomainError(f"delta={self.delta} inconsistent with m={self.m}")
        if any(not 1 <= a <= self.q - 2 for a in self.A):
            raise SizeOutOfRange(f"subset sizes must lie in 1..{self.q - 2}")

    @classmethod
    def for_sizes(cls, q: int, k: int, n: int, A, R_k1: int = 0, R_k1k1: int = 0) -> "BoundSpec":
        A = tuple(A)
        return cls(q=q, m=len(A), k=k, n=n, A=A, delta=0 if len(A) == 1 else 1,
                   R_k1=R_k1, R_k1k1=R_k1k1)


# ── moments ─────────────────────────────────────────────────────────────────

def _moment_batch(unit: np.ndarray, indicators: list, orders: np.ndarray) -> np.ndarray:
    powered = unit[None, :] ** orders[:, None]
    conv = cyclic_convolve_many([ind[None, :] * powered for ind in indicators])
    return np.sum(conv[:, 1:] * np.conj(powered[:, 1:]), axis=1)


def moments(spec: MomentSpec, gtable: GaussTable = None, workers: int = 1) -> list:
    """M^(1), ..., M^(n_max) of the family described by `spec`."""
    field = spec.field
    check_length_cap(field.order)
    gtable = gtable or gauss_all(field)
    unit = gtable.normalized()
    indicators = spec.indicators()

    step = MOMENT_SETTINGS["batch"]
    batches = [np.arange(lo, min(lo + step, spec.n_max + 1)) for lo in range(1, spec.n_max + 1, step)]
    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _moment_batch(unit, indicators, b), batches))
    else:
        parts = [_moment_batch(unit, indicators, b) for b in batches]
    values = [complex(v) for v in np.concatenate(parts)]
    logger.debug("Moments n=1..%d over F_%d for sizes %s", spec.n_max, field.q, spec.sizes)
    return values


def moments_brute_force(spec: MomentSpec, gtable: GaussTable = None) -> list:
    """Oracle: sum z^n over the explicitly enumerated family."""
    z = jacobi_sequence_values(
        spec.field, spec.subsets, spec.k_extra, gtable=gtable,
        max_tuples=MOMENT_SETTINGS["brute_force_max_tuples"],
    )
    return [complex(np.sum(z ** n)) for n in range(1, spec.n_max + 1)]


def power_sums(moment_values) -> np.ndarray:
    """S_n = |sum_i z_i^n| = |M^(n)|."""
    return np.abs(np.asarray(moment_values, dtype=complex))


def sequence_size(field: FieldTable, subsets, k_extra: int = 0) -> int:
    """Exact number of tuples with nontrivial product, without enumerating them."""
    subsets = list(subsets)
    m = field.order
    sizes = [len(s) for s in subsets] + [m - 1] * k_extra
    total = math.prod(sizes)
    dtype = object if total >= 2 ** 62 else np.int64
    # dist[t] = number of partial tuples whose indices sum to t
    dist = np.zeros(m, dtype=dtype)
    dist[0] = 1
    for s in subsets:
        nxt = np.zeros(m, dtype=dtype)
        for j in s:
            nxt += np.roll(dist, j)
        dist = nxt
    for _ in range(k_extra):
        dist = dist.sum() - dist
    return int(total - dist[0])


def min_sequence_size(sizes) -> int:
    """Lower bound (A_1 - 1) A_2 ... A_m, with A_1 the largest size."""
    sizes = [int(a) for a in sizes]
    total = math.prod(sizes)
    return total - total // max(sizes)


def trivial_moment_bound(N: int) -> int:
    return N


# ── Erdős–Turán ─────────────────────────────────────────────────────────────

def erdos_turan_bound(abs_moments, N: int, K: int) -> float:
    """D <= 1/(K+1) + 3 sum_{n=1}^K S_n / (n N), with S_n summed over all N points."""
    if N < 1:
        raise ValueError("Erdős–Turán needs N >= 1")
    if K < 0:
        raise ValueError("K must be >= 0")
    s = np.asarray(abs_moments, dtype=float)
    if len(s) < K:
        raise ValueError(f"need {K} power sums, got {len(s)}")
    n = np.arange(1, K + 1)
    return 1.0 / (K + 1) + 3.0 * float(np.sum(s[:K] / (n * N)))


def erdos_turan_best(abs_moments, N: int, K_max: int = None) -> tuple:
    """(bound, K) minimising the Erdős–Turán bound over K = 0..K_max."""
    if N < 1:
        raise ValueError("Erdős–Turán needs N >= 1")
    s = np.asarray(abs_moments, dtype=float)
    K_max = len(s) if K_max is None else min(K_max, len(s))
    K = np.arange(0, K_max + 1)
    tail = np.concatenate(([0.0], np.cumsum(s[:K_max] / (np.arange(1, K_max + 1) * N))))
    bounds = 1.0 / (K + 1) + 3.0 * tail
    best = int(np.argmin(bounds))
    return float(bounds[best]), best


# ── discrepancy theorems ────────────────────────────────────────────────────

def _check_sizes(q: int, *sizes):
    for a in sizes:
        if not 1 <= a <= q - 2:
            raise SizeOutOfRange(f"subset size {a} outside 1..{q - 2}")


def _theorem1(q: int, a1: int, a2: int) -> float:
    lq = math.log(q)
    first = (2 * 6 ** (2 / 3) * a1 ** (-1 / 3) * q ** (1 / 6)
             + 0.5 * (a1 * a2) ** -0.5 * q ** 0.5 * lq) * (1 + q ** -0.5 / 100)
    second = 4.5 * a1 ** (-2 / 7) * a2 ** (-1 / 7) * q ** (3 / 14) + 1.1 * a1 ** -0.5 * a2 ** -0.25 * q ** 0.5 * lq
    return min(first, second)


def rhs_theorem1(q: int, A1: int, A2: int) -> float:
    _check_sizes(q, A1, A2)
    return min(_theorem1(q, A1, A2), _theorem1(q, A2, A1))


def rhs_theorem1_sizes(q: int, sizes) -> float:
    """Theorem 1 bound using the two largest subsets (both displayed terms decrease in A_1, A_2)."""
    if len(sizes) < 2:
        raise DomainError("the bound needs m >= 2 subsets")
    a1, a2 = sorted(sizes, reverse=True)[:2]
    return rhs_theorem1(q, a1, a2)


def _leading_k(q: int, k: int) -> float:
    return 3 * q ** (-k / (2 * (k + 1))) * (1 + math.factorial(k + 1) * q ** (-1 / 6) * math.log(q))


def rhs_theorem2(q: int, k: int, m: int, A1: int) -> float:
    if k < 2:
        raise DomainError("this form of the bound needs k >= 2")
    if m < 1:
        raise DomainError("m must be >= 1")
    _check_sizes(q, A1)
    double_fact = int(sympy.factorial2(2 * k + 1))
    second = (3 * A1 ** (-1 / (2 * k + 3)) * q ** (-(2 * k - 1) / (2 * (2 * k + 3)))
              * (1 + q ** (-2 / 7) * (7 ** k + math.sqrt(double_fact) * math.log(q))))
    return min(_leading_k(q, k), second) / (1 - 2 / q) ** k


def rhs_theorem2_k1(q: int, m: int, A1: int) -> float:
    if m < 1:
        raise DomainError("m must be >= 1")
    _check_sizes(q, A1)
    delta = 0 if m == 1 else 1
    return (2 * math.sqrt(3) * q ** -0.25 + 0.75 * delta / A1 * (2 + math.log(q))) * (1 + 2 * q ** -0.5)


def rhs_theorem2_k1_large(q: int, A1: int) -> float:
    _check_sizes(q, A1)
    if A1 ** 4 < q ** 3:
        raise DomainError(f"needs A_1 >= q^(3/4), got A_1={A1}, q={q}")
    return 3 * A1 ** -0.2 * q ** -0.1 * (1 + q ** -0.125 * math.log(q))


def rhs_theorem2_best(q: int, k: int, m: int, A1: int) -> float:
    """Smallest of the applicable Theorem 2 bounds for D_k."""
    if k >= 2:
        return rhs_theorem2(q, k, m, A1)
    candidates = [rhs_theorem2_k1(q, m, A1)]
    if A1 ** 4 >= q ** 3:
        candidates.append(rhs_theorem2_k1_large(q, A1))
    return min(candidates)


def rhs_theorem3(q: int, k: int) -> float:
    if k < 2:
        raise DomainError("D_k bound needs k >= 2")
    return _leading_k(q, k) / (1 - 2 / q) ** k


# ── moment theorems ─────────────────────────────────────────────────────────

def rhs_moment1(q: int, n: int, A) -> float:
    """Bound on |M^(n)(A_1, ..., A_m)|, minimised over the choice of (A_1, A_2)."""
    A = [int(a) for a in A]
    if len(A) < 2:
        raise DomainError("the bound needs m >= 2 subsets")
    if n < 1:
        raise DomainError("n must be >= 1")
    _check_sizes(q, *A)
    total = math.prod(A)
    best = math.inf
    for i, j in permutations(range(len(A)), 2):
        a1, a2 = A[i], A[j]
        rest = total // (a1 * a2)
        if n == 1:
            factor = q ** 0.5 * (1 + 1 / (2 * q))
        else:
            factor = min(
                (q + (n - 1) * a2 * q ** 0.5) ** 0.5,
                a2 ** 0.25 * (4 * q ** 2 + (n ** 3 + 3) * q ** 1.5) ** 0.25,
            )
        best = min(best, (a1 * a2) ** 0.5 * rest * factor)
    return best


def rhs_m2(q: int, n: int, k: int, A, delta: int, R_k1: int, R_k1k1: int) -> float:
    """Bound on |M^(n)_k(A_1, ..., A_m)|, minimised over which subset plays A_1."""
    A = [int(a) for a in A]
    if not A:
        raise DomainError("need m >= 1 subsets")
    if k < 1 or n < 1:
        raise DomainError("need k, n >= 1")
    if delta != (0 if len(A) == 1 else 1):
        raise DomainError(f"delta={delta} inconsistent with m={len(A)}")
    _check_sizes(q, *A)
    total = math.prod(A)
    root = q ** 0.5 + 1
    best = math.inf
    for i, a1 in enumerate(A):
        rest = total // a1
        inner = min(
            a1 * n ** k + delta * R_k1 * root,
            a1 ** 0.5 * q ** 0.25 * (n ** (2 * k + 1) + R_k1k1 * root) ** 0.5,
        )
        value = (k + 1) * total * q ** (k - 1 - n / 2) + rest * q ** (k / 2) * inner
        best = min(best, value)
    return best


def rhs_m3(q: int, n: int, k: int, R_k1: int) -> float:
    if k < 2:
        raise DomainError("M^(n)_k bound needs k >= 2")
    if n < 1:
        raise DomainError("n must be >= 1")
    return (k + 1) * q ** (k - 1 - n / 2) + q ** (k / 2) * (n ** k + R_k1 * (q ** 0.5 + 1))


# ── exponent functions ──────────────────────────────────────────────────────

def _is_exact(*values) -> bool:
    return all(isinstance(v, (int, Fraction, sympy.Rational)) and not isinstance(v, bool) for v in values)


def _ratio(exact: bool):
    if exact:
        return lambda a, b: sympy.Rational(a, b)
    return lambda a, b: a / b


def _check_unit(*values):
    for v in values:
        if not 0 <= v <= 1:
            raise DomainError(f"exponent argument {v} outside [0, 1]")


def f_exponent(x, y):
    """
    Decay exponent of D(A_1, ..., A_m) in terms of x = log_q A_1, y = log_q A_2.

    Symmetric; exact (sympy Rational) for rational inputs, float otherwise.
    """
    _check_unit(x, y)
    exact = _is_exact(x, y)
    R = _ratio(exact)
    if exact:
        x, y = sympy.Rational(x), sympy.Rational(y)
    x, y = max(x, y), min(x, y)
    if x + y <= 1:
        return R(0, 1)
    if x + 3 * y <= 2:
        return R(1, 2) * x + R(1, 2) * y - R(1, 2)
    if 2 * x + 3 * y <= 4:
        return R(1, 3) * x - R(1, 6)
    if 2 * x + y <= R(8, 3):
        return R(1, 2) * x + R(1, 4) * y - R(1, 2)
    return R(2, 7) * x + R(1, 7) * y - R(3, 14)


def g_exponent(k: int, m: int, x):
    """Decay exponent of D_k(A_1, ..., A_m) in terms of x = log_q A_1."""
    if k < 1 or m < 1:
        raise DomainError("need k, m >= 1")
    _check_unit(x)
    exact = _is_exact(x)
    R = _ratio(exact)
    if exact:
        x = sympy.Rational(x)
    if k == 1 and m > 1:
        if x <= R(1, 4):
            return x
        if x <= R(3, 4):
            return R(1, 4)
        return R(1, 5) * x + R(1, 10)
    if x <= R(2 * k + 1, 2 * k + 2):
        return R(k, 2 * (k + 1))
    return R(1, 2 * k + 3) * x + R(2 * k - 1, 2 * (2 * k + 3))


def empirical_exponent(q: int, D: float) -> float:
    """log_q(1/D): the exponent the measured discrepancy actually achieves."""
    if D <= 0:
        raise DomainError("discrepancy must be positive")
    return math.log(1 / D) / math.log(q)


def size_exponent(q: int, size: int) -> float:
    return math.log(size) / math.log(q)
