"""
Exact discrepancy of finite point multisets on the unit circle, and the
normalized Jacobi-sum families whose discrepancy we measure.

    D = sup_{a <= b <= a+1} | T(a, b) / N - (b - a) |,   D = 1 for N = 0,

where T(a, b) counts points (with multiplicity) whose angle lies in the closed
arc [a, b]. Points are stored as angles in [0, 1) with multiplicities.

Write theta_0 < ... < theta_{s-1} for the occupied angles, C_j for the number
of points up to and including theta_j, A_j = C_j/N - theta_j and
B_i = C_{i-1}/N - theta_i. The closed arc running forward from theta_i to
theta_j has deviation A_j - B_i whether or not it wraps, and every open arc
is the complement of a closed one with the same deviation. Hence
D = max_j A_j - min_i B_i.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .characters import CharSubset
from .errors import NotOnCircle, TupleBudgetExceeded
from .exp_sums import GaussTable, gauss_all
from .finite_field import FieldTable

logger = logging.getLogger(__name__)

DISCREPANCY_SETTINGS = {
    "circle_tolerance": 1e-6,
    "merge_threshold": 2.0 ** -40,
    "endpoint_slack": 2.0 ** -45,
    "max_tuples": 10 ** 8,
    "chunk_elements": 2 ** 22,
}


@dataclass(frozen=True, eq=False)
class CirclePoints:
    angles: np.ndarray          # strictly increasing, in [0, 1)
    multiplicities: np.ndarray  # positive integers

    @property
    def N(self) -> int:
        return int(self.multiplicities.sum())

    def __len__(self) -> int:
        return len(self.angles)

    def rotated(self, offset: float) -> "CirclePoints":
        return points_from_angles(np.repeat((self.angles + offset) % 1.0, self.multiplicities))


@dataclass(frozen=True)
class Arc:
    a: float
    b: float
    closed: bool
    count: int
    sign: int  # +1: over-populated arc, -1: under-populated arc

    def describe(self) -> str:
        left, right = ("[", "]") if self.closed else ("(", ")")
        return f"{left}{self.a:.12g}, {self.b:.12g}{right} containing {self.count}"


@dataclass(frozen=True)
class DiscrepancyResult:
    D: float
    witness: Optional[Arc]


EMPTY = CirclePoints(np.zeros(0), np.zeros(0, dtype=np.int64))


def points_from_angles(angles) -> CirclePoints:
    """Sort angles (mod 1) and merge near-duplicates into multiplicities."""
    theta = np.sort(np.asarray(angles, dtype=float) % 1.0)
    theta[theta >= 1.0] = 0.0
    theta.sort()
    if theta.size == 0:
        return EMPTY
    threshold = DISCREPANCY_SETTINGS["merge_threshold"]
    starts = np.concatenate(([True], np.diff(theta) > threshold))
    ids = np.cumsum(starts) - 1
    uniq = theta[starts]
    mult = np.bincount(ids).astype(np.int64)
    if len(uniq) > 1 and 1.0 - uniq[-1] + uniq[0] <= threshold:
        mult[0] += mult[-1]
        uniq, mult = uniq[:-1], mult[:-1]
    return CirclePoints(uniq, mult)


def normalize_points(values) -> CirclePoints:
    """Project unit-modulus complex values to angles in [0, 1)."""
    z = np.asarray(values, dtype=complex).ravel()
    if z.size == 0:
        return EMPTY
    return points_from_angles(_chunk_angles(z))


def arc_deviation(pts: CirclePoints, arc: Arc) -> float:
    """|T/N - (b - a)| for the given arc, counting membership from scratch."""
    n = pts.N
    if n == 0:
        return 1.0
    length = arc.b - arc.a
    slack = DISCREPANCY_SETTINGS["endpoint_slack"]
    if arc.closed and length >= 1.0:
        inside = np.ones(len(pts), dtype=bool)
    else:
        rel = (pts.angles - arc.a) % 1.0
        rel[rel > 1.0 - slack] = 0.0
        if arc.closed:
            inside = rel <= length + slack
        else:
            inside = (rel > slack) & (rel < length - slack)
    count = int(pts.multiplicities[inside].sum())
    return abs(count / n - length)


def _linear(pts: CirclePoints) -> DiscrepancyResult:
    theta, mult, n = pts.angles, pts.multiplicities, pts.N
    upto = np.cumsum(mult)
    before = upto - mult
    a_vals = upto / n - theta
    b_vals = before / n - theta
    j, i = int(np.argmax(a_vals)), int(np.argmin(b_vals))
    if j >= i:
        lo, hi, count = theta[i], theta[j], int(upto[j] - before[i])
    else:
        lo, hi, count = theta[i], theta[j] + 1.0, int(n - before[i] + upto[j])
    d = count / n - (hi - lo)
    return DiscrepancyResult(d, Arc(float(lo), float(hi), True, count, 1))


def _pairs(pts: CirclePoints) -> DiscrepancyResult:
    """Enumerate every closed run of occupied angles and every open gap arc."""
    theta, mult, n = pts.angles, pts.multiplicities, pts.N
    s = len(theta)
    theta2 = np.concatenate((theta, theta + 1.0))
    prefix = np.concatenate(([0], np.cumsum(np.concatenate((mult, mult)))))
    best, witness = -1.0, None
    steps = np.arange(s)
    for i in range(s):
        counts = prefix[i + steps + 1] - prefix[i]
        lengths = theta2[i + steps] - theta2[i]
        dev = counts / n - lengths
        t = int(np.argmax(dev))
        if dev[t] > best:
            best = float(dev[t])
            witness = Arc(float(theta2[i]), float(theta2[i + t]), True, int(counts[t]), 1)
        ahead = steps + 1
        inner = prefix[i + ahead] - prefix[i + 1]
        lengths = theta2[i + ahead] - theta2[i]
        dev = lengths - inner / n
        t = int(np.argmax(dev))
        if dev[t] > best:
            best = float(dev[t])
            witness = Arc(float(theta2[i]), float(theta2[i + ahead[t]]), False, int(inner[t]), -1)
    return DiscrepancyResult(best, witness)


def discrepancy_exact(pts: CirclePoints, method: str = "linear") -> DiscrepancyResult:
    """
    Exact circle discrepancy with a witness arc.

    method="linear" is the O(s) extremal formula, method="pairs" the O(s^2)
    enumeration of candidate arcs; the two agree up to rounding.
    """
    if pts.N == 0:
        return DiscrepancyResult(1.0, None)
    if method == "linear":
        return _linear(pts)
    if method == "pairs":
        return _pairs(pts)
    raise ValueError(f"unknown method {method!r}")


def discrepancy_grid(pts: CirclePoints, bits: int = 12, block: int = 256) -> float:
    """
    Brute-force oracle: every closed and open arc whose endpoints lie on the
    2^bits grid or on a sample angle. Differs from the exact value by at most
    two grid steps.
    """
    n = pts.N
    if n == 0:
        return 1.0
    cands = np.unique(np.concatenate((np.arange(2 ** bits) / 2 ** bits, pts.angles)))
    cum = np.concatenate(([0], np.cumsum(pts.multiplicities)))
    upto = cum[np.searchsorted(pts.angles, cands, side="right")]   # angle <= c
    below = cum[np.searchsorted(pts.angles, cands, side="left")]   # angle < c
    best = 0.0
    j = np.arange(len(cands))[None, :]
    for lo in range(0, len(cands), block):
        i = np.arange(lo, min(lo + block, len(cands)))[:, None]
        gap = cands[None, :] - cands[i]
        closed_len = np.where(j >= i, gap, 1.0 + gap)
        closed_cnt = np.where(j >= i, upto[j] - below[i], n - below[i] + upto[j])
        open_len = np.where(j > i, gap, 1.0 + gap)
        open_cnt = np.where(j > i, below[j] - upto[i], n - upto[i] + below[j])
        best = max(best, float(np.max(closed_cnt / n - closed_len)), float(np.max(open_len - open_cnt / n)))
    return best


# ── Jacobi-sum families ─────────────────────────────────────────────────────

def _slots(field: FieldTable, subsets, k_extra: int) -> list:
    subsets = list(subsets)
    if not subsets:
        raise ValueError("need at least one subset")
    if len(subsets) + k_extra < 2:
        raise ValueError("need m + k_extra >= 2")
    if any(len(s) == 0 for s in subsets):
        raise ValueError("subsets must be nonempty")
    full = np.arange(1, field.order, dtype=np.int64)
    return [np.asarray(s.indices, dtype=np.int64) for s in subsets] + [full] * k_extra


def iter_jacobi_chunks(
    field: FieldTable,
    subsets,
    k_extra: int = 0,
    gtable: Optional[GaussTable] = None,
    max_tuples: Optional[int] = None,
):
    """
    Yield q^(-(s-1)/2) J(chi_1, ..., chi_s) over all admissible tuples in chunks.

    The leading slots are iterated, the last two are evaluated as a grid of
    at most `chunk_elements` entries at a time; no tuple list is materialised.
    """
    slots = _slots(field, subsets, k_extra)
    budget = DISCREPANCY_SETTINGS["max_tuples"] if max_tuples is None else max_tuples
    total = math.prod(len(s) for s in slots)
    if total > budget:
        raise TupleBudgetExceeded(f"{total} tuples exceed the budget of {budget}")

    gtable = gtable or gauss_all(field)
    unit = gtable.normalized()
    m = field.order
    first, second = slots[-2], slots[-1]
    rows = max(1, DISCREPANCY_SETTINGS["chunk_elements"] // len(second))
    logger.debug("Jacobi family over F_%d: %d tuples", field.q, total)
    for prefix in itertools.product(*slots[:-2]):
        shift = sum(prefix) % m
        factor = np.prod(unit[list(prefix)]) if prefix else 1.0
        for lo in range(0, len(first), rows):
            block = first[lo:lo + rows]
            idx = (shift + block[:, None] + second[None, :]) % m
            keep = idx != 0
            grid = factor * unit[block][:, None] * unit[second][None, :] * np.conj(unit[idx])
            yield grid[keep]


def jacobi_sequence_values(field: FieldTable, subsets, k_extra: int = 0, **kwargs) -> np.ndarray:
    chunks = list(iter_jacobi_chunks(field, subsets, k_extra, **kwargs))
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=complex)


def _chunk_angles(z: np.ndarray) -> np.ndarray:
    worst = float(np.max(np.abs(np.abs(z) - 1.0))) if z.size else 0.0
    if worst > DISCREPANCY_SETTINGS["circle_tolerance"]:
        raise NotOnCircle(f"a value has modulus off the unit circle by {worst:.3g}")
    return np.angle(z) / (2 * math.pi)


def jacobi_sequence(field: FieldTable, subsets, k_extra: int = 0, **kwargs) -> CirclePoints:
    """The family as circle points; chunks are reduced to angles as they arrive."""
    angles = [_chunk_angles(z) for z in iter_jacobi_chunks(field, subsets, k_extra, **kwargs)]
    if not angles:
        return EMPTY
    return points_from_angles(np.concatenate(angles))


def full_subsets(field: FieldTable, m: int) -> list:
    return [CharSubset.full(field)] * m
