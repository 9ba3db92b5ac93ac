"""
Invariant dimensions R^{k,l} = dim (V^{⊗l} ⊗ (V*)^{⊗k})^G for the monodromy
groups of the Kloosterman sheaf Kl_n in characteristic p.

Each count is a number of walks on partitions (King's rules for Sp and SO,
Littlewood-Richardson for SL, Littelmann's rule for G2), evaluated by a
forward dynamic programme over partition states in exact integers.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import sympy
from sympy.utilities.iterables import partitions

from .errors import CongruenceViolated, NotPrime, Unclassified

logger = logging.getLogger(__name__)


class GroupKind(Enum):
    MU_P = "mu"
    SP = "sp"
    SL = "sl"
    SO = "so"
    G2 = "g2"


@dataclass(frozen=True)
class GroupSpec:
    kind: GroupKind
    n: int
    p: int = 0  # only meaningful for MU_P

    @property
    def name(self) -> str:
        if self.kind is GroupKind.MU_P:
            return f"mu_{self.p}"
        if self.kind is GroupKind.G2:
            return "G2"
        prefix = {GroupKind.SP: "Sp", GroupKind.SL: "SL", GroupKind.SO: "SO"}[self.kind]
        return f"{prefix}_{self.n}"

    @property
    def self_dual(self) -> bool:
        return self.kind in (GroupKind.SP, GroupKind.SO, GroupKind.G2)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse names such as 'g2', 'sp4', 'so3', 'sl5', 'mu7'."""
        t = text.strip().lower().replace("_", "")
        if t == "g2":
            return cls(GroupKind.G2, 7)
        for kind in (GroupKind.MU_P, GroupKind.SP, GroupKind.SL, GroupKind.SO):
            if t.startswith(kind.value) and t[len(kind.value):].isdigit():
                value = int(t[len(kind.value):])
                spec = cls(kind, 1, value) if kind is GroupKind.MU_P else cls(kind, value)
                spec.validate()
                return spec
        raise Unclassified(f"unknown group {text!r}")

    def validate(self):
        if self.kind is GroupKind.MU_P and not sympy.isprime(self.p):
            raise NotPrime(f"mu_p needs p prime, got {self.p}")
        if self.kind is GroupKind.SP and (self.n < 2 or self.n % 2):
            raise Unclassified(f"Sp_n needs n even >= 2, got {self.n}")
        if self.kind in (GroupKind.SO, GroupKind.SL) and (self.n < 3 or self.n % 2 == 0):
            raise Unclassified(f"{self.kind.name}_n needs n odd >= 3, got {self.n}")


@dataclass(frozen=True)
class RQuery:
    group: GroupSpec
    k: int
    l: int

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError("k and l must be >= 0")


@dataclass(frozen=True)
class Partition:
    parts: tuple

    def __post_init__(self):
        parts = tuple(int(x) for x in self.parts)
        if any(a < b for a, b in zip(parts, parts[1:])) or (parts and parts[-1] < 0):
            raise ValueError(f"{parts} is not a partition")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def rows(self) -> int:
        return len(self.parts)

    def column(self, j: int) -> int:
        """Length of column j (0-based)."""
        return sum(1 for part in self.parts if part > j)

    def syt_count(self) -> int:
        """Standard Young tableaux of this shape, by the hook length formula."""
        hooks = 1
        for i, part in enumerate(self.parts):
            for j in range(part):
                hooks *= (part - j - 1) + (self.column(j) - i - 1) + 1
        return math.factorial(self.size) // hooks


def group_for(p: int, n: int) -> GroupSpec:
    """Monodromy group of Kl_n in characteristic p."""
    if not sympy.isprime(p):
        raise NotPrime(f"{p} is not prime")
    if n < 1:
        raise Unclassified(f"no group for n={n}")
    if n == 1:
        return GroupSpec(GroupKind.MU_P, 1, p)
    if n % 2 == 0:
        return GroupSpec(GroupKind.SP, n)
    if p == 2:
        return GroupSpec(GroupKind.G2, 7) if n == 7 else GroupSpec(GroupKind.SO, n)
    if n % p == 0:
        logger.warning("SL_%d assigned with p=%d dividing n", n, p)
    return GroupSpec(GroupKind.SL, n)


# ── walk engine ─────────────────────────────────────────────────────────────

def _walk(layer: dict, steps: int, moves, keep) -> dict:
    """Advance a {state: count} layer by `steps` moves, dropping states keep() rejects."""
    for i in range(steps):
        remaining = steps - i - 1
        nxt = defaultdict(int)
        for state, count in layer.items():
            for succ in moves(state):
                if keep(succ, remaining):
                    nxt[succ] += count
        layer = nxt
    return layer


def _expansions(lam: tuple):
    for j in range(len(lam)):
        if j == 0 or lam[j - 1] > lam[j]:
            yield lam[:j] + (lam[j] + 1,) + lam[j + 1:]


def _contractions(lam: tuple):
    last = len(lam) - 1
    for j in range(len(lam)):
        if lam[j] > 0 and (j == last or lam[j] > lam[j + 1]):
            yield lam[:j] + (lam[j] - 1,) + lam[j + 1:]


def _sigma_star_expansions(lam: tuple):
    """Add one to every row but row j, staying a partition."""
    last = len(lam) - 1
    for j in range(len(lam)):
        if j == last or lam[j] > lam[j + 1]:
            yield tuple(x if i == j else x + 1 for i, x in enumerate(lam))


def _king_moves(lam: tuple):
    yield from _expansions(lam)
    yield from _contractions(lam)


def _distance(lam: tuple, target: tuple) -> int:
    return sum(abs(a - b) for a, b in zip(lam, target))


# ── rules ───────────────────────────────────────────────────────────────────

def r_mu(p: int, k: int, l: int) -> int:
    return 1 if (k - l) % p == 0 else 0


@lru_cache(maxsize=None)
def r_sp(n: int, k: int) -> int:
    """Walks of length k from the empty partition back to it, at most n/2 rows."""
    if n < 2 or n % 2:
        raise Unclassified(f"Sp_n needs n even >= 2, got {n}")
    if k % 2:
        return 0
    empty = (0,) * (n // 2)
    layer = _walk({empty: 1}, k, _king_moves, lambda lam, rest: sum(lam) <= rest)
    return layer.get(empty, 0)


@lru_cache(maxsize=None)
def r_so(n: int, k: int) -> int:
    """Walks of length k with col_1 + col_2 <= n, ending at (1^n) for odd k."""
    if n < 3 or n % 2 == 0:
        raise Unclassified(f"SO_n needs n odd >= 3, got {n}")
    empty = (0,) * n
    target = (1,) * n if k % 2 else empty

    def keep(lam, rest):
        two_columns = sum(1 for x in lam if x > 0) + sum(1 for x in lam if x > 1)
        return two_columns <= n and _distance(lam, target) <= rest

    if not keep(empty, k):
        return 0
    return _walk({empty: 1}, k, _king_moves, keep).get(target, 0)


@lru_cache(maxsize=None)
def r_sl(n: int, k: int, l: int) -> int:
    """k sigma*-expansions then l sigma-expansions from empty to the n-row rectangle."""
    if n < 3 or n % 2 == 0:
        raise Unclassified(f"SL_n needs n odd >= 3, got {n}")
    if (k - l) % n:
        return 0
    width = (k * (n - 1) + l) // n
    empty = (0,) * n

    def keep(lam, rest):
        return lam[0] <= width

    layer = _walk({empty: 1}, k, _sigma_star_expansions, keep)
    layer = _walk(layer, l, _expansions, keep)
    return layer.get((width,) * n, 0)


def r_sl_k1_hook(n: int, k: int) -> int:
    """R^{k,1} for SL_n as a tableau count on ((k-1)/n + 1, (k-1)/n, ..., (k-1)/n)."""
    if k % n != 1 % n:
        raise CongruenceViolated(f"needs k = 1 mod {n}, got k={k}")
    a = (k - 1) // n
    return Partition((a + 1,) + (a,) * (n - 1)).syt_count()


def r_sl_kk_syt(n: int, k: int) -> int:
    """R^{k,k} for SL_n as the sum of squared tableau counts over shapes with <= n rows."""
    total = 0
    for shape in partitions(k, m=n):
        parts = sorted((part for part, mult in shape.items() for _ in range(mult)), reverse=True)
        total += Partition(tuple(parts)).syt_count() ** 2
    return total


def _g2_moves(lam: tuple):
    a, b = lam
    yield a + 1, b
    if a > b:
        yield a, b + 1
        yield a - 1, b
        yield a, b  # stay
    if b > 0:
        yield a, b - 1
        yield a + 1, b - 1
    if a - b >= 2:
        yield a - 1, b + 1


@lru_cache(maxsize=None)
def r_g2(k: int) -> int:
    """Multiplicity of the trivial representation of G2 in V^{⊗k}."""
    layer = _walk({(0, 0): 1}, k, _g2_moves, lambda lam, rest: lam[0] + lam[1] <= rest)
    return layer.get((0, 0), 0)


def g2_decomposition(k: int, start: tuple = (0, 0)) -> dict:
    """Multiplicities m_{lambda'} in V_start ⊗ V^{⊗k}, keyed by (lambda_1, lambda_2)."""
    a, b = start
    if not a >= b >= 0:
        raise ValueError(f"{start} is not a two-row partition")
    layer = _walk({(a, b): 1}, k, _g2_moves, lambda lam, rest: True)
    return {lam: c for lam, c in sorted(layer.items()) if c}


@lru_cache(maxsize=None)
def g2_recursive_bound(k: int) -> int:
    """R^k <= (k-1)R^{k-2} + C(k-1,2)R^{k-3} + C(k-1,3)R^{k-4}, seeded with exact small values."""
    if k < 4:
        return (1, 0, 1, 1)[k]
    return ((k - 1) * g2_recursive_bound(k - 2)
            + math.comb(k - 1, 2) * g2_recursive_bound(k - 3)
            + math.comb(k - 1, 3) * g2_recursive_bound(k - 4))


def r_lookup(query: RQuery) -> int:
    group, k, l = query.group, query.k, query.l
    if group.kind is GroupKind.MU_P:
        return r_mu(group.p, k, l)
    if group.kind is GroupKind.SP:
        return r_sp(group.n, k + l)
    if group.kind is GroupKind.SO:
        return r_so(group.n, k + l)
    if group.kind is GroupKind.G2:
        return r_g2(k + l)
    return r_sl(group.n, k, l)


def _double_factorial(n: int) -> int:
    return 1 if n <= 0 else int(sympy.factorial2(n))


def r_bounds(query: RQuery) -> int:
    """Smallest of the known upper bounds on R^{k,l}, in exact integers."""
    group, k, l = query.group, query.k, query.l
    w = k + l
    if w == 0:
        return 1
    candidates = [math.factorial(w)]
    if k == l and group.kind is not GroupKind.G2:
        candidates.append(_double_factorial(2 * k - 1))
    if group.kind is GroupKind.MU_P:
        candidates.append(1)
    elif group.kind is GroupKind.SP:
        candidates.append(0 if w % 2 else _double_factorial(w - 1))
    elif group.kind is GroupKind.SO:
        if w % 2 == 0:
            candidates.append(_double_factorial(w - 1))
        elif w < group.n:
            candidates.append(0)
        else:
            candidates.append(math.comb(w, group.n) * _double_factorial(w - group.n - 1))
    elif group.kind is GroupKind.G2:
        candidates.append(sympy.integer_nthroot(math.factorial(w) ** 3, 4)[0])
        candidates.append(g2_recursive_bound(w))
        if w >= 4:
            candidates.append(12 * 7 ** (w - 4))
    else:
        if (k - l) % group.n:
            candidates.append(0)
        else:
            candidates.append(math.factorial(w // 2) * math.factorial((w - 1) // 2))
            if k == l:
                candidates.append(math.factorial(k))
    return int(min(candidates))


def r_constants(p: int, n: int, k: int) -> tuple:
    """(R^{k,1}, R^{k+1,k+1}) for the group of Kl_n in characteristic p."""
    group = group_for(p, n)
    return r_lookup(RQuery(group, k, 1)), r_lookup(RQuery(group, k + 1, k + 1))
