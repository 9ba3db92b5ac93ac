"""
Additive and multiplicative characters of F_q.

Additive characters are psi_b(x) = exp(2 pi i Tr(bx) / p), b in F_q; the fixed
nontrivial character used downstream is psi_1. Multiplicative characters are
indexed by their discrete-log frequency j mod q-1:
chi_j(g^k) = exp(2 pi i jk / (q-1)). Products and conjugates are index
arithmetic; values come from precomputed root-of-unity tables.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EvalAtZero, SizeOutOfRange
from .finite_field import ZERO, FieldElem, FieldTable

logger = logging.getLogger(__name__)

# tolerance multiplier: tau = 64 * eps * terms * max|term|
TOLERANCE_FACTOR = 64.0


def tolerance(terms: int, magnitude: float = 1.0) -> float:
    return TOLERANCE_FACTOR * np.finfo(float).eps * max(terms, 1) * magnitude


@lru_cache(maxsize=128)
def unit_roots(m: int) -> np.ndarray:
    """exp(2 pi i k / m) for k = 0, ..., m-1 (read-only)."""
    roots = np.exp(2j * np.pi * np.arange(m) / m)
    roots.setflags(write=False)
    return roots


@dataclass(frozen=True)
class AddChar:
    b: FieldElem

    @property
    def is_trivial(self) -> bool:
        return self.b == ZERO


@dataclass(frozen=True)
class MulChar:
    j: int
    modulus: int  # q - 1

    def __post_init__(self):
        object.__setattr__(self, "j", self.j % self.modulus)

    @property
    def is_trivial(self) -> bool:
        return self.j == 0

    def __mul__(self, other: "MulChar") -> "MulChar":
        if other.modulus != self.modulus:
            raise ValueError("characters of different groups")
        return MulChar(self.j + other.j, self.modulus)

    def conj(self) -> "MulChar":
        return MulChar(-self.j, self.modulus)


@dataclass(frozen=True)
class CharSubset:
    """A set of nontrivial multiplicative characters, stored as sorted indices."""

    indices: tuple
    modulus: int

    def __post_init__(self):
        idx = tuple(sorted({int(j) for j in self.indices}))
        if any(j <= 0 or j >= self.modulus for j in idx):
            raise SizeOutOfRange(f"subset indices must lie in 1..{self.modulus - 1}")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def indicator(self) -> np.ndarray:
        v = np.zeros(self.modulus)
        v[list(self.indices)] = 1.0
        return v

    @classmethod
    def full(cls, field: FieldTable) -> "CharSubset":
        return cls(tuple(range(1, field.order)), field.order)


# ── evaluation ──────────────────────────────────────────────────────────────

def add_char_eval(field: FieldTable, b: FieldElem, x: FieldElem) -> complex:
    t = field.trace(field.mul(b, x))
    return complex(unit_roots(field.p)[t])


def mul_char_eval(field: FieldTable, j: int, x: FieldElem) -> complex:
    if x == ZERO:
        raise EvalAtZero("multiplicative characters are defined on F_q^x only")
    m = field.order
    return complex(unit_roots(m)[(j * x) % m])


def psi_on_units(field: FieldTable, b: FieldElem = 0) -> np.ndarray:
    """psi_b(g^k) for k = 0, ..., q-2."""
    if b == ZERO:
        return np.ones(field.order, dtype=complex)
    shifted = (np.arange(field.order, dtype=np.int64) + b) % field.order
    return unit_roots(field.p)[field.trace_table[field.exp_table[shifted]]]


def psi_on_codes(field: FieldTable, b: FieldElem = 0) -> np.ndarray:
    """psi_b(x) for every element x, indexed by code."""
    out = np.ones(field.q, dtype=complex)
    if b != ZERO:
        out[field.exp_table] = psi_on_units(field, b)
    return out


def chi_on_units(field: FieldTable, j: int) -> np.ndarray:
    """chi_j(g^k) for k = 0, ..., q-2."""
    m = field.order
    k = np.arange(m, dtype=np.int64)
    return unit_roots(m)[(j % m) * k % m]


def chi_on_codes(field: FieldTable, j: int) -> np.ndarray:
    """chi_j extended by 0 at 0, indexed by code."""
    out = np.zeros(field.q, dtype=complex)
    out[field.exp_table] = chi_on_units(field, j)
    return out


# ── enumeration ─────────────────────────────────────────────────────────────

def enumerate_X(field: FieldTable) -> list:
    return [MulChar(j, field.order) for j in range(1, field.order)]


def enumerate_Xbar(field: FieldTable) -> list:
    return [MulChar(j, field.order) for j in range(field.order)]


def enumerate_Psi(field: FieldTable) -> list:
    return [AddChar(b) for b in field.units()]


def random_subset(field: FieldTable, size: int, seed) -> CharSubset:
    """
    Uniform sample of `size` nontrivial characters without replacement.

    Uses numpy's PCG64 bit generator seeded with `seed` (an int or a sequence
    of ints), so the same (q, size, seed) always yields the same subset.
    """
    available = field.order - 1
    if not 1 <= size <= available:
        raise SizeOutOfRange(f"subset size {size} outside 1..{available}")
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = rng.choice(np.arange(1, field.order), size=size, replace=False)
    return CharSubset(tuple(int(j) for j in picked), field.order)
