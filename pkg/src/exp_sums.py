"""
Gauss, Jacobi and Kloosterman sums over F_q.

Every sum has a direct route (literal definition or exact convolution) and a
transform route; the transform route is the production path and the direct
route is its oracle. The fixed additive character is psi_1.

    G(psi, chi)          = sum_{a != 0} psi(a) chi(a)
    J(chi_1, ..., chi_m) = sum_{a_1 + ... + a_m = 1} chi_1(a_1) ... chi_m(a_m)
    Kl_n(a)              = sum_{a_1 ... a_n = a} psi(a_1 + ... + a_n)
    G(chi)^n             = sum_{a != 0} Kl_n(a) chi(a)
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .characters import (
    MulChar,
    chi_on_codes,
    chi_on_units,
    psi_on_units,
    tolerance,
    unit_roots,
)
from .dft_engine import (
    check_kloosterman_cap,
    cyclic_convolve_direct,
    dft,
    idft,
    naive_idft,
)
from .errors import (
    PrecisionCapExceeded,
    ProductTrivial,
    TrivialCharacter,
    TrivialTwist,
    ZeroArgument,
)
from .finite_field import ZERO, FieldElem, FieldTable

logger = logging.getLogger(__name__)

JACOBI_LITERAL_MAX_Q = 64


def _index(c) -> int:
    return c.j if isinstance(c, MulChar) else int(c)


def _ordered_sum(terms: np.ndarray, compensated: bool = False) -> complex:
    """Sum in ascending index order (or with fsum per component)."""
    if len(terms) == 0:
        return 0j
    if compensated:
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    return complex(np.cumsum(terms)[-1])


# ── Gauss sums ──────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class GaussTable:
    field: FieldTable
    psi_b: FieldElem
    values: np.ndarray  # values[j] = G(psi_b, chi_j)

    def __getitem__(self, j) -> complex:
        return complex(self.values[_index(j) % self.field.order])

    def normalized(self) -> np.ndarray:
        """G(chi_j) / sqrt(q); unit modulus for j != 0."""
        return self.values / math.sqrt(self.field.q)


def gauss_sum_naive(field: FieldTable, b: FieldElem, j, compensated: bool = False) -> complex:
    terms = psi_on_units(field, b) * chi_on_units(field, _index(j))
    return _ordered_sum(terms, compensated)


def gauss_all(field: FieldTable, b: FieldElem = 0) -> GaussTable:
    """All G(psi_b, chi_j) at once: one length-(q-1) transform of k -> psi_b(g^k)."""
    seq = psi_on_units(field, b)
    values = idft(seq) * field.order
    values.setflags(write=False)
    logger.debug("Gauss table for q=%d built", field.q)
    return GaussTable(field=field, psi_b=b, values=values)


def gauss_sum_twisted(gtable: GaussTable, b: FieldElem, j) -> complex:
    """G(psi_b, chi) = conj(chi(b)) G(psi_1, chi), read from a psi_1 table."""
    if b == ZERO:
        raise ZeroArgument("psi_0 is the trivial additive character")
    field = gtable.field
    if gtable.psi_b != 0:
        raise ValueError("twisting needs the psi_1 table")
    jj = _index(j) % field.order
    return complex(np.conj(unit_roots(field.order)[(jj * b) % field.order]) * gtable.values[jj])


def gauss_sequence(gtable: GaussTable) -> np.ndarray:
    """The normalized family q^(-1/2) G(psi, chi) over psi in Psi, chi in X."""
    field = gtable.field
    m = field.order
    j = np.arange(1, m, dtype=np.int64)
    b = np.arange(m, dtype=np.int64)
    twist = np.conj(unit_roots(m)[np.outer(b, j) % m])
    return (twist * gtable.normalized()[1:]).ravel()


# ── Jacobi sums ─────────────────────────────────────────────────────────────

def _additive_transform(field: FieldTable, vec: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Fourier transform on the additive group (Z/p)^r, codes as digit tuples."""
    shape = (field.p,) * field.r
    # code = sum c_i p^i, so the last reshaped axis is c_0
    arr = vec.reshape(shape)
    step = idft if inverse else dft
    for axis in range(field.r):
        arr = step(arr, axis=axis)
    return arr.reshape(field.q)


def jacobi_direct(field: FieldTable, chars) -> complex:
    """J(chi_1, ..., chi_m) by additive convolution over F_q, read off at 1."""
    chars = list(chars)
    if len(chars) < 2:
        raise ValueError("Jacobi sums need m >= 2 characters")
    spectrum = np.ones(field.q, dtype=complex)
    for c in chars:
        spectrum = spectrum * _additive_transform(field, chi_on_codes(field, _index(c)))
    conv = _additive_transform(field, spectrum, inverse=True)
    return complex(conv[1])


def jacobi_literal(field: FieldTable, chars) -> complex:
    """Nested-sum evaluation of the definition; cross-check path for q <= 64."""
    chars = [_index(c) for c in chars]
    if len(chars) < 2:
        raise ValueError("Jacobi sums need m >= 2 characters")
    if field.q > JACOBI_LITERAL_MAX_Q:
        raise ValueError(f"literal Jacobi sums limited to q <= {JACOBI_LITERAL_MAX_Q}")
    m = field.order
    roots = unit_roots(m)
    one = 0
    total = 0j

    def walk(depth: int, partial: FieldElem, phase: int):
        nonlocal total
        if depth == len(chars) - 1:
            last = field.sub(one, partial)
            if last != ZERO:
                total += roots[(phase + chars[depth] * last) % m]
            return
        for a in field.units():
            walk(depth + 1, field.add(partial, a), (phase + chars[depth] * a) % m)

    walk(0, ZERO, 0)
    return total


def jacobi_via_gauss(gtable: GaussTable, chars) -> complex:
    """J = q^-1 G(chi_1) ... G(chi_m) conj(G(chi_1 ... chi_m))."""
    field = gtable.field
    idx = [_index(c) % field.order for c in chars]
    if len(idx) < 2:
        raise ValueError("Jacobi sums need m >= 2 characters")
    if any(j == 0 for j in idx):
        raise TrivialCharacter("the Gauss-sum formula needs nontrivial characters")
    total = sum(idx) % field.order
    if total == 0:
        raise ProductTrivial("chi_1 ... chi_m is trivial; use jacobi_direct")
    value = np.prod(gtable.values[idx]) * np.conj(gtable.values[total]) / field.q
    return complex(value)


# ── Kloosterman sums ────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class KloostermanTable:
    field: FieldTable
    n: int
    values: np.ndarray  # values[k] = Kl_n(g^k)

    def at(self, a: FieldElem) -> complex:
        if a == ZERO:
            raise ZeroArgument("Kl_n is defined on F_q^x")
        return complex(self.values[a % self.field.order])


def kloosterman_direct_all(field: FieldTable, n: int) -> np.ndarray:
    """Kl_n on all of F_q^x by iterated exact multiplicative convolution."""
    if n < 1:
        raise ValueError("n must be >= 1")
    psi = psi_on_units(field)
    kl = psi.copy()
    for _ in range(n - 1):
        kl = cyclic_convolve_direct(kl, psi)
    return kl


def kloosterman_direct(field: FieldTable, n: int, a: FieldElem) -> complex:
    if a == ZERO:
        raise ZeroArgument("Kl_n is defined on F_q^x")
    return complex(kloosterman_direct_all(field, n)[a % field.order])


def kloosterman_all(gtable: GaussTable, n: int) -> KloostermanTable:
    """Kl_n(a) = (q-1)^-1 sum_chi G(chi)^n conj(chi(a)), one transform."""
    field = gtable.field
    if n < 1:
        raise ValueError("n must be >= 1")
    check_kloosterman_cap(field.q, n)
    values = dft(gtable.values ** n) / field.order
    values.setflags(write=False)
    return KloostermanTable(field=field, n=n, values=values)


def kloosterman_table(gtable: GaussTable, n: int) -> KloostermanTable:
    """Transform route inside the precision cap, exact convolution outside it."""
    try:
        return kloosterman_all(gtable, n)
    except PrecisionCapExceeded as e:
        logger.warning("Falling back to exact convolution: %s", e)
        values = kloosterman_direct_all(gtable.field, n)
        return KloostermanTable(field=gtable.field, n=n, values=values)


def fourier_identity_residual(ktable: KloostermanTable, gtable: GaussTable) -> float:
    """max_chi |sum_a Kl_n(a) chi(a) - G(chi)^n|, evaluated with the naive transform."""
    m = ktable.field.order
    lhs = naive_idft(ktable.values) * m
    return float(np.max(np.abs(lhs - gtable.values ** ktable.n)))


def kl_moment_sum(ktable: KloostermanTable, k: int, l: int, twist=None) -> complex:
    """sum_a chi(a) Kl_n(a)^k conj(Kl_n(a))^l in ascending log order."""
    if k < 0 or l < 0 or k + l < 1:
        raise ValueError("need k, l >= 0 and k + l >= 1")
    kl = ktable.values
    terms = kl ** k * np.conj(kl) ** l
    if twist is not None:
        j = _index(twist) % ktable.field.order
        if j == 0:
            raise TrivialTwist("the twisted moment needs a nontrivial character")
        terms = terms * chi_on_units(ktable.field, j)
    return _ordered_sum(terms)


def kl_twisted_moments(ktable: KloostermanTable, k: int, l: int) -> np.ndarray:
    """sum_a chi_j(a) Kl_n(a)^k conj(Kl_n(a))^l for every j, in one transform."""
    if k < 0 or l < 0 or k + l < 1:
        raise ValueError("need k, l >= 0 and k + l >= 1")
    kl = ktable.values
    return idft(kl ** k * np.conj(kl) ** l) * ktable.field.order


def lemma_kl_rhs(q: int, n: int, k: int, l: int, twisted: bool, R: int) -> float:
    """Right-hand sides of the Kloosterman moment bounds."""
    if k < 0 or l < 0 or k + l < 1:
        raise ValueError("need k, l >= 0 and k + l >= 1")
    if R < 0:
        raise ValueError("R must be >= 0")
    # floor(n^(k+l-1) - R/n) in exact integer arithmetic
    floor_term = n ** (k + l - 1) + (-R // n)
    half = (n - 1) * (k + l)
    if twisted:
        return floor_term * q ** ((half + 1) / 2)
    return R * q ** ((half + 2) / 2) + (floor_term + R) * q ** ((half + 1) / 2)


def kl_tolerance(field: FieldTable, n: int) -> float:
    """Absolute slack for comparisons involving Kl_n values."""
    return tolerance(field.order, n * field.q ** ((n - 1) / 2))
