"""
Table-driven arithmetic for the finite field F_q, q = p^r.

Elements are kept in discrete-log form: an integer e in {0, ..., q-2} stands
for g^e and ZERO (-1) for the zero element. Multiplication, inversion and
powers are exponent arithmetic mod q-1; addition goes through the Zech table.

Field elements also have a "code": the integer sum(c_i * p^i) of their
coefficient vector over F_p in the basis 1, x, ..., x^(r-1). Codes are how
elements enter and leave the package (for r = 1 the code is the residue).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy

from .errors import (
    FieldDivisionByZero,
    FieldTooLarge,
    FieldTooSmall,
    NotPrime,
    SearchExhausted,
)

logger = logging.getLogger(__name__)

ZERO = -1

FIELD_LIMITS = {
    "min_order": 3,
    "max_order": 2 ** 24,
}

# discrete-log exponent, or ZERO
FieldElem = int


@dataclass(frozen=True)
class PrimePower:
    p: int
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"extension degree must be >= 1, got {self.r}")
        if not sympy.isprime(self.p):
            raise NotPrime(f"{self.p} is not prime")

    @property
    def q(self) -> int:
        return self.p ** self.r


def split_prime_power(q: int) -> PrimePower:
    """Recover (p, r) from a prime power q."""
    if q < 2:
        raise NotPrime(f"{q} is not a prime power")
    factors = sympy.factorint(q)
    if len(factors) != 1:
        raise NotPrime(f"{q} is not a prime power")
    (p, r), = factors.items()
    return PrimePower(int(p), int(r))


# ── F_p-linear algebra on coefficient vectors ───────────────────────────────

def _digits(code: int, p: int, r: int) -> np.ndarray:
    out = np.zeros(r, dtype=np.int64)
    for i in range(r):
        code, out[i] = divmod(code, p)
    return out


def _companion(modulus: tuple, p: int) -> np.ndarray:
    """Matrix of v -> x*v modulo the monic modulus (coefficients low to high)."""
    r = len(modulus) - 1
    c = np.zeros((r, r), dtype=np.int64)
    for i in range(1, r):
        c[i, i - 1] = 1
    for i in range(r):
        c[i, r - 1] = (c[i, r - 1] - modulus[i]) % p
    return c


def _mult_matrix(coeffs: np.ndarray, companion: np.ndarray, p: int) -> np.ndarray:
    """Matrix of v -> a*v for the element a with the given coefficients."""
    r = len(coeffs)
    m = np.zeros((r, r), dtype=np.int64)
    col = coeffs % p
    for i in range(r):
        m[:, i] = col
        col = (companion @ col) % p
    return m


def _matpow(m: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.eye(m.shape[0], dtype=np.int64)
    base = m % p
    while e:
        if e & 1:
            result = (result @ base) % p
        base = (base @ base) % p
        e >>= 1
    return result


def _find_modulus(p: int, r: int) -> tuple:
    """Lexicographically smallest monic irreducible polynomial of degree r."""
    if r == 1:
        return (0, 1)
    x = sympy.Symbol("x")
    for low in range(p ** r):
        coeffs = tuple(int(c) for c in _digits(low, p, r)) + (1,)
        if coeffs[0] == 0:
            continue
        poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
        if poly.is_irreducible:
            return coeffs
    raise SearchExhausted(f"no irreducible polynomial of degree {r} over F_{p}")


def _find_generator(p: int, r: int, companion: np.ndarray) -> tuple:
    """Smallest code whose element generates F_q^x, with its multiplication matrix."""
    q = p ** r
    order = q - 1
    cofactors = [order // int(ell) for ell in sympy.primefactors(order)]
    one = np.zeros(r, dtype=np.int64)
    one[0] = 1
    for code in range(2, q):
        m = _mult_matrix(_digits(code, p, r), companion, p)
        if all(not np.array_equal(_matpow(m, e, p)[:, 0], one) for e in cofactors):
            return code, m
    raise SearchExhausted(f"no generator found for F_{q}")


# ── tables ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class FieldTable:
    """Immutable arithmetic tables for F_q; safe to share between threads."""

    pp: PrimePower
    modulus: tuple
    generator: int
    exp_table: np.ndarray    # exponent -> code
    log_table: np.ndarray    # code -> exponent (ZERO for code 0)
    zech_table: np.ndarray   # k -> Z(k), ZERO when 1 + g^k = 0
    trace_table: np.ndarray  # code -> Tr(x) in {0, ..., p-1}

    @property
    def p(self) -> int:
        return self.pp.p

    @property
    def r(self) -> int:
        return self.pp.r

    @property
    def q(self) -> int:
        return self.pp.q

    @property
    def order(self) -> int:
        """Order q-1 of the cyclic group F_q^x."""
        return self.pp.q - 1

    def __repr__(self) -> str:
        return f"FieldTable(p={self.p}, r={self.r}, modulus={self.modulus}, generator={self.generator})"

    # conversions
    def element(self, code: int) -> FieldElem:
        if not 0 <= code < self.q:
            raise ValueError(f"code {code} outside 0..{self.q - 1}")
        return int(self.log_table[code])

    def code(self, x: FieldElem) -> int:
        return 0 if x == ZERO else int(self.exp_table[x % self.order])

    def from_int(self, v: int) -> FieldElem:
        """Image of the integer v in the prime subfield."""
        return self.element(v % self.p)

    def units(self) -> range:
        return range(self.order)

    def elements(self) -> list:
        return [ZERO, *self.units()]

    @property
    def minus_one(self) -> FieldElem:
        return 0 if self.p == 2 else self.order // 2

    # arithmetic
    def mul(self, x: FieldElem, y: FieldElem) -> FieldElem:
        if x == ZERO or y == ZERO:
            return ZERO
        return (x + y) % self.order

    def inv(self, x: FieldElem) -> FieldElem:
        if x == ZERO:
            raise FieldDivisionByZero("zero has no inverse")
        return (-x) % self.order

    def pow(self, x: FieldElem, n: int) -> FieldElem:
        if x == ZERO:
            if n > 0:
                return ZERO
            if n == 0:
                return 0
            raise FieldDivisionByZero("negative power of zero")
        return (x * n) % self.order

    def neg(self, x: FieldElem) -> FieldElem:
        if x == ZERO:
            return ZERO
        return (x + self.minus_one) % self.order

    def add(self, x: FieldElem, y: FieldElem) -> FieldElem:
        if x == ZERO:
            return y
        if y == ZERO:
            return x
        z = int(self.zech_table[(y - x) % self.order])
        if z == ZERO:
            return ZERO
        return (x + z) % self.order

    def sub(self, x: FieldElem, y: FieldElem) -> FieldElem:
        return self.add(x, self.neg(y))

    def trace(self, x: FieldElem) -> int:
        return int(self.trace_table[self.code(x)])

    def unit_traces(self) -> np.ndarray:
        """Tr(g^k) for k = 0, ..., q-2."""
        return self.trace_table[self.exp_table]


@lru_cache(maxsize=32)
def build_field(p: int, r: int = 1) -> FieldTable:
    """
    Build the arithmetic tables of F_{p^r}.

    Deterministic: the modulus is the lexicographically smallest monic
    irreducible polynomial and the generator the smallest code of order q-1.
    """
    pp = PrimePower(p, r)
    q = pp.q
    if q < FIELD_LIMITS["min_order"]:
        raise FieldTooSmall(f"F_{q} has no nontrivial multiplicative character")
    if q > FIELD_LIMITS["max_order"]:
        raise FieldTooLarge(f"q={q} exceeds the table cap {FIELD_LIMITS['max_order']}")

    modulus = _find_modulus(p, r)
    companion = _companion(modulus, p)
    generator, gen_matrix = _find_generator(p, r, companion)

    order = q - 1
    coeffs = np.zeros((order, r), dtype=np.int64)
    coeffs[0, 0] = 1
    length = 1
    step = gen_matrix
    while length < order:
        take = min(length, order - length)
        coeffs[length:length + take] = (coeffs[:take] @ step.T) % p
        step = (step @ step) % p
        length += take

    place = p ** np.arange(r, dtype=np.int64)
    exp_codes = coeffs @ place
    log_table = np.full(q, ZERO, dtype=np.int64)
    log_table[exp_codes] = np.arange(order, dtype=np.int64)

    low = exp_codes % p
    plus_one = exp_codes - low + (low + 1) % p
    zech_table = log_table[plus_one]

    # Tr(x^j) is the trace of the multiplication-by-x^j matrix
    basis_traces = np.array(
        [int(np.trace(_matpow(companion, j, p))) % p for j in range(r)], dtype=np.int64
    )
    all_codes = np.arange(q, dtype=np.int64)
    trace_table = np.zeros(q, dtype=np.int64)
    for j in range(r):
        trace_table += ((all_codes // place[j]) % p) * basis_traces[j]
    trace_table %= p

    for arr in (exp_codes, log_table, zech_table, trace_table):
        arr.setflags(write=False)

    logger.info("Built F_%d (p=%d, r=%d, generator code %d)", q, p, r, generator)
    return FieldTable(
        pp=pp,
        modulus=modulus,
        generator=generator,
        exp_table=exp_codes,
        log_table=log_table,
        zech_table=zech_table,
        trace_table=trace_table,
    )


def build_field_q(q: int) -> FieldTable:
    pp = split_prime_power(q)
    return build_field(pp.p, pp.r)
