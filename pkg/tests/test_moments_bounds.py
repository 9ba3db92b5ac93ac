import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from src.characters import CharSubset, random_subset
from src.discrepancy import discrepancy_exact, full_subsets, jacobi_sequence, jacobi_sequence_values
from src.errors import DomainError, SizeOutOfRange
from src.moments_bounds import (
    BoundSpec,
    MomentSpec,
    empirical_exponent,
    erdos_turan_best,
    erdos_turan_bound,
    f_exponent,
    g_exponent,
    min_sequence_size,
    moments,
    moments_brute_force,
    power_sums,
    rhs_m2,
    rhs_m3,
    rhs_moment1,
    rhs_theorem1,
    rhs_theorem1_sizes,
    rhs_theorem2,
    rhs_theorem2_best,
    rhs_theorem2_k1,
    rhs_theorem2_k1_large,
    rhs_theorem3,
    sequence_size,
    trivial_moment_bound,
)

GRID = [i / 200 for i in range(201)]


# ── moments ─────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("m,k_extra", [(2, 0), (2, 1), (1, 1), (3, 0)])
def test_moments_match_brute_force_f7(f7, m, k_extra):
    spec = MomentSpec(f7, full_subsets(f7, m), k_extra, n_max=4)
    fast, brute = moments(spec), moments_brute_force(spec)
    N = sequence_size(f7, spec.subsets, k_extra)
    for a, b in zip(fast, brute):
        assert abs(a - b) <= 1e-8 * N
        assert abs(a) <= trivial_moment_bound(N) + 1e-9


def test_moments_on_random_subsets(f13):
    subsets = [random_subset(f13, 5, [7, 13, i]) for i in range(3)]
    spec = MomentSpec(f13, subsets, n_max=10)
    fast, brute = moments(spec, workers=2), moments_brute_force(spec)
    assert np.allclose(fast, brute, atol=1e-9 * 5 ** 3)


def test_first_moment_of_the_gauss_formula(f11):
    spec = MomentSpec(f11, full_subsets(f11, 2), n_max=1)
    z = jacobi_sequence_values(f11, spec.subsets)
    assert abs(moments(spec)[0] - z.sum()) < 1e-9


def test_moment_spec_validation(f7, f11):
    with pytest.raises(ValueError):
        MomentSpec(f7, [])
    with pytest.raises(ValueError):
        MomentSpec(f7, full_subsets(f7, 1))
    with pytest.raises(ValueError):
        MomentSpec(f7, full_subsets(f11, 2))
    assert MomentSpec(f7, [CharSubset((1, 2), 6)], k_extra=2).sizes == (2, 5, 5)


def test_sequence_size_counts_exactly(f7, f13):
    assert sequence_size(f7, full_subsets(f7, 2)) == 20
    assert sequence_size(f7, full_subsets(f7, 2)) == min_sequence_size([5, 5])
    subsets = [random_subset(f13, 4, [1, 13, i]) for i in range(2)]
    for k_extra in (0, 1, 2):
        z = jacobi_sequence_values(f13, subsets, k_extra)
        assert sequence_size(f13, subsets, k_extra) == z.size
        assert z.size >= min_sequence_size([4, 4] + [11] * k_extra)


def test_power_sums():
    assert power_sums([3 + 4j, -1]).tolist() == [5.0, 1.0]


# ── Erdős–Turán ─────────────────────────────────────────────────────────────

def test_erdos_turan_trivial_cases():
    assert erdos_turan_bound([], 10, 0) == 1.0
    assert erdos_turan_bound([0.0] * 9, 10, 9) == pytest.approx(0.1)
    bound, K = erdos_turan_best([0.0] * 9, 10)
    assert bound == pytest.approx(0.1) and K == 9
    with pytest.raises(ValueError):
        erdos_turan_bound([1.0], 10, 2)
    with pytest.raises(ValueError):
        erdos_turan_bound([1.0], 0, 1)


def test_erdos_turan_dominates_exact_discrepancy(small_field):
    subsets = full_subsets(small_field, 2)
    pts = jacobi_sequence(small_field, subsets)
    spec = MomentSpec(small_field, subsets, n_max=5)
    bound, K = erdos_turan_best(power_sums(moments(spec)), pts.N, 5)
    assert 0 <= K <= 5
    assert discrepancy_exact(pts).D <= bound + 1e-12
    for K in range(6):
        assert erdos_turan_bound(power_sums(moments(spec)), pts.N, K) >= bound - 1e-12


# ── theorem right-hand sides ────────────────────────────────────────────────

def test_theorem1_symmetric_and_positive():
    assert rhs_theorem1(101, 20, 90) == rhs_theorem1(101, 90, 20)
    assert rhs_theorem1(101, 99, 99) > 0
    assert rhs_theorem1_sizes(101, [5, 99, 98]) == rhs_theorem1(101, 99, 98)
    with pytest.raises(SizeOutOfRange):
        rhs_theorem1(101, 0, 5)
    with pytest.raises(DomainError):
        rhs_theorem1_sizes(101, [5])


def test_theorem1_at_full_sizes_matches_high_precision():
    q, a = 101, 99
    Q, A = sympy.Integer(q), sympy.Integer(a)
    lq = sympy.log(Q)
    first = ((2 * 6 ** sympy.Rational(2, 3) * A ** sympy.Rational(-1, 3) * Q ** sympy.Rational(1, 6)
              + sympy.Rational(1, 2) / A * sympy.sqrt(Q) * lq) * (1 + 1 / (100 * sympy.sqrt(Q))))
    second = (sympy.Rational(9, 2) * A ** sympy.Rational(-3, 7) * Q ** sympy.Rational(3, 14)
              + sympy.Rational(11, 10) * A ** sympy.Rational(-3, 4) * sympy.sqrt(Q) * lq)
    expected = min(float(first.evalf(30)), float(second.evalf(30)))
    assert rhs_theorem1(q, a, a) == pytest.approx(expected, rel=1e-12)


def test_theorem2_branches():
    q = 101
    assert rhs_theorem2_k1(q, 1, 50) == pytest.approx(2 * math.sqrt(3) * q ** -0.25 * (1 + 2 * q ** -0.5))
    assert rhs_theorem2_k1(q, 2, 50) > rhs_theorem2_k1(q, 1, 50)
    with pytest.raises(DomainError):
        rhs_theorem2_k1_large(q, 10)
    large = rhs_theorem2_k1_large(q, 99)
    assert rhs_theorem2_best(q, 1, 2, 99) == min(large, rhs_theorem2_k1(q, 2, 99))
    assert rhs_theorem2_best(q, 1, 2, 10) == rhs_theorem2_k1(q, 2, 10)
    assert rhs_theorem2(q, 2, 2, 50) <= rhs_theorem3(q, 2)
    with pytest.raises(DomainError):
        rhs_theorem2(q, 1, 2, 50)


def test_theorem2_regression_pin():
    q, k, A1 = 101, 2, 50
    Q = sympy.Integer(q)
    lead = 3 * Q ** sympy.Rational(-1, 3) * (1 + 6 * Q ** sympy.Rational(-1, 6) * sympy.log(Q))
    second = (3 * sympy.Integer(A1) ** sympy.Rational(-1, 7) * Q ** sympy.Rational(-3, 14)
              * (1 + Q ** sympy.Rational(-2, 7) * (49 + sympy.sqrt(15) * sympy.log(Q))))
    divisor = (1 - sympy.Rational(2, q)) ** k
    expected = min(float((lead / divisor).evalf(30)), float((second / divisor).evalf(30)))
    assert rhs_theorem2(q, k, 2, A1) == pytest.approx(expected, rel=1e-12)


def test_theorem3_values():
    expected = 3 * 9 ** (-1 / 3) * (1 + 6 * 9 ** (-1 / 6) * math.log(9)) / (7 / 9) ** 2
    assert rhs_theorem3(9, 2) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        rhs_theorem3(9, 1)
    big = 10 ** 60
    assert rhs_theorem3(big, 2) / (3 * big ** (-1 / 3)) == pytest.approx(1.0, rel=1e-2)


def test_moment_theorems():
    q = 31
    assert rhs_moment1(q, 1, (4, 9)) == pytest.approx(6 * q ** 0.5 * (1 + 1 / (2 * q)))
    assert rhs_moment1(q, 3, (4, 9, 2)) == rhs_moment1(q, 3, (9, 2, 4))
    assert rhs_m3(7, 2, 2, 0) == pytest.approx(31)
    assert rhs_m2(q, 2, 1, (5,), 0, 1, 2) > 0
    with pytest.raises(DomainError):
        rhs_m2(q, 2, 1, (5, 6), 0, 1, 2)
    with pytest.raises(DomainError):
        rhs_m3(q, 2, 1, 0)


def test_bound_spec():
    spec = BoundSpec.for_sizes(11, 1, 2, [3, 4])
    assert spec.delta == 1 and spec.m == 2
    with pytest.raises(DomainError):
        BoundSpec(q=11, m=2, k=1, n=1, A=(3, 4), delta=0)
    with pytest.raises(SizeOutOfRange):
        BoundSpec.for_sizes(11, 1, 1, [10])


# ── exponents ───────────────────────────────────────────────────────────────

@pytest.mark.parametrize("x,y,expected", [
    (0, 0, Fraction(0)),
    (1, 0, Fraction(0)),
    (Fraction(1, 2), Fraction(1, 2), Fraction(0)),
    (Fraction(4, 5), Fraction(4, 5), Fraction(1, 10)),
    (1, Fraction(1, 3), Fraction(1, 6)),
    (1, Fraction(2, 3), Fraction(1, 6)),
    (Fraction(8, 9), Fraction(8, 9), Fraction(1, 6)),
    (1, 1, Fraction(3, 14)),
])
def test_f_stated_values_are_exact(x, y, expected):
    value = f_exponent(x, y)
    assert isinstance(value, sympy.Rational)
    assert value == sympy.Rational(expected.numerator, expected.denominator)


def test_f_grid_properties():
    table = np.array([[f_exponent(x, y) for y in GRID] for x in GRID], dtype=float)
    assert np.allclose(table, table.T)
    assert table.min() >= 0 and table.max() <= 3 / 14 + 1e-12
    assert np.all(np.diff(table, axis=0) >= -1e-12)
    assert np.all(np.diff(table, axis=1) >= -1e-12)
    # adjacent grid values never jump: continuity across every branch line
    assert np.max(np.abs(np.diff(table, axis=0))) <= 0.5 / 200 + 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("m", [1, 2])
def test_g_properties(k, m):
    values = np.array([g_exponent(k, m, x) for x in GRID], dtype=float)
    assert np.all(np.diff(values) >= -1e-12)
    assert np.max(np.abs(np.diff(values))) <= 1 / 200 + 1e-12
    assert g_exponent(k, m, 1) == sympy.Rational(2 * k + 1, 2 * (2 * k + 3))
    assert g_exponent(k, m, 1) < g_exponent(k + 1, m, 0)


def test_g_middle_branch_and_f_domination():
    assert g_exponent(1, 2, Fraction(1, 2)) == sympy.Rational(1, 4)
    for m in (1, 2):
        for x in GRID:
            assert f_exponent(1.0, x) <= g_exponent(1, m, x) + 1e-12


def test_exponent_domain():
    with pytest.raises(DomainError):
        f_exponent(1.5, 0)
    with pytest.raises(DomainError):
        g_exponent(0, 1, 0.5)
    with pytest.raises(DomainError):
        empirical_exponent(101, 0.0)
    assert empirical_exponent(101, 1 / 101) == pytest.approx(1.0)
