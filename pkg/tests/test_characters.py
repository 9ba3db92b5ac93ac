import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from src.characters import (
    CharSubset,
    MulChar,
    add_char_eval,
    chi_on_codes,
    chi_on_units,
    enumerate_Psi,
    enumerate_X,
    enumerate_Xbar,
    mul_char_eval,
    psi_on_codes,
    psi_on_units,
    random_subset,
    tolerance,
)
from src.errors import EvalAtZero, SizeOutOfRange
from src.finite_field import ZERO, build_field


def test_dual_group_sizes(f7):
    assert len(enumerate_X(f7)) == 5
    assert len(enumerate_Xbar(f7)) == 6
    assert len(enumerate_Psi(f7)) == 6


def test_mulchar_index_arithmetic():
    a, b = MulChar(4, 6), MulChar(5, 6)
    assert (a * b).j == 3
    assert a.conj().j == 2
    assert (a * a.conj()).is_trivial
    with pytest.raises(ValueError):
        a * MulChar(1, 4)


def test_char_subset_normalises_and_validates(f7):
    s = CharSubset((3, 1, 3), f7.order)
    assert s.indices == (1, 3)
    assert len(s) == 2
    assert s.indicator().tolist() == [0, 1, 0, 1, 0, 0]
    assert len(CharSubset.full(f7)) == 5
    with pytest.raises(SizeOutOfRange):
        CharSubset((0, 1), f7.order)


def test_chi_is_zero_free_on_units_only(f7):
    with pytest.raises(EvalAtZero):
        mul_char_eval(f7, 1, ZERO)
    values = chi_on_codes(f7, 2)
    assert values[0] == 0
    assert np.allclose(np.abs(values[1:]), 1.0)


def test_f5_quartic_character(f5):
    # g = 2, chi_1(2^k) = i^k
    assert f5.generator == 2
    assert np.allclose(chi_on_units(f5, 1), [1, 1j, -1, -1j])


def test_psi_on_prime_field_is_residue_root(f7):
    psi = psi_on_codes(f7)
    expected = np.exp(2j * np.pi * np.arange(7) / 7)
    assert np.allclose(psi, expected)
    assert np.allclose(psi_on_units(f7, ZERO), 1.0)


def test_orthogonality(small_field):
    m = small_field.order
    for j in range(m):
        total = chi_on_units(small_field, j).sum()
        assert abs(total - (m if j == 0 else 0)) < 1e-9
    for b in small_field.units():
        assert abs(psi_on_codes(small_field, b).sum()) < 1e-9


@given(st.integers(min_value=-1, max_value=7), st.integers(min_value=-1, max_value=7), st.integers(0, 7))
def test_psi_is_additive_f9(x, y, b):
    f = build_field(3, 2)
    lhs = add_char_eval(f, b, f.add(x, y))
    assert abs(lhs - add_char_eval(f, b, x) * add_char_eval(f, b, y)) < 1e-12


@given(st.integers(0, 25), st.integers(0, 25), st.integers(-40, 40))
def test_chi_is_multiplicative_f27(x, y, j):
    f = build_field(3, 3)
    lhs = mul_char_eval(f, j, f.mul(x, y))
    assert abs(lhs - mul_char_eval(f, j, x) * mul_char_eval(f, j, y)) < 1e-12


def test_random_subset_is_deterministic(f13):
    a = random_subset(f13, 5, [3, 13, 0])
    b = random_subset(f13, 5, [3, 13, 0])
    assert a == b
    assert len(a) == 5
    assert all(1 <= j <= 11 for j in a)
    assert random_subset(f13, 11, 0) == CharSubset.full(f13)


def test_random_subset_rejects_bad_sizes(f13):
    with pytest.raises(SizeOutOfRange):
        random_subset(f13, 0, 1)
    with pytest.raises(SizeOutOfRange):
        random_subset(f13, 12, 1)


def test_tolerance_scales_with_terms():
    assert tolerance(1000) == pytest.approx(1000 * tolerance(1))
    assert tolerance(0) == tolerance(1)
