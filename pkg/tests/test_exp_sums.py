import itertools
import math

import numpy as np
import pytest

from src.characters import MulChar, psi_on_units
from src.errors import ProductTrivial, TrivialCharacter, TrivialTwist, ZeroArgument
from src.exp_sums import (
    fourier_identity_residual,
    gauss_all,
    gauss_sequence,
    gauss_sum_naive,
    gauss_sum_twisted,
    jacobi_direct,
    jacobi_literal,
    jacobi_via_gauss,
    kl_moment_sum,
    kl_tolerance,
    kl_twisted_moments,
    kloosterman_all,
    kloosterman_direct,
    kloosterman_direct_all,
    kloosterman_table,
    lemma_kl_rhs,
)
from src.finite_field import ZERO, build_field
from src.invariant_dims import RQuery, group_for, r_lookup


def test_gauss_modulus_and_trivial_character(small_field):
    gt = gauss_all(small_field)
    sq = math.sqrt(small_field.q)
    for j in range(1, small_field.order):
        assert abs(abs(gt[j]) - sq) <= 1e-8 * sq
    assert abs(gt[0] + 1) <= 1e-10


def test_gauss_table_matches_naive_sum(small_field):
    gt = gauss_all(small_field)
    for j in range(small_field.order):
        assert abs(gauss_sum_naive(small_field, 0, j) - gt[j]) < 1e-9
        assert abs(gauss_sum_naive(small_field, 0, j, compensated=True) - gt[MulChar(j, small_field.order)]) < 1e-9


def test_twisted_gauss_sum(f9):
    gt = gauss_all(f9)
    for b in f9.units():
        direct = gauss_all(f9, b)
        for j in range(f9.order):
            assert abs(gauss_sum_twisted(gt, b, j) - direct[j]) < 1e-9
    with pytest.raises(ZeroArgument):
        gauss_sum_twisted(gt, ZERO, 1)


def test_gauss_sequence_lies_on_circle(f7):
    z = gauss_sequence(gauss_all(f7))
    assert z.shape == (6 * 5,)
    assert np.allclose(np.abs(z), 1.0)


def test_jacobi_f5_example(f5):
    expected = -1 - 2j
    assert abs(jacobi_direct(f5, [1, 1]) - expected) < 1e-9
    assert abs(jacobi_literal(f5, [1, 1]) - expected) < 1e-9
    assert abs(jacobi_via_gauss(gauss_all(f5), [1, 1]) - expected) < 1e-9


@pytest.mark.parametrize("p,r", [(5, 1), (7, 1), (3, 2), (11, 1)])
def test_jacobi_routes_agree(p, r):
    field = build_field(p, r)
    gt = gauss_all(field)
    order = field.order
    for m in (2, 3):
        for chars in itertools.product(range(1, order), repeat=m):
            if sum(chars) % order == 0:
                continue
            direct = jacobi_direct(field, chars)
            assert abs(direct - jacobi_via_gauss(gt, chars)) < 1e-8 * field.q ** ((m - 1) / 2)
            assert abs(abs(direct) - field.q ** ((m - 1) / 2)) < 1e-7 * field.q ** ((m - 1) / 2)
            if m == 2 and field.q <= 9:
                assert abs(direct - jacobi_literal(field, chars)) < 1e-9


def test_jacobi_degenerate_cases(f7):
    gt = gauss_all(f7)
    assert abs(jacobi_direct(f7, [0, 0]) - (f7.q - 2)) < 1e-9
    assert abs(jacobi_direct(f7, [0, 2]) + 1) < 1e-9
    # J(chi, conj chi) = -chi(-1) = -(-1)^j
    for j in range(1, f7.order):
        assert abs(jacobi_direct(f7, [j, -j]) + (-1) ** j) < 1e-9
    with pytest.raises(TrivialCharacter):
        jacobi_via_gauss(gt, [0, 1])
    with pytest.raises(ProductTrivial):
        jacobi_via_gauss(gt, [2, 4])
    with pytest.raises(ValueError):
        jacobi_direct(f7, [1])


def test_literal_path_is_limited_to_small_fields():
    with pytest.raises(ValueError):
        jacobi_literal(build_field(67), [1, 1])


def test_kloosterman_n1_is_additive_character(f7):
    kl = kloosterman_all(gauss_all(f7), 1)
    assert np.allclose(kl.values, psi_on_units(f7))


@pytest.mark.parametrize("p,r", [(5, 1), (7, 1), (3, 2), (13, 1), (5, 2)])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_kloosterman_routes_agree(p, r, n):
    field = build_field(p, r)
    gt = gauss_all(field)
    kl = kloosterman_all(gt, n)
    scale = n * field.q ** ((n - 1) / 2)
    assert np.max(np.abs(kl.values - kloosterman_direct_all(field, n))) <= 1e-8 * scale
    assert fourier_identity_residual(kl, gt) <= 1e-8 * field.q ** (n / 2)


def test_kl2_is_real_and_weil_bounded(f13):
    kl = kloosterman_all(gauss_all(f13), 2)
    assert np.max(np.abs(kl.values.imag)) < 1e-9
    assert np.max(np.abs(kl.values)) <= 2 * math.sqrt(13) + 1e-9
    assert abs(kl.at(3) - kloosterman_direct(f13, 2, 3)) < 1e-9
    with pytest.raises(ZeroArgument):
        kl.at(ZERO)


def test_table_falls_back_beyond_precision_cap(f7):
    gt = gauss_all(f7)
    kl = kloosterman_table(gt, 7)
    assert np.allclose(kl.values, kloosterman_direct_all(f7, 7))


def test_kl_moments_n1_are_exact(f7):
    kl = kloosterman_all(gauss_all(f7), 1)
    # sum_a psi((k - l) a) over units: q - 1 when p | k - l, else -1
    assert abs(kl_moment_sum(kl, 1, 1) - 6) < 1e-9
    assert abs(kl_moment_sum(kl, 2, 1) + 1) < 1e-9
    assert abs(kl_moment_sum(kl, 7, 0) - 6) < 1e-9


def test_twisted_moments_match_single_twists(gauss13):
    kl = kloosterman_all(gauss13, 2)
    all_twists = kl_twisted_moments(kl, 2, 1)
    for j in range(1, 12):
        assert abs(all_twists[j] - kl_moment_sum(kl, 2, 1, twist=j)) < 1e-8
    with pytest.raises(TrivialTwist):
        kl_moment_sum(kl, 1, 1, twist=0)
    with pytest.raises(ValueError):
        kl_moment_sum(kl, 0, 0)


def test_lemma_rhs_values():
    assert lemma_kl_rhs(7, 1, 1, 1, False, 1) == pytest.approx(7 + math.sqrt(7))
    # floor(2^2 - 3/2) = 2
    assert lemma_kl_rhs(11, 2, 2, 1, True, 3) == pytest.approx(2 * 11 ** 2)
    with pytest.raises(ValueError):
        lemma_kl_rhs(7, 1, 0, 0, False, 1)


@pytest.mark.parametrize("q", [7, 11, 13])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_lemma_bounds_hold_for_small_weights(q, n):
    field = build_field(q)
    kl = kloosterman_table(gauss_all(field), n)
    group = group_for(q, n)
    for w in range(1, 5):
        slack = kl_tolerance(field, n) * n ** (w - 1) * q ** ((n - 1) * (w - 1) / 2)
        for k in range(w + 1):
            l = w - k
            R = r_lookup(RQuery(group, k, l))
            assert abs(kl_moment_sum(kl, k, l)) <= lemma_kl_rhs(q, n, k, l, False, R) + slack
            twisted = np.max(np.abs(kl_twisted_moments(kl, k, l)[1:]))
            assert twisted <= lemma_kl_rhs(q, n, k, l, True, R) + slack
