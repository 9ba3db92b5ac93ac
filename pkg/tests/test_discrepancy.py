import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from src.characters import CharSubset
from src.discrepancy import (
    DISCREPANCY_SETTINGS,
    Arc,
    arc_deviation,
    discrepancy_exact,
    discrepancy_grid,
    full_subsets,
    iter_jacobi_chunks,
    jacobi_sequence,
    jacobi_sequence_values,
    normalize_points,
    points_from_angles,
)
from src.errors import NotOnCircle, TupleBudgetExceeded
from src.exp_sums import gauss_all, jacobi_via_gauss

GRID_STEP = 2.0 ** -12

angles = st.lists(st.floats(min_value=0, max_value=1, exclude_max=True), min_size=1, max_size=30)


def test_known_values():
    assert discrepancy_exact(points_from_angles([])).D == 1.0
    assert discrepancy_exact(points_from_angles([0.3])).D == pytest.approx(1.0, abs=1e-12)
    assert discrepancy_exact(points_from_angles([0.1, 0.6])).D == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("N", range(1, 13))
def test_equally_spaced_points(N):
    pts = points_from_angles(np.arange(N) / N)
    assert discrepancy_exact(pts).D == pytest.approx(1.0 / N, abs=1e-12)
    assert discrepancy_exact(pts, method="pairs").D == pytest.approx(1.0 / N, abs=1e-12)


def test_merging_keeps_multiplicities():
    pts = points_from_angles([0.6, 0.1, 0.1, 1.25])
    assert pts.angles.tolist() == [0.1, 0.25, 0.6]
    assert pts.multiplicities.tolist() == [2, 1, 1]
    assert pts.N == 4
    wrapped = points_from_angles([0.0, 1.0 - 2.0 ** -50])
    assert len(wrapped) == 1 and wrapped.N == 2


def test_repeated_point_discrepancy():
    # three copies of one angle: the degenerate closed arc holds everything
    assert discrepancy_exact(points_from_angles([0.4] * 3)).D == pytest.approx(1.0)
    pts = points_from_angles([0.0, 0.0, 0.5])
    assert discrepancy_exact(pts).D == pytest.approx(2 / 3)
    assert discrepancy_exact(pts, method="pairs").D == pytest.approx(2 / 3)


def test_adding_a_point_can_raise_discrepancy():
    # the open arc (1/3, 1) holds one of four points against length 2/3
    before = [0.0, 1 / 3, 2 / 3]
    assert discrepancy_exact(points_from_angles(before)).D == pytest.approx(1 / 3, abs=1e-12)
    after = discrepancy_exact(points_from_angles(before + [1 / 6]))
    assert after.D == pytest.approx(5 / 12, abs=1e-12)
    assert discrepancy_exact(points_from_angles(before + [1 / 6]), method="pairs").D == pytest.approx(5 / 12)
    # a lone point has D = 1; a second one halves it
    assert discrepancy_exact(points_from_angles([0.3, 0.8])).D == pytest.approx(0.5, abs=1e-12)


def test_unknown_method():
    with pytest.raises(ValueError):
        discrepancy_exact(points_from_angles([0.2]), method="fast")


def test_normalize_points():
    pts = normalize_points([1j, -1, 1])
    assert pts.angles.tolist() == pytest.approx([0.0, 0.25, 0.5])
    with pytest.raises(NotOnCircle):
        normalize_points([1.0, 2.0])


def test_arc_deviation_open_and_closed():
    pts = points_from_angles([0.1, 0.2, 0.6])
    closed = Arc(0.1, 0.2, True, 2, 1)
    assert arc_deviation(pts, closed) == pytest.approx(2 / 3 - 0.1)
    opened = Arc(0.1, 0.2, False, 0, -1)
    assert arc_deviation(pts, opened) == pytest.approx(0.1)
    around = Arc(0.6, 1.6, False, 2, -1)
    assert arc_deviation(pts, around) == pytest.approx(1 - 2 / 3)


@given(angles)
@settings(max_examples=150)
def test_linear_and_pairs_agree_and_witness_is_attained(values):
    pts = points_from_angles(values)
    result = discrepancy_exact(pts)
    assert result.D == pytest.approx(discrepancy_exact(pts, method="pairs").D, abs=1e-12)
    assert arc_deviation(pts, result.witness) == pytest.approx(result.D, abs=1e-12)
    assert 1.0 / (2 * pts.N) - 1e-12 <= result.D <= 1.0 + 1e-12


@given(angles, st.floats(min_value=0, max_value=1))
@settings(max_examples=100)
def test_rotation_invariance(values, offset):
    pts = points_from_angles(values)
    assert discrepancy_exact(pts.rotated(offset)).D == pytest.approx(discrepancy_exact(pts).D, abs=1e-9)


def test_grid_oracle_on_random_instances(rng):
    for _ in range(40):
        pts = points_from_angles(rng.random(int(rng.integers(1, 51))))
        exact = discrepancy_exact(pts).D
        grid = discrepancy_grid(pts)
        assert grid <= exact + 1e-12
        assert exact - grid <= 2 * GRID_STEP


def test_f7_full_family_has_twenty_points(f7):
    pts = jacobi_sequence(f7, full_subsets(f7, 2))
    assert pts.N == 20
    D = discrepancy_exact(pts).D
    assert 0 < D <= 1


@pytest.mark.parametrize("m", [2, 3])
def test_family_values_match_gauss_formula(f7, m):
    gt = gauss_all(f7)
    values = jacobi_sequence_values(f7, full_subsets(f7, m), gtable=gt)
    scale = math.sqrt(f7.q) ** (m - 1)
    expected = [jacobi_via_gauss(gt, t) / scale
                for t in itertools.product(range(1, 6), repeat=m) if sum(t) % 6]
    assert np.allclose(values, expected)


def test_family_with_extra_slots_and_subsets(f11):
    subset = CharSubset((1, 4, 7), f11.order)
    values = jacobi_sequence_values(f11, [subset], k_extra=1)
    # pairs (a, b) with a in the subset, b in 1..9 and a + b != 0 mod 10
    assert values.size == 3 * 9 - 3
    assert np.allclose(np.abs(values), 1.0)


def test_chunking_does_not_change_the_family(f13, monkeypatch):
    subsets = full_subsets(f13, 3)
    whole = jacobi_sequence_values(f13, subsets)
    monkeypatch.setitem(DISCREPANCY_SETTINGS, "chunk_elements", 7)
    chunks = list(iter_jacobi_chunks(f13, subsets))
    assert len(chunks) > 11
    assert np.allclose(np.concatenate(chunks), whole)


def test_budget_and_argument_checks(f7):
    with pytest.raises(TupleBudgetExceeded):
        jacobi_sequence(f7, full_subsets(f7, 2), max_tuples=10)
    with pytest.raises(ValueError):
        jacobi_sequence(f7, full_subsets(f7, 1))
    with pytest.raises(ValueError):
        jacobi_sequence(f7, [])
