import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_pdo.lattice import (
    LatticeBox,
    LatticeFunction,
    TorusFunction,
    as_multi_index,
    binomial_difference,
    dft,
    difference,
    difference_array,
    falling_factorial,
    falling_factorial_array,
    idft,
    multi_indices,
)


def test_box_geometry():
    box = LatticeBox(1, 2)
    assert box.M == 5
    assert box.shape == (5,)
    np.testing.assert_array_equal(box.axis_points, [-2, -1, 0, 1, 2])
    np.testing.assert_allclose(box.axis_frequencies, [0.0, 0.2, 0.4, 0.6, 0.8])
    assert LatticeBox(2, 3).size == 49


def test_wrap_and_index():
    box = LatticeBox(1, 2)
    np.testing.assert_array_equal(box.wrap(np.array([3, -3, 7, 0])), [-2, 2, 2, 0])
    assert box.index_of([-2]) == (0,)
    assert box.index_of([2]) == (4,)


def test_interior_mask_counts():
    assert LatticeBox(1, 8).interior_mask().sum() == 9
    assert LatticeBox(2, 4).interior_mask().sum() == 25


def test_dft_of_delta_is_character():
    box = LatticeBox(1, 2)
    g = dft(LatticeFunction.delta(box, [1]))
    expected = np.exp(-2j * np.pi * box.axis_frequencies)
    np.testing.assert_allclose(g.values, expected, atol=1e-15)
    assert abs(g.values[1] - (0.309017 - 0.951057j)) < 1e-6


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 2), K=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_dft_round_trip_and_plancherel(n, K, seed):
    rng = np.random.default_rng(seed)
    box = LatticeBox(n, K)
    f = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
    g = dft(f)
    assert isinstance(g, TorusFunction)
    np.testing.assert_allclose(idft(g).values, f.values, atol=1e-12)
    assert np.isclose(np.sum(np.abs(g.values) ** 2) / box.size, np.sum(np.abs(f.values) ** 2))


def test_forward_and_backward_differences():
    v = np.array([0, 1, 4, 9, 16.0])
    np.testing.assert_array_equal(difference_array(v, (1,), (0,), "forward"), [1, 3, 5, 7, -16])
    np.testing.assert_array_equal(difference_array(v, (1,), (0,), "backward"), [-16, 1, 3, 5, 7])


def test_second_difference_of_square_is_two_in_interior():
    box = LatticeBox(1, 6)
    f = LatticeFunction.from_callable(box, lambda k1: k1.astype(float) ** 2)
    d2 = difference(f, (2,))
    interior = np.abs(box.axis_points) <= 3
    np.testing.assert_array_equal(d2.values[interior], 2.0)


def test_from_callable_broadcasts_constants():
    box = LatticeBox(2, 2)
    assert np.all(LatticeFunction.from_callable(box, lambda k1, k2: 3.0).values == 3.0)


def test_binomial_difference_matches_iterated():
    rng = np.random.default_rng(1)
    box = LatticeBox(2, 3)
    f = LatticeFunction(box, rng.standard_normal(box.shape))
    np.testing.assert_allclose(binomial_difference(f, (2, 1)).values, difference(f, (2, 1)).values, atol=1e-12)


def test_falling_factorial_values():
    assert falling_factorial(5, 3) == 60
    assert falling_factorial(-2, 2) == 6
    assert falling_factorial(7, 0) == 1
    np.testing.assert_array_equal(falling_factorial_array(np.arange(-2, 3), 2), [6, 2, 0, 0, 2])


@given(k=st.integers(-20, 20), a=st.integers(0, 5))
def test_falling_factorial_recurrence(k, a):
    assert falling_factorial(k, a + 1) == falling_factorial(k, a) * (k - a)


def test_multi_indices():
    assert list(multi_indices(2, 1)) == [(0, 0), (0, 1), (1, 0)]
    assert list(multi_indices(2, 2, binary=True)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert as_multi_index(2, 1) == (2,)
    with pytest.raises(ValueError):
        as_multi_index((1, 2), 1)
