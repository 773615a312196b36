import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densify.sampling import (
    SampleSequence,
    dispersion_bound,
    empirical_dispersion,
    first_primes,
    halton_point,
    halton_points,
    nth_prime,
    radical_inverse,
    roadmap_samples,
)


def exact_radical_inverse(index, base):
    # oracle: digit reversal in exact rational arithmetic
    digits = []
    while index:
        index, r = divmod(index, base)
        digits.append(r)
    return sum(Fraction(dig, base ** (k + 1)) for k, dig in enumerate(digits))


def is_prime(p):
    return p >= 2 and all(p % q for q in range(2, int(math.isqrt(p)) + 1))


@pytest.mark.parametrize("index,base,expected", [(1, 2, 0.5), (3, 2, 0.75), (3, 3, 1 / 9)])
def test_radical_inverse_examples(index, base, expected):
    assert radical_inverse(index, base) == pytest.approx(expected, abs=1e-15)


def test_radical_inverse_rejects_bad_base():
    with pytest.raises(ValueError):
        radical_inverse(3, 1)


@given(st.integers(0, 10**9), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_radical_inverse_matches_exact_oracle(index, base):
    x = radical_inverse(index, base)
    assert 0.0 <= x < 1.0
    assert x == pytest.approx(float(exact_radical_inverse(index, base)), abs=1e-15)


@pytest.mark.parametrize("index,d,expected", [(1, 2, (0.5, 1 / 3)), (2, 2, (0.25, 2 / 3)), (1, 1, (0.5,))])
def test_halton_point_examples(index, d, expected):
    np.testing.assert_allclose(halton_point(index, d), expected, atol=1e-15)


def test_bases_are_first_primes():
    bases = SampleSequence(6).bases
    assert bases == (2, 3, 5, 7, 11, 13)
    assert all(is_prime(p) for p in first_primes(25))
    assert first_primes(25) == sorted(set(first_primes(25)))


def test_vectorized_points_match_scalar():
    for d in (1, 2, 3, 4, 7):
        pts = halton_points(200, d, start=5)
        for i in (0, 17, 199):
            np.testing.assert_array_equal(pts[i], halton_point(5 + i, d))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_points_inside_cube_and_distinct(d):
    pts = halton_points(10_000, d)
    assert np.all((pts >= 0) & (pts <= 1))
    assert len(np.unique(pts, axis=0)) == len(pts)


def test_determinism_across_instances():
    a, b = SampleSequence(3), SampleSequence(3)
    np.testing.assert_array_equal(a.points(1000), b.points(1000))
    assert np.array_equal(a.point(123), b.point(123))


def test_index_origin_is_one():
    with pytest.raises(ValueError):
        halton_point(0, 2)


def test_roadmap_samples_prepend_query():
    pts = roadmap_samples((0.1, 0.2), (0.8, 0.9), 5)
    np.testing.assert_array_equal(pts[0], (0.1, 0.2))
    np.testing.assert_array_equal(pts[1], (0.8, 0.9))
    np.testing.assert_array_equal(pts[2:], halton_points(3, 2))
    with pytest.raises(ValueError):
        roadmap_samples((0.1,), (0.8, 0.9), 5)


@pytest.mark.parametrize(
    "n,d,expected",
    [(10**4, 2, 0.03), (1, 1, 2.0), (10**5, 4, 7 * 10 ** (-5 / 4))],
)
def test_dispersion_bound_examples(n, d, expected):
    assert dispersion_bound(n, d).value == pytest.approx(expected, rel=1e-12)


def test_dispersion_bound_example_value():
    # 7 * 10^(-5/4) = 0.393639...
    assert dispersion_bound(10**5, 4).value == pytest.approx(0.39364, abs=1e-5)


@given(st.integers(1, 10**6), st.integers(1, 8))
def test_dispersion_bound_positive_and_non_increasing(n, d):
    a, b = dispersion_bound(n, d).value, dispersion_bound(n + 1, d).value
    assert a > 0 and b <= a
    assert a == pytest.approx(nth_prime(d) * n ** (-1 / d))


def test_empirical_dispersion_single_point():
    assert empirical_dispersion([[0.5, 0.5]], 0.01) == pytest.approx(math.sqrt(2) / 2, abs=1e-9)


def test_empirical_dispersion_rejects_mismatch_and_empty():
    with pytest.raises(ValueError):
        empirical_dispersion([[0.0, 0.0], [1.0, 1.0]], 0.1, d=1)
    with pytest.raises(ValueError):
        empirical_dispersion(np.zeros((0, 2)), 0.1)


def test_empirical_dispersion_matches_brute_force_grid():
    # oracle: every grid center against every point, no tree
    pts = halton_points(50, 2)
    axis = np.concatenate([[0.0], (np.arange(20) + 0.5) / 20, [1.0]])
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    brute = np.sqrt(((centers[:, None, :] - pts[None]) ** 2).sum(-1)).min(1).max()
    assert empirical_dispersion(pts, 0.05) == pytest.approx(brute, abs=1e-12)


def test_first_hundred_halton_within_bound():
    assert empirical_dispersion(halton_points(100, 2), 0.01) <= dispersion_bound(100, 2).value


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("n", [10, 100, 1000])
def test_dispersion_bound_holds(n, d):
    # a 0.01 grid is 10^8 cells in 4-D; coarser grids still under-estimate
    step = {2: 0.01, 3: 0.02, 4: 0.05}[d]
    assert empirical_dispersion(halton_points(n, d), step) <= dispersion_bound(n, d).value
