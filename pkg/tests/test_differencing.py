import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dyadic_pd.core import combinations4, ordered_tetrads
from dyadic_pd.differencing import (
    kernel_s,
    kernel_s_on_residuals,
    kernel_values,
    statistic_naive,
    tetrad_sum_naive,
    tetrad_sum_reduced,
    tilde,
    tilde_many,
)
from dyadic_pd.estimator import residual_matrix
from dyadic_pd.simulate import generate

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


def square(n):
    return arrays(np.float64, (n, n), elements=finite)


def brute_kernel(x, u, c):
    """Second enumerator: explicit index loops, no shared helpers."""
    total = 0.0
    for i, j, k, l in itertools.permutations(c):
        xt = x[i][j] - x[i][k] - x[l][j] + x[l][k]
        ut = u[i][j] - u[i][k] - u[l][j] + u[l][k]
        total += xt * ut
    return total / 24


@given(st.data(), st.integers(min_value=4, max_value=7))
def test_additive_matrix_is_annihilated(data, n):
    a = data.draw(arrays(np.float64, n, elements=finite))
    b = data.draw(arrays(np.float64, n, elements=finite))
    v = a[:, None] + b[None, :]
    vals = tilde_many(v, ordered_tetrads(n))
    assert np.max(np.abs(vals)) <= 1e-12 * (1 + np.max(np.abs(v)))


def test_constant_matrix_gives_zero():
    assert tilde(np.full((5, 5), 3.25), (0, 1, 2, 3)) == 0.0


def test_tilde_matches_four_lookups():
    v = np.random.default_rng(5).normal(size=(4, 4))
    expected = (v[0][1] - v[0][2]) - (v[3][1] - v[3][2])
    assert tilde(v, (0, 1, 2, 3)) == expected


def test_kernel_zero_for_constant_u_or_additive_x():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(6, 6))
    assert kernel_s(x, (0, 2, 3, 5), u=np.full((6, 6), 4.0)) == 0.0
    add = rng.normal(size=6)[:, None] + rng.normal(size=6)[None, :]
    assert abs(kernel_s(add, (0, 2, 3, 5), u=rng.normal(size=(6, 6)))) < 1e-13


def test_kernel_matches_independent_enumerator():
    rng = np.random.default_rng(42)
    x, u = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    assert kernel_s(x, (0, 1, 2, 3), u=u) == pytest.approx(brute_kernel(x, u, (0, 1, 2, 3)), rel=1e-13)


def test_kernel_accepts_dataset_with_latent_truth():
    d = generate("d1", 6, 0.0, 3)
    assert kernel_s(d, (1, 2, 4, 5)) == kernel_s(d.x, (1, 2, 4, 5), u=d.latent.u)


@given(st.permutations([0, 2, 3, 5]))
def test_kernel_is_bit_stable_under_input_order(order):
    rng = np.random.default_rng(9)
    x, u = rng.normal(size=(6, 6)), rng.normal(size=(6, 6))
    assert kernel_s(x, tuple(order), u=u) == kernel_s(x, (0, 2, 3, 5), u=u)


def test_residual_kernel_zero_cases():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(5, 5))
    assert kernel_s_on_residuals(x, np.zeros((5, 5)), (0, 1, 2, 3)) == 0.0
    d = generate("d3", 6, 1.5, 11, u_scale=0.0)
    resid = residual_matrix(d, 1.5)
    assert abs(kernel_s_on_residuals(d.x, resid, (0, 1, 3, 4))) < 1e-12


def test_residual_kernel_equals_kernel_on_residual_matrix():
    d = generate("d4", 7, 0.2, 8)
    resid = residual_matrix(d, 0.37)
    c = (1, 3, 4, 6)
    assert kernel_s_on_residuals(d.x, resid, c) == kernel_s(d.x, c, u=resid)
    assert kernel_s_on_residuals(d.x, resid, c) == pytest.approx(brute_kernel(d.x, resid, c), rel=1e-12)


@given(st.data(), st.integers(min_value=4, max_value=7))
def test_fixed_effects_leave_tilde_unchanged(data, n):
    y = data.draw(square(n))
    theta = data.draw(arrays(np.float64, n, elements=finite))
    xi = data.draw(arrays(np.float64, n, elements=finite))
    t = ordered_tetrads(n)
    before = tilde_many(y, t)
    after = tilde_many(y + theta[:, None] + xi[None, :], t)
    scale = 1 + np.max(np.abs(y)) + np.max(np.abs(theta)) + np.max(np.abs(xi))
    assert np.max(np.abs(before - after)) <= 1e-12 * scale


def test_kernel_values_follow_combination_order():
    rng = np.random.default_rng(4)
    x, u = rng.normal(size=(6, 6)), rng.normal(size=(6, 6))
    vals = kernel_values(x, u)
    expected = [brute_kernel(x, u, c) for c in combinations4(6)]
    np.testing.assert_allclose(vals, expected, rtol=1e-12, atol=1e-14)


@given(st.data(), st.integers(min_value=4, max_value=9))
def test_reduced_tetrad_sum_matches_enumeration(data, n):
    v = data.draw(square(n))
    w = data.draw(square(n))
    naive = tetrad_sum_naive(v, w)
    reduced = tetrad_sum_reduced(v, w)
    scale = tetrad_sum_naive(np.abs(v), np.abs(w)) + np.sum(np.abs(v)) * np.sum(np.abs(w)) * n**2
    assert abs(naive - reduced) <= 1e-11 * (scale + 1)


def test_statistic_has_mean_zero_at_truth():
    # mean over 10^4 independent networks within 4 standard errors of zero
    from dyadic_pd.oracles import direct_statistic_draws

    stats = direct_statistic_draws("d1", 6, 10_000, seed=77)
    se = stats.std(ddof=1) / np.sqrt(stats.size)
    assert abs(stats.mean()) < 4 * se


def test_statistic_naive_agrees_with_oracle_draw():
    d = generate("d2", 6, 0.0, 5)
    assert statistic_naive(d.x, d.latent.u) == pytest.approx(
        np.mean([brute_kernel(d.x, d.latent.u, c) for c in combinations4(6)]), rel=1e-12
    )
