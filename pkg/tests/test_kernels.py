import math

import numpy as np
import pytest

from defectlab.kernels import (
    USE_NUMBA,
    a_hat,
    amplitude_minus_integrand,
    amplitude_plus_integrand,
    big_r_hat,
    fourier_cos_sum,
    fourier_exp_sum,
    fourier_sin_over_omega_sum,
    frak_a_hat_minus,
    frak_a_hat_plus,
    gamma_identity_integrand,
    gamma_identity_derivative_integrand,
    gl_panels,
    half_line_grid,
    r_hat,
    rt_hat_minus,
    rt_hat_plus,
    sigma0_hat,
)


def test_sigma0_rank2_closed_form():
    w = np.linspace(-30.0, 30.0, 301)
    got = sigma0_hat(w, 2, 1)
    expected = 1.0 / (2.0 * np.cosh(0.5 * w))
    assert np.max(np.abs(got - expected)) < 1e-15


def test_sigma0_matches_hyperbolic_ratio():
    # the rescaled exp/expm1 form is algebraically identical to the sinh ratio
    w = np.linspace(0.05, 20.0, 100)
    for rank in (2, 3, 4):
        for k in range(1, rank):
            direct = np.sinh(0.5 * (rank - k) * w) / np.sinh(0.5 * rank * w)
            assert np.max(np.abs(sigma0_hat(w, rank, k) - direct)) < 1e-14


def test_sigma0_zero_limit_and_continuity():
    for rank in (2, 3, 5):
        for k in range(1, rank):
            at0 = sigma0_hat(np.array([0.0]), rank, k)[0]
            assert abs(at0 - (rank - k) / rank) < 1e-15
            near0 = sigma0_hat(np.array([1e-9]), rank, k)[0]
            assert abs(near0 - at0) < 1e-8


def test_sigma0_no_overflow_at_large_argument():
    big = sigma0_hat(np.array([800.0, 5000.0]), 3, 1)
    assert np.all(np.isfinite(big))
    # asymptotically exp(-k x / 2)
    assert abs(big[0] - math.exp(-400.0)) < 1e-180


def test_big_r_symmetry_and_limit():
    w = np.linspace(0.0, 10.0, 50)
    for rank in (3, 4):
        for j in range(1, rank + 1):
            for jp in range(1, rank + 1):
                assert np.allclose(
                    big_r_hat(w, rank, j, jp), big_r_hat(w, rank, jp, j)
                )
    assert abs(big_r_hat(np.array([0.0]), 4, 2, 3)[0] - 2 * (4 - 3) / 4) < 1e-15
    # index at the rank kills the kernel
    assert np.all(big_r_hat(w, 3, 3, 1) == 0.0)


def test_big_r_matches_hyperbolic_ratio():
    w = np.linspace(0.1, 15.0, 60)
    rank, j, jp = 4, 2, 3
    jlo, jhi = min(j, jp), max(j, jp)
    direct = (
        np.exp(0.5 * w)
        * np.sinh(0.5 * jlo * w)
        * np.sinh(0.5 * (rank - jhi) * w)
        / (np.sinh(0.5 * w) * np.sinh(0.5 * rank * w))
    )
    assert np.max(np.abs(big_r_hat(w, rank, j, jp) - direct)) < 1e-13


def test_a_hat_product_rule():
    w = np.linspace(-10, 10, 41)
    assert np.allclose(a_hat(w, 1) * a_hat(w, 2), a_hat(w, 3))
    assert a_hat(np.array([0.0]), 5)[0] == 1.0


def test_frak_a_support():
    w = np.linspace(-4, 4, 81)
    plus = frak_a_hat_plus(w)
    minus = frak_a_hat_minus(w)
    assert np.all(plus[w > 0] == 0.0)
    assert np.all(minus[w < 0] == 0.0)
    assert np.allclose(plus[w <= 0], np.exp(0.5 * w[w <= 0]))
    # mirror symmetry
    assert np.allclose(frak_a_hat_plus(-w), minus)


def test_r_hat_is_the_advertised_combination():
    w = np.linspace(-6, 6, 61)
    for rank in (3, 4):
        for k in range(1, rank):
            combo = big_r_hat(w, rank, k, 1) * a_hat(w, 2) - big_r_hat(
                w, rank, k, 2
            ) * a_hat(w, 1)
            assert np.allclose(r_hat(w, rank, k), combo)


def test_rt_hat_support():
    w = np.linspace(-5, 5, 51)
    plus = rt_hat_plus(w, 3, 1)
    minus = rt_hat_minus(w, 3, 1)
    assert np.all(plus[w > 0] == 0.0)
    assert np.all(minus[w < 0] == 0.0)
    assert np.max(np.abs(plus)) > 0 and np.max(np.abs(minus)) > 0


# ---------------------------------------------------------------------------
# quadrature


def test_gl_panels_polynomial_exactness():
    nodes, weights = gl_panels([0.0, 0.5, 1.0], order=3)
    # order-3 Gauss is exact through degree 5
    assert abs(weights @ nodes**5 - 1.0 / 6.0) < 1e-15
    with pytest.raises(ValueError):
        gl_panels([1.0, 0.5])
    with pytest.raises(ValueError):
        gl_panels([1.0])


def test_half_line_grid_integrates_exponential():
    nodes, weights = half_line_grid()
    assert abs(weights @ np.exp(-nodes) - 1.0) < 1e-14
    assert np.all(weights > 0)
    assert nodes.min() > 0.0 and nodes.max() < 80.0


def test_fourier_cos_sum_lorentzian():
    # (1/pi) int_0^inf exp(-n w/2) cos(w lam) dw = (1/(2 pi)) n/(lam^2+n^2/4)
    nodes, weights = half_line_grid()
    lams = np.linspace(-3, 3, 25)
    for n in (1, 2):
        got = fourier_cos_sum(nodes, weights, a_hat(nodes, n), lams)
        expected = (1.0 / (2 * np.pi)) * n / (lams**2 + 0.25 * n * n)
        assert np.max(np.abs(got - expected)) < 1e-13


def test_fourier_sin_over_omega_arctan():
    # 2 int_0^inf exp(-w) sin(w lam)/w dw = 2 arctan(lam)
    nodes, weights = half_line_grid()
    lams = np.linspace(-2, 2, 21)
    got = fourier_sin_over_omega_sum(nodes, weights, a_hat(nodes, 2), lams)
    assert np.max(np.abs(got - 2 * np.arctan(lams))) < 1e-13


def test_fourier_exp_sum_full_line():
    edges = np.linspace(-80.0, 80.0, 81)
    nodes, weights = gl_panels(edges, order=32)
    lams = np.linspace(-2, 2, 9)
    got = fourier_exp_sum(nodes, weights, a_hat(nodes, 2), lams)
    expected = (1.0 / (2 * np.pi)) * 2.0 / (lams**2 + 1.0)
    assert np.max(np.abs(got - expected)) < 1e-13
    assert np.max(np.abs(got.imag)) < 1e-14


# ---------------------------------------------------------------------------
# amplitude and identity integrands


def test_amplitude_integrand_zero_limits():
    lamhat, rank = 1.7, 3
    m = amplitude_minus_integrand(np.array([0.0]), lamhat, rank)[0]
    assert abs(m - (1.0 - 1j * lamhat / rank)) < 1e-15
    p = amplitude_plus_integrand(np.array([0.0]), lamhat, rank)[0]
    assert abs(p - (rank - 1.0) * (1j * lamhat / rank + 1.0)) < 1e-15


def test_amplitude_integrand_continuity_at_zero():
    lamhat, rank = -0.9, 2
    for fn in (amplitude_minus_integrand, amplitude_plus_integrand):
        v0 = fn(np.array([0.0]), lamhat, rank)[0]
        v1 = fn(np.array([1e-8]), lamhat, rank)[0]
        assert abs(v0 - v1) < 1e-6


def test_gamma_identity_integrand_limit():
    assert abs(gamma_identity_integrand(np.array([0.0]), 3.0)[0] - 0.5) < 1e-15


def test_gamma_identity_derivative_known_value():
    # int_0^inf exp(-x/2) sech(x/2) dx = 2 log 2
    nodes, weights = half_line_grid()
    got = weights @ gamma_identity_derivative_integrand(nodes, 1.0)
    assert abs(got - 2 * math.log(2)) < 1e-12


# ---------------------------------------------------------------------------
# jit layer


def test_jit_and_plain_paths_agree():
    if not USE_NUMBA:
        pytest.skip("numba disabled; plain path is the only path")
    w = np.linspace(-10, 10, 101)
    assert np.array_equal(sigma0_hat(w, 3, 1), sigma0_hat.py_func(w, 3, 1))
    assert np.array_equal(r_hat(w, 3, 2), r_hat.py_func(w, 3, 2))
    nodes, weights = half_line_grid(cutoff=20)
    lams = np.linspace(-1, 1, 5)
    assert np.allclose(
        fourier_cos_sum(nodes, weights, a_hat(nodes, 2), lams),
        fourier_cos_sum.py_func(nodes, weights, a_hat.py_func(nodes, 2), lams),
    )
