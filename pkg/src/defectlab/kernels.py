"""Fourier-side kernels of the root densities and amplitude integrands.

Everything here is grid arithmetic: scalar kernel cores plus the loops that
evaluate them over quadrature grids.  The hyperbolic ratios are computed in
the exponentially scaled form exp(..)*expm1(..)/expm1(..), which is exact
algebra (no large-argument approximation) and immune to sinh overflow; only
omega = 0 needs the analytic limit.

The module carries an optional jit layer.  When numba imports cleanly and
DEFECTLAB_NO_NUMBA is unset, every kernel below is compiled; the plain
implementation of a compiled kernel stays reachable through its .py_func
attribute.  Setting the flag before import selects the plain path outright.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - the mirror always has numba
    numba = None
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and not os.environ.get("DEFECTLAB_NO_NUMBA")


def _jit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# scalar cores (arguments x = |omega| >= 0)


@_jit
def _sigma0_core(x: float, rank: int, k: int) -> float:
    # sinh((rank-k) x/2) / sinh(rank x/2)
    if k >= rank:
        return 0.0
    if x == 0.0:
        return (rank - k) / rank
    return math.exp(-0.5 * k * x) * math.expm1(-(rank - k) * x) / math.expm1(-rank * x)


@_jit
def _big_r_core(x: float, rank: int, j: int, jp: int) -> float:
    # exp(x/2) sinh(jlo x/2) sinh((rank-jhi) x/2) / (sinh(x/2) sinh(rank x/2))
    jlo = j if j < jp else jp
    jhi = jp if j < jp else j
    if jhi >= rank:
        return 0.0
    if x == 0.0:
        return jlo * (rank - jhi) / rank
    return (
        math.exp(0.5 * (jlo - jhi) * x)
        * math.expm1(-jlo * x)
        * math.expm1(-(rank - jhi) * x)
        / (math.expm1(-x) * math.expm1(-rank * x))
    )


@_jit
def _a_core(x: float, n: int) -> float:
    return math.exp(-0.5 * n * x)


@_jit
def _frak_a_plus_core(omega: float) -> float:
    # one-sided factor, supported on omega <= 0
    if omega > 0.0:
        return 0.0
    return math.exp(0.5 * omega)


@_jit
def _frak_a_minus_core(omega: float) -> float:
    # one-sided factor, supported on omega >= 0
    if omega < 0.0:
        return 0.0
    return math.exp(-0.5 * omega)


@_jit
def _r_core(omega: float, rank: int, k: int) -> float:
    # impurity correction to the level-k density
    x = abs(omega)
    return _big_r_core(x, rank, k, 1) * _a_core(x, 2) - _big_r_core(
        x, rank, k, 2
    ) * _a_core(x, 1)


@_jit
def _rt_plus_core(omega: float, rank: int, k: int) -> float:
    return _big_r_core(abs(omega), rank, k, 1) * _frak_a_plus_core(omega)


@_jit
def _rt_minus_core(omega: float, rank: int, k: int) -> float:
    return _big_r_core(abs(omega), rank, k, rank - 1) * _frak_a_minus_core(omega)


# ---------------------------------------------------------------------------
# grid evaluation


@_jit
def sigma0_hat(omega, rank: int, k: int):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _sigma0_core(abs(omega[i]), rank, k)
    return out


@_jit
def big_r_hat(omega, rank: int, j: int, jp: int):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _big_r_core(abs(omega[i]), rank, j, jp)
    return out


@_jit
def a_hat(omega, n: int):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _a_core(abs(omega[i]), n)
    return out


@_jit
def frak_a_hat_plus(omega):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _frak_a_plus_core(omega[i])
    return out


@_jit
def frak_a_hat_minus(omega):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _frak_a_minus_core(omega[i])
    return out


@_jit
def r_hat(omega, rank: int, k: int):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _r_core(omega[i], rank, k)
    return out


@_jit
def rt_hat_plus(omega, rank: int, k: int):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _rt_plus_core(omega[i], rank, k)
    return out


@_jit
def rt_hat_minus(omega, rank: int, k: int):
    out = np.empty(omega.shape[0])
    for i in range(omega.shape[0]):
        out[i] = _rt_minus_core(omega[i], rank, k)
    return out


# ---------------------------------------------------------------------------
# regularized amplitude integrands (u > 0 half line)


@_jit
def amplitude_minus_integrand(u, lamhat: float, rank: int):
    """Integrand of -log of the minus amplitude; the subtraction removes the
    1/u singularity so the u = 0 value is the analytic limit."""
    out = np.empty(u.shape[0], dtype=np.complex128)
    c0 = 1.0 / rank
    for i in range(u.shape[0]):
        x = u[i]
        if x == 0.0:
            out[i] = 1.0 - 1j * lamhat / rank
        else:
            kern = _sigma0_core(x, rank, rank - 1)
            out[i] = (np.exp(-1j * x * lamhat) * kern - c0 * math.exp(-rank * x)) / x
    return out


@_jit
def amplitude_plus_integrand(u, lamhat: float, rank: int):
    """Integrand of +log of the plus amplitude."""
    out = np.empty(u.shape[0], dtype=np.complex128)
    c0 = (rank - 1.0) / rank
    for i in range(u.shape[0]):
        x = u[i]
        if x == 0.0:
            out[i] = (rank - 1.0) * (1j * lamhat / rank + 1.0)
        else:
            kern = _sigma0_core(x, rank, 1)
            out[i] = (np.exp(1j * x * lamhat) * kern - c0 * math.exp(-rank * x)) / x
    return out


@_jit
def amplitude_minus_logderiv_integrand(u, lamhat: float, rank: int):
    """i * exp(-i u lamhat) * kernel; integrates to d/dlamhat of log."""
    out = np.empty(u.shape[0], dtype=np.complex128)
    for i in range(u.shape[0]):
        out[i] = 1j * np.exp(-1j * u[i] * lamhat) * _sigma0_core(u[i], rank, rank - 1)
    return out


@_jit
def amplitude_plus_logderiv_integrand(u, lamhat: float, rank: int):
    out = np.empty(u.shape[0], dtype=np.complex128)
    for i in range(u.shape[0]):
        out[i] = 1j * np.exp(1j * u[i] * lamhat) * _sigma0_core(u[i], rank, 1)
    return out


@_jit
def gamma_identity_integrand(x, mu: float):
    """(exp(-mu x/2) sech(x/2) - exp(-2x)) / x with its x = 0 limit."""
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        t = x[i]
        if t == 0.0:
            out[i] = 2.0 - 0.5 * mu
        else:
            out[i] = (math.exp(-0.5 * mu * t) / math.cosh(0.5 * t) - math.exp(-2.0 * t)) / t
    return out


@_jit
def gamma_identity_derivative_integrand(x, mu: float):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = math.exp(-0.5 * mu * x[i]) / math.cosh(0.5 * x[i])
    return out


# ---------------------------------------------------------------------------
# fused Fourier sums


@_jit
def fourier_cos_sum(nodes, weights, values, lams):
    """(1/pi) sum_i w_i v_i cos(omega_i lam_j), one value per lam."""
    out = np.empty(lams.shape[0])
    for j in range(lams.shape[0]):
        acc = 0.0
        lam = lams[j]
        for i in range(nodes.shape[0]):
            acc += weights[i] * values[i] * math.cos(nodes[i] * lam)
        out[j] = acc / math.pi
    return out


@_jit
def fourier_sin_over_omega_sum(nodes, weights, values, lams):
    """2 sum_i w_i v_i sin(omega_i lam_j)/omega_i, one value per lam."""
    out = np.empty(lams.shape[0])
    for j in range(lams.shape[0]):
        acc = 0.0
        lam = lams[j]
        for i in range(nodes.shape[0]):
            w = nodes[i]
            if w == 0.0:
                acc += weights[i] * values[i] * lam
            else:
                acc += weights[i] * values[i] * math.sin(w * lam) / w
        out[j] = acc * 2.0
    return out


@_jit
def fourier_exp_sum(nodes, weights, values, lams):
    """(1/(2 pi)) sum_i w_i v_i exp(-i omega_i lam_j), complex output."""
    out = np.empty(lams.shape[0], dtype=np.complex128)
    for j in range(lams.shape[0]):
        acc = 0.0 + 0.0j
        lam = lams[j]
        for i in range(nodes.shape[0]):
            acc += weights[i] * values[i] * np.exp(-1j * nodes[i] * lam)
        out[j] = acc / (2.0 * math.pi)
    return out


# ---------------------------------------------------------------------------
# quadrature grids (set-up code, deliberately outside the jit layer)


def gl_panels(edges, order: int = 32):
    """Composite Gauss-Legendre rule over consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("edges must be a 1d array with at least two entries")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * base_x)
        weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def half_line_grid(cutoff: float = 80.0, panel: float = 2.0, order: int = 32):
    """Uniform composite rule on [0, cutoff]; the integrands here decay at
    least like exp(-x/2), so the default cutoff leaves a tail below 1e-17."""
    count = max(1, int(math.ceil(cutoff / panel)))
    edges = np.linspace(0.0, cutoff, count + 1)
    return gl_panels(edges, order)
