"""Deterministic fluid limit of the status chain and its Gaussian corrections.

Rescaling the (undetermined, active, blocked) counts by n and time by n
turns the chain into the ODE system

    u' = -2u - a - b,   a' = u + b,   b' = u + a,
    u(0) = 1, a(0) = b(0) = 0,

solved by u(t) = 2 exp(-t) - 1 and a(t) = b(t) = 1 - exp(-t).  The
undetermined fraction hits zero at t* = ln 2, where a(t*) = 1/2.

Fluctuations around the trajectory are Gaussian with covariance obtained by
propagating the local jump covariance through the linearized flow.  The
drift Jacobian J satisfies J @ J = -J, so its exponential has the closed
form exp(sJ) = I + (1 - exp(-s)) J.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

TIME_TO_ABSORPTION = math.log(2.0)


class FluidPoint(NamedTuple):
    t: float
    u: float
    a: float
    b: float


def drift(x: float, y: float, z: float) -> tuple[float, float, float]:
    """Mean increment field of the rescaled chain."""
    return (-2 * x - y - z, x + z, x + y)


def jacobian() -> np.ndarray:
    """Derivative of :func:`drift`, constant because the field is linear."""
    return np.array([[-2.0, -1.0, -1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])


def ode_solution(t: float) -> FluidPoint:
    """Closed-form trajectory; u + a + b == 1 for all t."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    e = math.exp(-t)
    return FluidPoint(t=t, u=2 * e - 1, a=1 - e, b=1 - e)


def t_star() -> float:
    """First zero of the undetermined fraction: ln 2."""
    return TIME_TO_ABSORPTION


def flow_matrix(s: float) -> np.ndarray:
    """exp(s J) for the drift Jacobian J.

    J is diagonalizable with eigenvalues {0, -1, -1} and satisfies
    J @ J = -J, hence exp(sJ) = I + (1 - exp(-s)) J exactly.
    """
    return np.eye(3) + (1.0 - math.exp(-s)) * jacobian()


def flow_matrix_series(s: float, terms: int = 50) -> np.ndarray:
    """Taylor-series evaluation of exp(s J); oracle for :func:`flow_matrix`."""
    j = jacobian()
    acc = np.eye(3)
    term = np.eye(3)
    for k in range(1, terms):
        term = term @ j * (s / k)
        acc = acc + term
    return acc


def local_covariance(s: float) -> np.ndarray:
    """Per-step covariance source along the trajectory (sum of jump outer
    products weighted by their limiting rates); symmetric for all s."""
    _, u, a, b = ode_solution(s)
    return np.array([
        [4 * u + a + b, -2 * u - b, -2 * u - a],
        [-2 * u - b, u + b, u],
        [-2 * u - a, u, u + a],
    ])


def _propagated(s: float, source: Callable[[float], np.ndarray]) -> np.ndarray:
    p = flow_matrix(TIME_TO_ABSORPTION - s)
    return p @ source(s) @ p.T


def _gauss_legendre_integral(
    integrand: Callable[[float], np.ndarray],
    lo: float,
    hi: float,
    pieces: int,
    nodes: int = 20,
) -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = np.zeros((3, 3))
    edges = np.linspace(lo, hi, pieces + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = (a + b) / 2, (b - a) / 2
        for xi, wi in zip(x, w):
            total += wi * half * integrand(mid + half * xi)
    return total


def _integrate_to_absorption(
    integrand: Callable[[float], np.ndarray], rtol: float = 1e-10
) -> np.ndarray:
    """Composite Gauss-Legendre over [0, t*], halving intervals until stable."""
    prev = _gauss_legendre_integral(integrand, 0.0, TIME_TO_ABSORPTION, pieces=1)
    for pieces in (2, 4, 8, 16):
        cur = _gauss_legendre_integral(integrand, 0.0, TIME_TO_ABSORPTION, pieces=pieces)
        if np.abs(cur - prev).max() < rtol:
            return cur
        prev = cur
    raise RuntimeError("quadrature failed to stabilize")


def covariance_matrix() -> np.ndarray:
    """Covariance of the limiting Gaussian vector at absorption time.

    Integrates the flow-propagated local covariance over [0, t*]; the result
    is symmetric, positive semidefinite and singular (the three rescaled
    counts sum to one, so fluctuations live in a plane).
    """
    return _integrate_to_absorption(lambda s: _propagated(s, local_covariance))


def clt_constants(m: np.ndarray | None = None) -> tuple[float, float, float]:
    """(variance of the set-size statistic, variance of the first component,
    covariance of the two complementary set statistics), derived from the
    absorption covariance matrix.

    With Y the limit vector, the set-size fluctuation is Y2 + Y1/2 and its
    complement is Y3 + Y1/2; the first component's variance is reported as
    the stopping-step constant (see :func:`discrete_step_covariance` for
    the discrete-step correction that actual simulations follow).
    """
    if m is None:
        m = covariance_matrix()
    var_size = m[1, 1] + m[0, 1] + m[0, 0] / 4
    var_first = m[0, 0]
    cov_pair = m[1, 2] + m[0, 1] / 2 + m[0, 2] / 2 + m[0, 0] / 4
    return float(var_size), float(var_first), float(cov_pair)


def discrete_step_covariance() -> np.ndarray:
    """Absorption covariance with the one-jump-per-step drift correction.

    The chain takes exactly one transition per time increment 1/n, so the
    conditional covariance of an increment is the jump outer-product sum
    minus drift (x) drift; in continuous time that squared-drift term is
    O(dt) and drops out, here it survives.  The drift happens to be an
    eigenvector of the Jacobian, so the correction collapses to
    (t*/4) f f^T with f = (-2, 1, 1): it shifts the first component's
    variance from 3/4 down to 3/4 - ln 2 while leaving the set-size
    statistics (orthogonal to f) untouched.
    """

    def corrected(s: float) -> np.ndarray:
        f = np.array(drift(*ode_solution(s)[1:]))
        return local_covariance(s) - np.outer(f, f)

    return _integrate_to_absorption(lambda s: _propagated(s, corrected))


def stopping_step_variance() -> float:
    """Asymptotic variance of the rescaled stopping step: 3/4 - ln 2.

    The stopping step is the absorption time of the undetermined count,
    whose fluctuation equals the first limit component divided by the
    drift slope (which is -1 at t*).
    """
    return float(discrete_step_covariance()[0, 0])
