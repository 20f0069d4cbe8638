"""Closed-form exponents and constants of the supercritical flow.

For u_t - Laplace(u) = |u|^(p-2) u in dimension n >= 3 the natural scaling
exponents are

    alpha    = 2/(p-2)      (amplitude exponent of the scaling symmetry)
    lambda   = 4/(p-2)      (Morrey exponent for the initial data, = 2*alpha)
    mu       = 2p/(p-2)     (parabolic Morrey exponent, = lambda + 2)
    two_star = 2n/(n-2)     (supercriticality threshold: we require p > two_star)

Everything here is exact arithmetic on floats; no state, no discretization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

__all__ = [
    "FlowParams",
    "derive_params",
    "joseph_lundgren",
    "singular_steady_coefficient",
    "ball_blowup_bound",
]


@dataclass(frozen=True)
class FlowParams:
    """Exponent bundle for one run of the flow.

    Invariants (enforced by :func:`derive_params`): p > two_star, mu = lambda + 2,
    lam = 2*alpha, 0 < lam < n, 2 < mu < n.
    """

    p: float
    n: int
    alpha: float
    lam: float
    mu: float
    two_star: float


def derive_params(p: float, n: int) -> FlowParams:
    """Validate (p, n) and derive the exponent bundle.

    Raises ParameterError for n < 3 or p <= two_star = 2n/(n-2); the message
    names the threshold so callers can report it.
    """
    n = int(n)
    if n < 3:
        raise ParameterError(f"dimension n={n} is not supported; need n >= 3")
    two_star = 2.0 * n / (n - 2.0)
    p = float(p)
    if not p > two_star:
        raise ParameterError(
            f"exponent p={p} is not supercritical: need p > two_star = 2n/(n-2) = {two_star}"
        )
    alpha = 2.0 / (p - 2.0)
    return FlowParams(
        p=p,
        n=n,
        alpha=alpha,
        lam=2.0 * alpha,
        mu=2.0 * p / (p - 2.0),
        two_star=two_star,
    )


def joseph_lundgren(n: int) -> float:
    """Stability threshold exponent 2 + 4/(n - 4 - 2*sqrt(n-1)).

    Finite only for n >= 11; returns +inf for 3 <= n <= 10.
    """
    n = int(n)
    if n < 3:
        raise ParameterError(f"dimension n={n} is not supported; need n >= 3")
    if n <= 10:
        return math.inf
    return 2.0 + 4.0 / (n - 4.0 - 2.0 * math.sqrt(n - 1.0))


def singular_steady_coefficient(params: FlowParams) -> dict[str, float]:
    """Coefficient of the singular steady state c*|x|^(-alpha) on R^n minus the origin.

    Plugging u(x) = c|x|^(-alpha) into -Laplace(u) = u^(p-1) and using
    Laplace(r^(-alpha)) = -alpha*(n-2-alpha)*r^(-alpha-2) together with
    alpha*(p-1) = alpha + 2 gives the matching condition

        c^(p-2) = alpha*(n - 2 - alpha).

    Returns both the residual-consistent coefficient ``c_residual`` solving that
    equation and the raw product ``paper_constant`` = alpha*(n-2-alpha), which is
    sometimes quoted directly as the coefficient.  They coincide only when
    p = 3; dynamics elsewhere in the package always use ``c_residual``.
    """
    alpha = params.alpha
    base = alpha * (params.n - 2.0 - alpha)
    if not alpha < params.n - 2.0:
        # cannot happen for p > two_star; kept as a guard for hand-built params
        raise ParameterError(
            f"alpha={alpha} >= n-2={params.n - 2}: no positive steady coefficient exists"
        )
    return {
        "c_residual": base ** (1.0 / (params.p - 2.0)),
        "paper_constant": base,
    }


def ball_blowup_bound(params: FlowParams, vol: float, l2norm: float) -> float:
    """Latest blow-up time for negative-energy data with the given L2 norm.

    Testing the equation with u gives d/dt (||u||^2 / 2) >= c_0 ||u||_2^p once
    E(u_0) < 0, where c_0 = ((p-2)/p) * vol^(1 - p/2) is the Hoelder constant
    with ((p-2)/p)||u||_p^p >= c_0 ||u||_2^p on a domain of volume ``vol``.
    The resulting bound is

        T = c_0^(-1) * (p-2)^(-1) * l2norm^((2-p)/2).

    The caller is responsible for having checked E(u_0) < 0.
    """
    if not vol > 0.0:
        raise ParameterError(f"domain volume must be positive, got {vol}")
    if not l2norm > 0.0:
        raise ParameterError(f"L2 norm must be positive, got {l2norm}")
    p = params.p
    c0 = ((p - 2.0) / p) * vol ** (1.0 - p / 2.0)
    return (1.0 / c0) * (1.0 / (p - 2.0)) * l2norm ** ((2.0 - p) / 2.0)


def holder_constant(params: FlowParams, vol: float) -> float:
    """The constant c_0 of :func:`ball_blowup_bound` (exposed for the flow checks)."""
    p = params.p
    return ((p - 2.0) / p) * vol ** (1.0 - p / 2.0)
