"""Duhamel integral formulation and the contraction fixed point.

A mild solution solves u(t) = S_t u0 + integral_0^t S_{t-s} |u|^(p-2)u(s) ds.
On a uniform time ladder the integral term is realized by stepping
w_{k+1} = S_h(w_k + (dt/2) g_k) + (dt/2) g_{k+1} (trapezoid in the source),
and the fixed point is approached by plain iteration from v = S_t u0.  The
iteration contracts for data small in the Morrey sense; its divergence
(increments growing) is the observable signature of leaving the contraction
ball, and is reported rather than suppressed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SolverError
from .exponents import FlowParams
from .flow import FlowControls, run_flow
from .geometry import RadialField, SpaceTimeField
from .heat import LinearStepper
from .norms import morrey_norm_radial, parabolic_morrey_norm

__all__ = [
    "PicardDiagnostics",
    "duhamel",
    "semigroup_ladder",
    "picard_solve",
    "compare_mild_vs_stepper",
    "bound_28_check",
    "epsilon0_scan",
]


@dataclass
class PicardDiagnostics:
    iterates: int
    increment_norms: list[float]
    contraction_ratios: list[float]
    converged: bool
    final_pmu_norm: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "iterates": self.iterates,
                "increment_norms": self.increment_norms,
                "contraction_ratios": self.contraction_ratios,
                "converged": self.converged,
                "final_pmu_norm": self.final_pmu_norm,
            }
        )


def _check_ladder(times: np.ndarray, dt: float) -> None:
    steps = np.diff(times)
    if times[0] != 0.0 or np.any(np.abs(steps - dt) > 1e-9 * dt):
        raise ParameterError("source ladder does not match the stepper time step")


def duhamel(g: SpaceTimeField, stepper: LinearStepper) -> SpaceTimeField:
    """Solve w_t - Laplace(w) = g with w(0) = 0 on g's uniform time ladder.

    The source enters each step with trapezoid weights, both halves
    propagated through the implicit solve; for a time-independent source the
    late-time limit is therefore the exact discrete elliptic solution.
    """
    _check_ladder(g.times, stepper.dt)
    out = np.zeros_like(g.slices)
    w = RadialField(g.grid, out[0])
    for k in range(g.n_times - 1):
        w = stepper.step(w, source=0.5 * (g.slices[k] + g.slices[k + 1]))
        out[k + 1] = w.values
    return SpaceTimeField(g.grid, g.times, out)


def semigroup_ladder(u0: RadialField, stepper: LinearStepper, n_steps: int) -> SpaceTimeField:
    """S_t u0 sampled on the ladder {0, dt, ..., n_steps*dt}."""
    slices = np.empty((n_steps + 1, u0.grid.M + 1))
    slices[0] = u0.values
    v = u0
    for k in range(n_steps):
        v = stepper.step(v)
        slices[k + 1] = v.values
    times = stepper.dt * np.arange(n_steps + 1)
    return SpaceTimeField(u0.grid, times, slices)


def picard_solve(u0: RadialField, params: FlowParams, T: float,
                 max_iter: int = 50, tol: float = 1e-8, n_steps: int = 200,
                 scheme: str = "implicit_euler") -> tuple[SpaceTimeField, PicardDiagnostics]:
    """Fixed-point iteration v <- S_t u0 + Duhamel(|v|^(p-2) v) on [0, T].

    Convergence is declared on the relative parabolic-Morrey increment
    falling below ``tol``; divergence on three consecutively growing
    increments (or numeric overflow of the iterates).
    """
    if not T > 0.0:
        raise ParameterError(f"final time must be positive, got {T}")
    p = params.p
    stepper = LinearStepper(u0.grid, dt=T / n_steps, scheme=scheme)
    w0 = semigroup_ladder(u0, stepper, n_steps)

    v = w0
    inc_norms: list[float] = []
    grew = 0
    converged = False
    for it in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            g_vals = np.abs(v.slices) ** (p - 2.0) * v.slices
        if not np.all(np.isfinite(g_vals)):
            break
        g = SpaceTimeField(u0.grid, v.times, g_vals)
        w = duhamel(g, stepper)
        v_next = SpaceTimeField(u0.grid, v.times, w0.slices + w.slices)
        if not np.all(np.isfinite(v_next.slices)):
            break
        inc = parabolic_morrey_norm(v_next - v, p, params.mu)
        inc_norms.append(inc)
        ref = parabolic_morrey_norm(v_next, p, params.mu)
        v = v_next
        if not (math.isfinite(inc) and math.isfinite(ref)):
            break
        if inc <= tol * max(ref, 1e-300):
            converged = True
            break
        if len(inc_norms) >= 2 and inc_norms[-1] > inc_norms[-2]:
            grew += 1
            if grew >= 3:
                break
        else:
            grew = 0

    ratios = [
        inc_norms[k + 1] / inc_norms[k]
        for k in range(len(inc_norms) - 1)
        if inc_norms[k] > 0.0
    ]
    final = parabolic_morrey_norm(v, p, params.mu) if np.all(np.isfinite(v.slices)) else math.inf
    diag = PicardDiagnostics(
        iterates=len(inc_norms),
        increment_norms=inc_norms,
        contraction_ratios=ratios,
        converged=converged,
        final_pmu_norm=final,
    )
    return v, diag


def compare_mild_vs_stepper(u0: RadialField, params: FlowParams, T: float,
                            n_steps: int = 200,
                            scheme: str = "implicit_euler") -> float:
    """Sup-norm mismatch between the fixed point and the nonlinear stepper on [T/2, T].

    The two constructions discretize the same solution independently; their
    agreement (shrinking under refinement) is the uniqueness cross-check.
    """
    v, diag = picard_solve(u0, params, T, n_steps=n_steps, scheme=scheme)
    if not diag.converged:
        raise SolverError("fixed-point iteration did not converge; no mild solution to compare")
    dt = T / n_steps
    controls = FlowControls(dt_max=dt, safety=math.inf, scheme=scheme, snapshot_every=1)
    traj, _ = run_flow(u0, params, horizon=T, controls=controls)

    worst = 0.0
    for k, t in enumerate(v.times):
        if t < T / 2.0 - 1e-12:
            continue
        j = int(np.argmin(np.abs(traj.spacetime.times - t)))
        if abs(traj.spacetime.times[j] - t) > 0.51 * dt:
            continue
        ref = traj.spacetime.slices[j]
        denom = max(float(np.max(np.abs(ref))), 1e-300)
        worst = max(worst, float(np.max(np.abs(v.slices[k] - ref))) / denom)
    return worst


def bound_28_check(profile: RadialField, amps, params: FlowParams, T: float,
                   n_steps: int = 200) -> list[tuple[float, float | None]]:
    """Ratio of the solution's parabolic Morrey norm to the data's Morrey norm per amplitude.

    Boundedness of the ratio across amplitudes realizes the linear-in-data
    a-priori bound; amplitudes where the iteration diverges are marked None.
    """
    out: list[tuple[float, float | None]] = []
    for amp in amps:
        if amp == 0.0:
            raise ParameterError("amplitude 0 is degenerate (0/0 ratio); scan positive amplitudes")
        u0 = RadialField(profile.grid, amp * profile.values)
        data_norm = morrey_norm_radial(u0, 2.0, params.lam).value
        v, diag = picard_solve(u0, params, T, n_steps=n_steps)
        if not diag.converged:
            out.append((float(amp), None))
            continue
        out.append((float(amp), diag.final_pmu_norm / data_norm))
    return out


def epsilon0_scan(profile: RadialField, params: FlowParams, T: float,
                  c_lo: float, c_hi: float, n_bisect: int = 12,
                  n_steps: int = 200) -> dict:
    """Bisect the amplitude where the fixed-point iteration stops converging.

    Returns the empirical critical amplitude, the matching Morrey norm of the
    data (the empirical smallness threshold for this profile), and the full
    bisection trace.
    """
    def converges(c: float) -> bool:
        u0 = RadialField(profile.grid, c * profile.values)
        _, diag = picard_solve(u0, params, T, n_steps=n_steps)
        return diag.converged

    if not converges(c_lo):
        raise ParameterError(f"lower bracket c={c_lo} must converge")
    if converges(c_hi):
        raise ParameterError(f"upper bracket c={c_hi} must diverge")
    trace = []
    lo, hi = float(c_lo), float(c_hi)
    for _ in range(n_bisect):
        mid = math.sqrt(lo * hi)
        ok = converges(mid)
        trace.append({"c": mid, "converged": ok})
        if ok:
            lo = mid
        else:
            hi = mid
    threshold = lo
    eps0 = threshold * morrey_norm_radial(profile, 2.0, params.lam).value
    return {
        "threshold_amplitude": threshold,
        "bracket": [lo, hi],
        "eps0_empirical": eps0,
        "trace": trace,
    }
