"""Nonlinear dynamics: time stepping, blow-up detection, energy criterion, scaling law.

The reaction-diffusion step is semi-implicit: diffusion by the implicit
schemes of the heat module, reaction |u|^(p-2) u explicit.  The time step
adapts to the reaction timescale, dt = min(dt_max, safety / sup|u|^(p-2)),
which keeps the explicit term stable, preserves the comparison principle
(the pointwise update u + dt*|u|^(p-2)u is monotone while
dt*(p-1)*sup^(p-2) <= 1), and resolves the blow-up rate down to the dt
floor.  Blow-up is declared on crossing the configured sup threshold; the
blow-up time is then estimated by fitting sup|u| ~ kappa*(T-t)^(-beta).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import FitError, ParameterError, SolverError
from .exponents import FlowParams, ball_blowup_bound, holder_constant
from .geometry import RadialField, SpaceTimeField, rescale_field
from .heat import LinearStepper
from .norms import energy, lq_norm

__all__ = [
    "FlowControls",
    "Trajectory",
    "BlowupReport",
    "run_flow",
    "fit_blowup_rate",
    "verify_ball",
    "scaling_test",
]

OUTCOME_GLOBAL = "GlobalBounded"
OUTCOME_BLOWUP = "FiniteTimeBlowup"
OUTCOME_INSTANT = "InstantaneousComplete"
OUTCOME_INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class FlowControls:
    """Stepper and threshold settings for one nonlinear run."""

    dt_max: float = 1e-3
    dt_min: float = 1e-14
    safety: float = 0.1
    sup_threshold: float = 1e8          # U_max: sup above this declares blow-up
    scheme: str = "implicit_euler"
    snapshot_every: int = 1
    max_steps: int = 2_000_000


@dataclass
class Trajectory:
    """Scalar histories at every step plus (possibly strided) field snapshots."""

    spacetime: SpaceTimeField
    sup_norm: np.ndarray        # rows (t, sup|u|)
    l2_norm: np.ndarray         # rows (t, ||u||_2)
    energy: np.ndarray          # rows (t, E(u))
    dt_history: np.ndarray

    @property
    def final_time(self) -> float:
        return float(self.sup_norm[-1, 0])


@dataclass
class BlowupReport:
    outcome: str
    T_est: float | None
    rate_exponent: float | None
    final_sup: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "outcome": self.outcome,
                "T_est": self.T_est,
                "rate_exponent": self.rate_exponent,
                "final_sup": self.final_sup,
            }
        )


def _reaction(values: np.ndarray, p: float) -> np.ndarray:
    return np.abs(values) ** (p - 2.0) * values


def run_flow(u0: RadialField, params: FlowParams, horizon: float,
             controls: FlowControls = FlowControls()) -> tuple[Trajectory, BlowupReport]:
    """Evolve u_t = Laplace(u) + |u|^(p-2) u from u0 up to ``horizon``.

    Stops early once sup|u| crosses the blow-up threshold; the report then
    carries the rate-fit estimate of the blow-up time (the last step time
    systematically undershoots it).
    """
    if not horizon > 0.0:
        raise ParameterError(f"horizon must be positive, got {horizon}")
    p = params.p
    stepper = LinearStepper(u0.grid, dt=max(controls.dt_max, controls.dt_min),
                            scheme=controls.scheme)
    u = u0.copy()
    t = 0.0
    times = [0.0]
    sups = [u.sup_norm()]
    l2s = [lq_norm(u, 2.0)]
    ens = [energy(u, p)]
    dts: list[float] = []
    snap_t = [0.0]
    snaps = [u.values.copy()]

    blown = False
    step_no = 0
    while t < horizon * (1.0 - 1e-12) and step_no < controls.max_steps:
        sup = sups[-1]
        dt_react = controls.safety / sup ** (p - 2.0) if sup > 0.0 else math.inf
        if sup > controls.sup_threshold or dt_react < controls.dt_min:
            blown = True
            dts.append(dt_react)
            break
        dt = min(controls.dt_max, dt_react, horizon - t)
        u = stepper.step(u, dt=dt, source=_reaction(u.values, p))
        t += dt
        step_no += 1
        times.append(t)
        sups.append(u.sup_norm())
        l2s.append(lq_norm(u, 2.0))
        ens.append(energy(u, p))
        dts.append(dt)
        if step_no % controls.snapshot_every == 0:
            snap_t.append(t)
            snaps.append(u.values.copy())

    if snap_t[-1] != t:
        snap_t.append(t)
        snaps.append(u.values.copy())

    traj = Trajectory(
        spacetime=SpaceTimeField(u0.grid, np.array(snap_t), np.array(snaps)),
        sup_norm=np.column_stack([times, sups]),
        l2_norm=np.column_stack([times, l2s]),
        energy=np.column_stack([times, ens]),
        dt_history=np.array(dts),
    )

    final_sup = sups[-1]
    if blown:
        T_est, beta = fit_blowup_rate(traj, params,
                                      threshold=controls.sup_threshold / 100.0)
        if T_est is None:
            T_est = t
        report = BlowupReport(OUTCOME_BLOWUP, T_est, beta, final_sup)
    elif t >= horizon * (1.0 - 1e-12) and final_sup < controls.sup_threshold / 10.0:
        report = BlowupReport(OUTCOME_GLOBAL, None, None, final_sup)
    else:
        report = BlowupReport(OUTCOME_INCONCLUSIVE, None, None, final_sup)
    return traj, report


def fit_blowup_rate(traj: Trajectory, params: FlowParams,
                    threshold: float = 1e6) -> tuple[float | None, float | None]:
    """Least-squares fit of log sup|u| = log kappa - beta*log(T - t) with T free.

    Uses samples with sup above ``threshold``; returns (None, None) when the
    samples cannot support the fit (too few, or no growth).
    """
    t = traj.sup_norm[:, 0]
    s = traj.sup_norm[:, 1]
    mask = s > threshold
    if int(mask.sum()) < 10:
        return None, None
    t = t[mask]
    s = np.log(s[mask])
    if np.ptp(s) < 1e-12:
        return None, None
    t_last = t[-1]
    span = max(t_last - t[0], 1e-30)
    d = t_last - t             # distances to the last sample, >= 0 exactly

    def fit_at(theta: float):
        gap = math.exp(theta) * span           # T - t_last, kept unsubtracted
        x = np.log(d + gap)
        A = np.column_stack([np.ones_like(x), x])
        coef, *_ = np.linalg.lstsq(A, s, rcond=None)
        r = A @ coef - s
        return float(r @ r), coef

    res = minimize_scalar(lambda th: fit_at(th)[0], bounds=(-40.0, 3.0),
                          method="bounded", options={"xatol": 1e-13})
    if not res.success:
        return None, None
    _, coef = fit_at(res.x)
    T = t_last + math.exp(res.x) * span
    beta = -float(coef[1])
    if not (math.isfinite(T) and math.isfinite(beta)):
        return None, None
    return float(T), beta


def verify_ball(u0: RadialField, params: FlowParams,
                controls: FlowControls = FlowControls()) -> dict:
    """Check the negative-energy blow-up bound against an actual run.

    Returns E0, the L2 norm, the closed-form latest blow-up time T_bound, the
    fitted numerical blow-up time T_num, and flags: ``ok`` for T_num within
    5% slack of T_bound, ``ineq_ok`` for the discrete differential inequality
    d(||u||^2/2)/dt >= 0.9*c0*||u||_2^p on every step below the sup threshold,
    and ``lower_bound_ok`` for the L2 lower-bound curve within 10%.
    """
    p = params.p
    E0 = energy(u0, p)
    if not E0 < 0.0:
        raise ParameterError(f"energy criterion needs E(u0) < 0, got {E0}")
    vol = u0.grid.volume
    l2 = lq_norm(u0, 2.0)
    T_bound = ball_blowup_bound(params, vol, l2)
    c0 = holder_constant(params, vol)

    traj, report = run_flow(u0, params, horizon=2.0 * T_bound, controls=controls)
    T_num = report.T_est if report.outcome == OUTCOME_BLOWUP else None

    t = traj.l2_norm[:, 0]
    y = traj.l2_norm[:, 1]
    sups = traj.sup_norm[:, 1]
    ineq_ok = True
    margin = math.inf
    for k in range(len(t) - 1):
        if sups[k + 1] > controls.sup_threshold:
            break
        dt = t[k + 1] - t[k]
        lhs = 0.5 * (y[k + 1] ** 2 - y[k] ** 2) / dt
        rhs = c0 * y[k] ** p
        margin = min(margin, lhs - 0.9 * rhs)
        if lhs < 0.9 * rhs:
            ineq_ok = False

    base = y[0] ** ((2.0 - p) / 2.0) - c0 * (p - 2.0) * t
    valid = base > 0.0
    curve = np.where(valid, np.maximum(base, 1e-300) ** (-2.0 / (p - 2.0)), 0.0)
    lower_bound_ok = bool(np.all(y[valid] >= 0.9 * curve[valid]))

    return {
        "E0": E0,
        "l2": l2,
        "T_bound": T_bound,
        "T_num": T_num,
        "ok": (T_num is not None) and (T_num <= 1.05 * T_bound),
        "ineq_ok": ineq_ok,
        "ineq_margin": margin,
        "lower_bound_ok": lower_bound_ok,
        "rate_exponent": report.rate_exponent,
        "outcome": report.outcome,
    }


def scaling_test(u0: RadialField, params: FlowParams, R: float, t_check: float,
                 controls: FlowControls = FlowControls()) -> float:
    """Deviation of the flow from its scaling symmetry.

    Runs u from u0 on its ball up to t_check and w from the rescaled data on
    the R-scaled ball up to R^2*t_check, then returns the relative sup-norm
    mismatch between w and the rescaled u.  Exact invariance holds in the
    continuum, so the deviation is pure discretization error.
    """
    if not 0.0 < R <= 1.0:
        raise ParameterError(f"scale factor must lie in (0, 1], got {R}")
    traj_u, rep_u = run_flow(u0, params, horizon=t_check, controls=controls)
    if rep_u.outcome == OUTCOME_BLOWUP:
        raise SolverError(
            f"reference run blew up before t_check={t_check}; pick a time inside the lifespan"
        )
    w0 = rescale_field(u0, R, params.alpha)
    traj_w, rep_w = run_flow(w0, params, horizon=R * R * t_check, controls=controls)
    if rep_w.outcome == OUTCOME_BLOWUP:
        raise SolverError("rescaled run blew up before its horizon")

    u_T = traj_u.spacetime.slices[-1]
    w_T = traj_w.spacetime.slices[-1]
    target = R ** (-params.alpha) * u_T
    denom = np.max(np.abs(target))
    if denom == 0.0:
        return float(np.max(np.abs(w_T)))
    return float(np.max(np.abs(w_T - target)) / denom)
