"""Scenario runner: reproducible experiments over all package modules.

Each subcommand resolves an ExperimentConfig (flags > config file >
defaults), runs one scenario, and writes an artifact directory: the resolved
config echo, CSV tables, JSON reports, rendered figures, and a manifest with
SHA-256 digests of every output.  Identical config and seed produce
byte-identical numeric outputs.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, figures
from .errors import GridError, MorreyflowError, ParameterError
from .exponents import derive_params, joseph_lundgren, singular_steady_coefficient
from .flow import FlowControls, run_flow, scaling_test, verify_ball
from .geometry import make_grid, rescale_field
from .heat import decay_check
from .mild import epsilon0_scan, picard_solve
from .minimal import classify, minimal_solution, theorem41_margin_scan
from .norms import morrey_norm_radial, morrey_norm_sampled
from .profiles import make_profile

__all__ = ["ExperimentConfig", "run_scenario", "list_scenarios", "main", "rng_stream"]


@dataclass
class ExperimentConfig:
    """Full description of one scenario run; round-trips through JSON losslessly."""

    name: str = "constants"
    p: float = 4.0
    n: int = 5
    R: float = 1.0
    M: int = 400
    grading: float = 2.0
    profile: str = "power"
    amplitude: float = 0.05
    profile_csv: str | None = None
    q: float = 2.0
    horizon: float = 1.0
    T: float = 0.1
    t_check: float = 0.05
    t_small: float = 0.01
    levels: list[int] = field(default_factory=lambda: [16, 64, 256])
    c_lo: float = 0.05
    c_hi: float = 5.0
    c_grid: list[float] = field(default_factory=lambda: [0.05, 0.5, 1.0, 2.0, 5.0])
    scales: list[float] = field(default_factory=lambda: [0.5])
    dt_max: float = 1e-3
    scheme: str = "implicit_euler"
    n_steps: int = 200
    samples: int = 4000
    seed: int = 12345
    plots: bool = True

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=2)


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Named random stream: scenarios never share or shift each other's draws."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode("utf-8")),))
    )


def _stream_seed(seed: int, name: str) -> int:
    return int(rng_stream(seed, name).integers(0, 2**31 - 1))


# ---------------------------------------------------------------------------
# output helpers

def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) if isinstance(x, (int, float, np.floating))
                              else str(x) for x in row) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, default=_jsonable)
        fh.write("\n")


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON-serializable: {type(o)}")


def _field_csv(path: Path, fld) -> None:
    _write_csv(path, ["radius", "value"], zip(fld.grid.radii, fld.values))


def _trajectory_csv(path: Path, traj) -> None:
    dt = np.concatenate([[0.0], traj.dt_history])[: traj.sup_norm.shape[0]]
    if dt.size < traj.sup_norm.shape[0]:
        dt = np.pad(dt, (0, traj.sup_norm.shape[0] - dt.size))
    _write_csv(
        path,
        ["t", "sup", "l2", "energy", "dt"],
        zip(traj.sup_norm[:, 0], traj.sup_norm[:, 1], traj.l2_norm[:, 1],
            traj.energy[:, 1], dt),
    )


# ---------------------------------------------------------------------------
# scenarios

def _setup(cfg: ExperimentConfig):
    params = derive_params(cfg.p, cfg.n)
    grid = make_grid(cfg.n, cfg.R, cfg.M, cfg.grading)
    return params, grid


def _profile(cfg: ExperimentConfig, params, grid):
    return make_profile(grid, cfg.profile, cfg.amplitude, params, cfg.profile_csv)


def _scenario_constants(cfg: ExperimentConfig, out: Path) -> dict:
    params = derive_params(cfg.p, cfg.n)
    coeffs = singular_steady_coefficient(params)
    p_jl = joseph_lundgren(cfg.n)
    obj = {
        "alpha": params.alpha,
        "lambda": params.lam,
        "mu": params.mu,
        "two_star": params.two_star,
        # strict JSON has no Infinity literal
        "p_jl": p_jl if np.isfinite(p_jl) else "inf",
        "c_star_paper": coeffs["paper_constant"],
        "c_star_residual": coeffs["c_residual"],
    }
    print(json.dumps(obj, sort_keys=True))
    _write_json(out / "constants.json", obj)
    return obj


def _scenario_morrey(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    f = _profile(cfg, params, grid)
    radial = morrey_norm_radial(f, cfg.q, params.lam)
    sampled = morrey_norm_sampled(
        f, cfg.q, params.lam, samples=cfg.samples,
        seed=_stream_seed(cfg.seed, "morrey-sampled"),
    )
    _field_csv(out / "profile_field.csv", f)
    _write_csv(out / "morrey_profile.csv", ["radius", "quotient"], radial.profile)
    _write_json(out / "morrey.json", {
        "radial": json.loads(radial.to_json()),
        "sampled": json.loads(sampled.to_json()),
    })
    if cfg.plots:
        figures.save_morrey_profile(radial, out / "morrey_profile.png")
        figures.save_field(f, out / "profile_field.png")
    return {"radial": radial.value, "sampled": sampled.value}


def _scenario_decay(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    f = _profile(cfg, params, grid)
    prof = decay_check(f, params, np.geomspace(1e-4, 1e-1, 25), scheme=cfg.scheme)
    _write_csv(out / "decay.csv", ["t", "scaled_sup", "morrey"],
               zip(prof["t"], prof["scaled_sup"], prof["morrey"]))
    ratio = float(prof["scaled_sup"].max() / prof["scaled_sup"].min())
    _write_json(out / "decay.json", {"scaled_sup_max_over_min": ratio})
    if cfg.plots:
        figures.save_decay(prof, out / "decay.png")
    return {"scaled_sup_max_over_min": ratio}


def _scenario_simulate(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    f = _profile(cfg, params, grid)
    controls = FlowControls(dt_max=cfg.dt_max, scheme=cfg.scheme,
                            snapshot_every=max(1, cfg.n_steps // 8))
    traj, report = run_flow(f, params, cfg.horizon, controls)
    _trajectory_csv(out / "trajectory.csv", traj)
    _write_json(out / "report.json", json.loads(report.to_json()))
    if cfg.plots:
        figures.save_trajectory(traj, out / "trajectory.png")
    return {"outcome": report.outcome, "T_est": report.T_est}


def _scenario_picard(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    f = _profile(cfg, params, grid)
    v, diag = picard_solve(f, params, cfg.T, n_steps=cfg.n_steps, scheme=cfg.scheme)
    ratios = diag.contraction_ratios + [float("nan")] * (
        len(diag.increment_norms) - len(diag.contraction_ratios) - 1
    )
    _write_csv(out / "increments.csv", ["iteration", "increment_norm", "ratio"],
               [(k + 1, inc, ratios[k] if k < len(ratios) else float("nan"))
                for k, inc in enumerate(diag.increment_norms)])
    _field_csv(out / "fixed_point_final.csv", v.slice_at(v.n_times - 1))
    _write_json(out / "picard.json", json.loads(diag.to_json()))
    if cfg.plots:
        figures.save_picard(diag, out / "picard.png")
    return {"converged": diag.converged, "iterates": diag.iterates}


def _scenario_scan_eps(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    base = make_profile(grid, cfg.profile, 1.0, params, cfg.profile_csv)
    scan = epsilon0_scan(base, params, cfg.T, cfg.c_lo, cfg.c_hi, n_steps=cfg.n_steps)
    _write_csv(out / "bisection_trace.csv", ["amplitude", "converged"],
               [(row["c"], int(row["converged"])) for row in scan["trace"]])
    _write_json(out / "scan_eps.json", scan)
    if cfg.plots:
        cs = [row["c"] for row in scan["trace"]]
        oks = [int(row["converged"]) for row in scan["trace"]]
        figures.save_scan(cs, oks, out / "scan_eps.png", "amplitude",
                          "iteration converged", logx=True)
    return {"threshold_amplitude": scan["threshold_amplitude"],
            "eps0_empirical": scan["eps0_empirical"]}


def _scenario_ball_blowup(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    f = _profile(cfg, params, grid)
    controls = FlowControls(dt_max=cfg.dt_max, scheme=cfg.scheme, snapshot_every=50)
    result = verify_ball(f, params, controls)
    traj, _ = run_flow(f, params, horizon=2.0 * result["T_bound"], controls=controls)
    _trajectory_csv(out / "trajectory.csv", traj)
    _write_json(out / "ball.json", result)
    if cfg.plots:
        figures.save_trajectory(traj, out / "trajectory.png")
    return {k: result[k] for k in ("E0", "l2", "T_bound", "T_num", "ok")}


def _scenario_scaling(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    f = _profile(cfg, params, grid)
    controls = FlowControls(dt_max=cfg.dt_max, scheme=cfg.scheme)
    rows = []
    for R in cfg.scales:
        dev = scaling_test(f, params, R, cfg.t_check, controls)
        g = rescale_field(f, R, params.alpha)
        norm_ratio = (morrey_norm_radial(g, 2.0, params.lam).value
                      / morrey_norm_radial(f, 2.0, params.lam).value)
        rows.append((R, dev, norm_ratio))
    _write_csv(out / "scaling.csv", ["scale", "flow_deviation", "data_norm_ratio"], rows)
    _write_json(out / "scaling.json",
                {"rows": [{"scale": a, "flow_deviation": b, "data_norm_ratio": c}
                          for a, b, c in rows]})
    if cfg.plots:
        figures.save_scan([r[0] for r in rows], [r[1] for r in rows],
                          out / "scaling.png", "scale factor", "flow deviation")
    return {"max_deviation": max(r[1] for r in rows)}


def _scenario_minimal(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    f = _profile(cfg, params, grid)
    runs, report = minimal_solution(f, cfg.levels, params, horizon=cfg.t_small,
                                    snapshot_every=64)
    for run in runs:
        _write_csv(out / f"level_{run.level}.csv",
                   ["t"] + [f"probe_r{r:g}" for r in run.probe_radii],
                   np.column_stack([run.probe_times, run.probe_matrix]))
    cls = classify(f, params, cfg.levels, cfg.t_small, horizon_flow=cfg.horizon)
    _write_json(out / "classification.json", json.loads(cls.to_json()))
    if cfg.plots:
        vals = np.array([run.probe_at(cfg.t_small) for run in runs])
        figures.save_probe_divergence([run.level for run in runs],
                                      runs[0].probe_radii, vals,
                                      out / "probe_divergence.png")
    return {"outcome": cls.outcome,
            "monotonicity_violation": report["monotonicity_violation"]}


def _scenario_scan_m(cfg: ExperimentConfig, out: Path) -> dict:
    params, grid = _setup(cfg)
    scan = theorem41_margin_scan(params, cfg.c_grid, cfg.levels, cfg.t_small,
                                 grid, horizon_flow=cfg.horizon)
    _write_csv(out / "scan_m.csv", ["amplitude", "outcome"],
               [(row["c"], row["outcome"]) for row in scan["results"]])
    _write_json(out / "scan_m.json", scan)
    if cfg.plots:
        rank = {"GlobalBounded": 0, "Inconclusive": 1, "FiniteTimeBlowup": 2,
                "InstantaneousComplete": 3}
        figures.save_scan([row["c"] for row in scan["results"]],
                          [rank.get(row["outcome"], 1) for row in scan["results"]],
                          out / "scan_m.png", "amplitude of the singular profile",
                          "outcome rank", logx=True)
    return {"window_low": scan["window_low"], "window_high": scan["window_high"]}


_SCENARIOS = {
    "constants": (_scenario_constants,
                  "exponent bundle, stability threshold and steady-state coefficients"),
    "morrey": (_scenario_morrey,
               "Morrey norm of a profile: centered quadrature vs off-center Monte Carlo"),
    "decay": (_scenario_decay,
              "heat-semigroup decay: scaled sup-norm and Morrey-norm boundedness"),
    "simulate": (_scenario_simulate,
                 "nonlinear flow with adaptive steps, blow-up detection and rate fit"),
    "picard": (_scenario_picard,
               "Duhamel fixed-point iteration with contraction diagnostics"),
    "scan-eps": (_scenario_scan_eps,
                 "bisection for the critical amplitude of fixed-point convergence"),
    "ball-blowup": (_scenario_ball_blowup,
                    "negative-energy blow-up bound checked against a real run"),
    "scaling": (_scenario_scaling,
                "scaling symmetry of data norms and of the flow itself"),
    "minimal": (_scenario_minimal,
                "truncated monotone approximations and blow-up classification"),
    "scan-m": (_scenario_scan_m,
               "classification of singular-profile amplitudes against both steady coefficients"),
}


def list_scenarios() -> str:
    lines = ["available scenarios:"]
    for name, (_, desc) in _SCENARIOS.items():
        lines.append(f"  {name:<12} {desc}")
    return "\n".join(lines) + "\n"


def run_scenario(cfg: ExperimentConfig, out_dir) -> dict:
    """Run one scenario, writing config echo, outputs and the hash manifest."""
    if cfg.name not in _SCENARIOS:
        raise ParameterError(
            f"unknown scenario {cfg.name!r}; see the `list` subcommand"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json() + "\n", encoding="utf-8")
    summary = _SCENARIOS[cfg.name][0](cfg, out)
    files = sorted(p.name for p in out.iterdir()
                   if p.is_file() and p.name != "manifest.json")
    manifest = {
        "scenario": cfg.name,
        "seed": cfg.seed,
        "version": __version__,
        "files": {
            name: hashlib.sha256((out / name).read_bytes()).hexdigest()
            for name in files
        },
    }
    _write_json(out / "manifest.json", manifest)
    return summary


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None,
                        help="JSON config file (flags override file values)")
    common.add_argument("--out", type=str, default=None, help="artifact directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--p", type=float, default=None)
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--R", type=float, default=None)
    common.add_argument("--M", type=int, default=None)
    common.add_argument("--grading", type=float, default=None)
    common.add_argument("--profile", type=str, default=None,
                        choices=["power", "bubble", "custom-csv"])
    common.add_argument("--amp", type=float, default=None, dest="amplitude")
    common.add_argument("--profile-csv", type=str, default=None)
    common.add_argument("--scheme", type=str, default=None,
                        choices=["implicit_euler", "crank_nicolson"])
    common.add_argument("--dt-max", type=float, default=None, dest="dt_max")
    common.add_argument("--n-steps", type=int, default=None, dest="n_steps")
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--plots", dest="plots", action="store_true", default=None)
    common.add_argument("--no-plots", dest="plots", action="store_false")

    parser = argparse.ArgumentParser(
        prog="morreyflow",
        description="numerical experiments for the supercritical reaction-diffusion flow",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print the scenario catalog")

    extra = {
        "constants": [],
        "morrey": [("--q", float, "q")],
        "decay": [],
        "simulate": [("--horizon", float, "horizon")],
        "picard": [("--T", float, "T")],
        "scan-eps": [("--T", float, "T"), ("--c-lo", float, "c_lo"),
                     ("--c-hi", float, "c_hi")],
        "ball-blowup": [],
        "scaling": [("--t-check", float, "t_check"),
                    ("--scales", str, "scales")],
        "minimal": [("--levels", str, "levels"), ("--t-small", float, "t_small"),
                    ("--horizon", float, "horizon")],
        "scan-m": [("--c-grid", str, "c_grid"), ("--levels", str, "levels"),
                   ("--t-small", float, "t_small"), ("--horizon", float, "horizon")],
    }
    for name in _SCENARIOS:
        sp = sub.add_parser(name, parents=[common], help=_SCENARIOS[name][1])
        for flag, typ, dest in extra[name]:
            sp.add_argument(flag, type=typ, default=None, dest=dest)
    return parser


_LIST_FIELDS = {"levels": int, "c_grid": float, "scales": float}

# per-scenario defaults applied under the global defaults
_SCENARIO_DEFAULTS = {
    "ball-blowup": {"profile": "bubble", "amplitude": 12.0, "M": 500, "dt_max": 1e-4},
    "scaling": {"profile": "bubble", "amplitude": 1.0, "t_check": 0.05, "dt_max": 2e-4},
    "minimal": {"amplitude": 5.0, "horizon": 2.0},
    "scan-m": {"horizon": 2.0},
    "simulate": {"profile": "bubble", "amplitude": 12.0, "horizon": 1.0},
}


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values = dataclasses.asdict(ExperimentConfig())
    values["name"] = args.command
    values.update(_SCENARIO_DEFAULTS.get(args.command, {}))
    if getattr(args, "config", None):
        file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(file_values) - set(values)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        values.update(file_values)
    for fld in dataclasses.fields(ExperimentConfig):
        flag_val = getattr(args, fld.name, None)
        if flag_val is not None and fld.name != "name":
            values[fld.name] = flag_val
    for key, typ in _LIST_FIELDS.items():
        raw = values[key]
        if isinstance(raw, str):
            values[key] = [typ(tok) for tok in raw.split(",") if tok]
        else:
            values[key] = [typ(tok) for tok in raw]
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        sys.stdout.write(list_scenarios())
        return 0
    out_dir = Path(args.out) if args.out else Path("out") / args.command
    cfg = None
    try:
        cfg = _resolve_config(args)
        summary = run_scenario(cfg, out_dir)
    except (ParameterError, GridError) as exc:
        _emit_error(out_dir, exc, cfg)
        return 2
    except MorreyflowError as exc:
        _emit_error(out_dir, exc, cfg)
        return 1
    print(json.dumps({"scenario": args.command, "out": str(out_dir),
                      "summary": summary}, sort_keys=True, default=_jsonable))
    return 0


def _emit_error(out_dir: Path, exc: Exception, cfg: ExperimentConfig | None) -> None:
    obj = {"error": type(exc).__name__, "message": str(exc)}
    if cfg is not None:
        obj["p"] = cfg.p
        if cfg.n >= 3:
            obj["two_star"] = 2.0 * cfg.n / (cfg.n - 2.0)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "error.json", obj)
    print(json.dumps(obj, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
