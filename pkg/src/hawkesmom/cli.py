"""Command-line surface: simulate | moments | estimate | validate.

Exit codes: 0 success, 2 event-file parse errors, 3 estimation/convergence
failures, 4 trajectory capacity exceeded, 1 anything else.  Seeds come from
--seed, falling back to the HAWKES_SEED environment variable; stochastic
subcommands refuse to run without one so every run is reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import HawkesParams, intensity_on_grid, validate_params
from .errors import (
    CapacityExceeded,
    HawkesError,
    InsufficientData,
    NoConvergence,
    ParseError,
    SingularJacobian,
)
from .estimate import EstimateConfig, EstimateReport, estimate
from .io import (
    parse_events,
    report_to_dict,
    write_envelope_csv,
    write_events,
    write_intensity_csv,
    write_report_json,
    write_table_csv,
)
from .simulate import DEFAULT_EVENT_CAP, simulate_cluster, simulate_exact

__all__ = [
    "EXIT_OK",
    "EXIT_FAILURE",
    "EXIT_PARSE",
    "EXIT_CONVERGENCE",
    "EXIT_CAPACITY",
    "RunConfig",
    "HarnessReport",
    "cmd_simulate",
    "cmd_moments",
    "cmd_estimate",
    "cmd_validate",
    "main",
]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_CONVERGENCE = 3
EXIT_CAPACITY = 4

SEED_ENV_VAR = "HAWKES_SEED"


@dataclass
class RunConfig:
    """Resolved parameters of one CLI invocation."""

    command: str
    alpha: float | None = None
    beta: float | None = None
    lambda_inf: float | None = None
    lambda0: float | None = None
    horizon: float | None = None
    seed: int | None = None
    count: int = 20
    delta: float | None = None
    t0: float = 0.0
    init: tuple[float, float, float] = (0.5, 1.5, 2.0)
    unit: str = "minutes"
    method: str = "exact"
    grid_step: float = 0.01
    cap: int = DEFAULT_EVENT_CAP
    events_path: Path | None = None
    real_events_path: Path | None = None
    out_dir: Path = field(default_factory=lambda: Path("."))
    envelope: bool = False
    envelope_step: float | None = None

    def params(self) -> HawkesParams:
        return validate_params(self.alpha, self.beta, self.lambda_inf, self.lambda0)

    def require_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            return int(env)
        raise ValueError(
            f"a seed is required for stochastic runs: pass --seed or set {SEED_ENV_VAR}"
        )


@dataclass
class HarnessReport:
    """Per-trajectory estimates with summary statistics and envelope data."""

    reports: list[EstimateReport]
    summary: dict
    non_converged: list[int]
    envelope_grid: np.ndarray | None = None
    envelope_counts: np.ndarray | None = None
    real_counts: np.ndarray | None = None


def _simulator(method: str):
    try:
        return {"exact": simulate_exact, "cluster": simulate_cluster}[method]
    except KeyError:
        raise ValueError(f"unknown simulation method {method!r}") from None


def cmd_simulate(cfg: RunConfig) -> list[Path]:
    """Simulate one trajectory; write the events file and an intensity grid."""
    params = cfg.params()
    seed = cfg.require_seed()
    traj = _simulator(cfg.method)(params, cfg.horizon, seed, cap=cfg.cap, unit=cfg.unit)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    events_path = write_events(cfg.out_dir / "events.txt", traj.events)
    n_pts = int(round(cfg.horizon / cfg.grid_step)) + 1
    grid = np.arange(n_pts) * cfg.grid_step
    values = intensity_on_grid(params, traj.events, grid)
    intensity_path = write_intensity_csv(cfg.out_dir / "intensity.csv", grid, values)
    print(f"simulated {len(traj.events)} events on [0, {cfg.horizon}] (seed {seed})")
    print(f"wrote {events_path} and {intensity_path}")
    return [events_path, intensity_path]


def cmd_moments(cfg: RunConfig) -> dict:
    """Print theoretical stationary window moments and intensity moments."""
    from .moments import limit_intensity_moments, moment_triple

    params = cfg.params()
    triple = moment_triple(params, cfg.delta)
    lam1, lam2, lam3 = limit_intensity_moments(params)
    payload = {
        "params": {"alpha": params.alpha, "beta": params.beta,
                   "lambda_inf": params.lambda_inf, "lambda0": params.lambda0},
        "delta": cfg.delta,
        "m1": triple.m1,
        "m2": triple.m2,
        "m3": triple.m3,
        "Lambda1": lam1,
        "Lambda2": lam2,
        "Lambda3": lam3,
        "lambda_star": params.lambda_star,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return payload


def cmd_estimate(cfg: RunConfig) -> EstimateReport:
    """Fit (alpha, beta, lambda_inf) to an events file; write a JSON report."""
    events = parse_events(cfg.events_path, unit=cfg.unit, horizon=cfg.horizon)
    report = estimate(events, EstimateConfig(delta=cfg.delta, t0=cfg.t0, init=cfg.init))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out = write_report_json(cfg.out_dir / "estimate.json", report_to_dict(report))
    p = report.params_hat
    print(f"alpha_hat={p.alpha:.6g} beta_hat={p.beta:.6g} lambda_inf_hat={p.lambda_inf:.6g} "
          f"converged={report.converged} residual={report.residual_norm:.3e}")
    print(f"wrote {out}")
    return report


def _cumulative_counts(times: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.searchsorted(times, grid, side="right")


def cmd_validate(cfg: RunConfig) -> HarnessReport:
    """Simulate K trajectories, estimate each, and emit the summary table.

    Non-converged runs are kept in the table (converged = False) and
    excluded from the mean/sd summary.  With --envelope, per-trajectory
    cumulative counts are written on a shared grid, optionally alongside a
    real events file for data-vs-simulation comparison.
    """
    if cfg.count < 2:
        raise ValueError(f"validate needs at least 2 trajectories, got {cfg.count}")
    params = cfg.params()
    seed = cfg.require_seed()
    sim = _simulator(cfg.method)

    reports: list[EstimateReport] = []
    trajectories = []
    est_cfg = EstimateConfig(delta=cfg.delta, t0=cfg.t0, init=cfg.init)
    for i in range(cfg.count):
        traj = sim(params, cfg.horizon, seed + i, cap=cfg.cap, unit=cfg.unit)
        trajectories.append(traj)
        try:
            reports.append(estimate(traj.events, est_cfg))
        except (InsufficientData, SingularJacobian) as exc:
            # keep the run in the table as non-converged rather than aborting
            reports.append(EstimateReport(
                params_hat=None, residual_norm=float("inf"), iterations=0,
                init=cfg.init, converged=False, window_stats=None,
                flags=(f"failed:{type(exc).__name__}",),
            ))

    converged = [r for r in reports if r.converged]
    non_converged = [i for i, r in enumerate(reports) if not r.converged]
    summary = {}
    for name in ("alpha", "beta", "lambda_inf"):
        vals = np.array([getattr(r.params_hat, name) for r in converged])
        summary[name] = {
            "mean": float(vals.mean()) if vals.size else float("nan"),
            "sd": float(vals.std(ddof=1)) if vals.size > 1 else float("nan"),
        }
    summary["converged_runs"] = len(converged)
    summary["total_runs"] = cfg.count

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    nan = float("nan")
    rows = [
        (i, r.params_hat.alpha, r.params_hat.beta, r.params_hat.lambda_inf, r.converged)
        if r.params_hat is not None else (i, nan, nan, nan, r.converged)
        for i, r in enumerate(reports)
    ]
    table_path = write_table_csv(cfg.out_dir / "table.csv", rows)
    payload = {
        "params": {"alpha": params.alpha, "beta": params.beta,
                   "lambda_inf": params.lambda_inf, "lambda0": params.lambda0},
        "delta": cfg.delta,
        "t0": cfg.t0,
        "seed": seed,
        "summary": summary,
        "runs": [report_to_dict(r) for r in reports],
    }
    report_path = write_report_json(cfg.out_dir / "validate.json", payload)
    written = [table_path, report_path]

    harness = HarnessReport(reports=reports, summary=summary, non_converged=non_converged)
    if cfg.envelope:
        step = cfg.envelope_step if cfg.envelope_step is not None else max(cfg.horizon / 600.0, cfg.delta)
        grid = np.arange(int(round(cfg.horizon / step)) + 1) * step
        counts = np.vstack([_cumulative_counts(t.events.times, grid) for t in trajectories])
        real = None
        if cfg.real_events_path is not None:
            real_events = parse_events(cfg.real_events_path, unit=cfg.unit, horizon=cfg.horizon)
            real = _cumulative_counts(real_events.times, grid)
        harness.envelope_grid = grid
        harness.envelope_counts = counts
        harness.real_counts = real
        written.append(write_envelope_csv(cfg.out_dir / "envelope.csv", grid, counts, real))

    for name in ("alpha", "beta", "lambda_inf"):
        s = summary[name]
        print(f"{name}: mean={s['mean']:.4g} sd={s['sd']:.4g}")
    print(f"converged {len(converged)}/{cfg.count}; wrote {', '.join(map(str, written))}")
    return harness


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawkesmom",
        description="Simulate, analyze and calibrate the exponentially decaying "
                    "self-exciting (Hawkes) process.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(p, with_lambda0=True):
        p.add_argument("--alpha", type=float, required=True, help="intensity jump per event")
        p.add_argument("--beta", type=float, required=True, help="intensity decay rate")
        p.add_argument("--lambda-inf", type=float, required=True, help="base intensity")
        if with_lambda0:
            p.add_argument("--lambda0", type=float, default=None,
                           help="initial intensity (default: lambda-inf)")

    def add_common(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (fallback: ${SEED_ENV_VAR})")
        p.add_argument("--unit", default="minutes", help="time unit label (default minutes)")
        p.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
        p.add_argument("--cap", type=int, default=DEFAULT_EVENT_CAP,
                       help="per-trajectory event cap")

    p_sim = sub.add_parser("simulate", help="simulate one trajectory and write plot-ready files")
    add_params(p_sim)
    add_common(p_sim)
    p_sim.add_argument("--horizon", type=float, required=True)
    p_sim.add_argument("--method", choices=("exact", "cluster"), default="exact")
    p_sim.add_argument("--grid-step", type=float, default=0.01,
                       help="intensity output grid resolution")

    p_mom = sub.add_parser("moments", help="print theoretical window and intensity moments")
    add_params(p_mom, with_lambda0=False)
    p_mom.add_argument("--delta", type=float, required=True, help="window length")

    p_est = sub.add_parser("estimate", help="fit parameters to an events file")
    p_est.add_argument("--events", type=Path, required=True, help="events file (one timestamp per line)")
    p_est.add_argument("--delta", type=float, required=True, help="window length")
    p_est.add_argument("--t0", type=float, default=0.0, help="burn-in start of the window grid")
    p_est.add_argument("--init", type=float, nargs=3, default=(0.5, 1.5, 2.0),
                       metavar=("ALPHA", "BETA", "LAMBDA_INF"), help="solver starting point")
    p_est.add_argument("--horizon", type=float, default=None,
                       help="truncate events beyond this time (default: last event)")
    p_est.add_argument("--unit", default="minutes")
    p_est.add_argument("--out-dir", type=Path, default=Path("."))

    p_val = sub.add_parser("validate", help="simulate K trajectories, estimate each, summarize")
    add_params(p_val)
    add_common(p_val)
    p_val.add_argument("--horizon", type=float, required=True)
    p_val.add_argument("--count", "-k", type=int, default=20, help="number of trajectories")
    p_val.add_argument("--delta", type=float, required=True)
    p_val.add_argument("--t0", type=float, default=3000.0,
                       help="burn-in before the window grid (default 3000)")
    p_val.add_argument("--init", type=float, nargs=3, default=(0.5, 1.5, 2.0),
                       metavar=("ALPHA", "BETA", "LAMBDA_INF"))
    p_val.add_argument("--method", choices=("exact", "cluster"), default="exact")
    p_val.add_argument("--envelope", action="store_true",
                       help="also write per-trajectory cumulative counts on a shared grid")
    p_val.add_argument("--envelope-step", type=float, default=None)
    p_val.add_argument("--real-events", type=Path, default=None,
                       help="overlay this events file on the envelope grid")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("alpha", "beta", "lambda0", "horizon", "seed", "count", "delta",
                 "t0", "unit", "method", "cap"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "lambda_inf", None) is not None:
        cfg.lambda_inf = args.lambda_inf
    if getattr(args, "init", None) is not None:
        cfg.init = tuple(args.init)
    if getattr(args, "grid_step", None) is not None:
        cfg.grid_step = args.grid_step
    if getattr(args, "out_dir", None) is not None:
        cfg.out_dir = args.out_dir
    if getattr(args, "events", None) is not None:
        cfg.events_path = args.events
    if getattr(args, "real_events", None) is not None:
        cfg.real_events_path = args.real_events
    cfg.envelope = bool(getattr(args, "envelope", False))
    if getattr(args, "envelope_step", None) is not None:
        cfg.envelope_step = args.envelope_step
    return cfg


_DISPATCH = {
    "simulate": cmd_simulate,
    "moments": cmd_moments,
    "estimate": cmd_estimate,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _config_from_args(args)
    try:
        result = _DISPATCH[cfg.command](cfg)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NoConvergence, SingularJacobian, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except CapacityExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (HawkesError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if cfg.command == "estimate" and isinstance(result, EstimateReport) and not result.converged:
        print("error: estimation did not converge (report written for diagnostics)",
              file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
