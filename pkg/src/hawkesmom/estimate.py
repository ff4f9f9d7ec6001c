"""Method-of-moments calibration of (alpha, beta, lambda_inf).

Empirical moments M_i are arithmetic means of i-th powers of window counts
over consecutive windows of length delta.  The fit solves

    stationary_mi(alpha, beta, lambda_inf; delta) = M_i,   i = 1, 2, 3

through an exact dimensional reduction.  M1 fixes lambda* = M1/delta, and
the variance excess obeys the identity

    (M2 - M1 - M1^2)/M1 = G(eta) phi(x),
    G(eta) = eta (2 - eta)/(1 - eta)^2,  phi(x) = 1 - (1 - e^{-x})/x,

with eta = alpha/beta and x = kappa delta, G invertible in closed form.
That leaves the third-moment equation as a scalar root-find in x, which is
solved by bracketing on a log grid -- far more robust than Newton iteration
on the raw 3-by-3 system, whose Jacobian is near-singular along a
beta-degenerate direction (condition number ~1e6 at typical roots).
Positivity constraints hold by construction: x > 0 and eta in [0, 1) map to
beta > alpha >= 0, lambda_inf > 0.  lambda0 is not identifiable from
stationary window moments; fitted parameter records carry
lambda0 = lambda_inf.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import EventSequence, HawkesParams
from .errors import HawkesError, InsufficientData, NoConvergence
from .moments import MomentTriple, stationary_m1, stationary_m2, stationary_m3
from .simulate import windowed_counts

__all__ = [
    "MIN_WINDOWS",
    "EmpiricalMoments",
    "EstimateConfig",
    "EstimateReport",
    "empirical_from_counts",
    "empirical_moments",
    "solve_moment_system",
    "default_multistart",
    "estimate",
]

MIN_WINDOWS = 30
# alpha-hat this far below beta-hat (relatively) is reported as a boundary
# fit: the data look Poisson and beta is then unidentified.
BOUNDARY_ALPHA_RATIO = 1e-6


@dataclass(frozen=True)
class EmpiricalMoments:
    """Windowed-count moments M_i = (1/J) sum_j counts[j]^i."""

    triple: MomentTriple
    delta: float
    window_count: int
    t0: float


@dataclass(frozen=True)
class EstimateReport:
    """Fitted parameters plus solver diagnostics and the window statistics used.

    params_hat carries lambda0 = lambda_inf (lambda0 is not identified by
    the moment system).  converged means the solver reached its target: all
    three residuals at or below tolerance when the system has an exact root,
    or the constrained least-squares point when it does not (then
    residual_norm honestly exceeds the tolerance and "m3_best_fit" is set).
    Other flags: "boundary_alpha" (alpha-hat at the Poisson boundary, beta
    unidentified) and "t0_in_transient" (windows start at t0 = 0 where the
    stationary-limit formulas are biased by the transient).  Harness
    placeholders for runs that failed outright carry params_hat = None.
    """

    params_hat: HawkesParams | None
    residual_norm: float
    iterations: int
    init: tuple[float, float, float]
    converged: bool
    window_stats: EmpiricalMoments | None = None
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class EstimateConfig:
    """Windowing and solver settings for estimate()."""

    delta: float
    t0: float = 0.0
    init: tuple[float, float, float] = (0.5, 1.5, 2.0)
    multistart: tuple[tuple[float, float, float], ...] | None = None  # None -> default grid
    tol: float = 1e-9
    max_iter: int = 200


def empirical_from_counts(counts, delta: float, t0: float = 0.0) -> EmpiricalMoments:
    """Moment triple from an existing vector of window counts."""
    counts = np.asarray(counts, dtype=float)
    if counts.size == 0:
        raise InsufficientData("no count windows")
    if counts.size < MIN_WINDOWS:
        warnings.warn(
            f"only {counts.size} windows; moment estimates will be noisy "
            f"(fewer than {MIN_WINDOWS})",
            UserWarning,
            stacklevel=2,
        )
    triple = MomentTriple(
        m1=float(counts.mean()),
        m2=float((counts**2).mean()),
        m3=float((counts**3).mean()),
        delta=float(delta),
    )
    return EmpiricalMoments(triple=triple, delta=float(delta),
                            window_count=int(counts.size), t0=float(t0))


def empirical_moments(events: EventSequence, t0: float, delta: float) -> EmpiricalMoments:
    """Empirical M_1, M_2, M_3 over the maximal whole number of windows in
    [t0, horizon]."""
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if t0 < 0.0 or t0 >= events.horizon:
        raise InsufficientData(
            f"window start t0={t0} leaves no room before horizon {events.horizon}"
        )
    n_windows = int((events.horizon - t0) / delta + 1e-12)
    if n_windows < 1:
        raise InsufficientData(
            f"no window of length {delta} fits in [{t0}, {events.horizon}]"
        )
    sample = windowed_counts(events, t0, delta, n_windows)
    return empirical_from_counts(sample.counts, delta, t0)


def _check_start(theta) -> tuple[float, float, float]:
    a, b, li = theta
    if not (b > a > 0.0 and li > 0.0):
        raise ValueError(f"start point must satisfy beta > alpha > 0, lambda_inf > 0; got {theta}")
    return float(a), float(b), float(li)


def _excess_shape(x: float) -> float:
    """phi(x) = 1 - (1 - e^{-x})/x, the window-shape factor of the variance
    excess; increases from 0 to 1 as x = kappa * delta grows."""
    if x < 1e-4:
        return x / 2.0 - x * x / 6.0 + x**3 / 24.0 - x**4 / 120.0
    return 1.0 + math.expm1(-x) / x


def _params_on_manifold(x: float, lam_star: float, excess: float, delta: float) -> HawkesParams:
    """The unique parameters matching m1 and m2 exactly for a given x = kappa delta.

    The variance excess factors as (M2 - M1 - M1^2)/M1 = G(eta) phi(x) with
    eta = alpha/beta and G(eta) = eta (2 - eta)/(1 - eta)^2, so G inverts in
    closed form: 1 - eta = 1/sqrt(1 + G).  lambda* is pinned by M1 = lambda* delta.
    """
    g = excess / _excess_shape(x)
    one_minus_eta = 1.0 / math.sqrt(1.0 + g)
    kappa = x / delta
    beta = kappa / one_minus_eta
    alpha = beta - kappa
    lam_inf = lam_star * one_minus_eta
    return HawkesParams(alpha, beta, lam_inf)


_SCAN_LO, _SCAN_HI, _SCAN_POINTS = 1e-7, 200.0, 600
# half an e-fold each way: how far the third-moment fit may pull x away from
# the starting point when the system has no exact root
_LOCAL_BRACKET_HALF_WIDTH = 0.5


def _brent_minimize(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Deterministic bounded scalar minimization; returns (x, f(x), evaluations)."""
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": tol, "maxiter": max_iter})
    return float(res.x), float(res.fun), int(res.nfev)


def _residuals(p: HawkesParams, triple: MomentTriple, delta: float) -> tuple[float, float, float]:
    return (stationary_m1(p, delta) - triple.m1,
            stationary_m2(p, delta) - triple.m2,
            stationary_m3(p, delta) - triple.m3)


def solve_moment_system(
    triple: MomentTriple,
    delta: float,
    init: tuple[float, float, float],
    *,
    tol: float = 1e-9,
    max_iter: int = 200,
    multistart: tuple = (),
    window_stats: EmpiricalMoments | None = None,
) -> EstimateReport:
    """Solve the three-equation moment system for (alpha, beta, lambda_inf).

    The system is reduced exactly: M1 pins lambda*, the variance excess pins
    eta = alpha/beta as a closed-form function of x = kappa delta, and the
    third equation becomes a scalar root-find in x.  All sign changes of the
    scalar residual on a wide log-grid are bracketed and refined; among exact
    roots the one nearest the starting point (in (ln alpha, ln kappa)) is
    returned with all three residuals at or below ``tol``.

    Sampled moments frequently admit no exact root: given (M1, M2) the model
    constrains the attainable third moment to a band a fraction of a percent
    wide, and noisy M3 falls outside it.  The solve then returns the
    least-squares point on the (m1, m2)-exact curve within half an e-fold of
    the start's x (the third moment carries almost no information there, so
    the fit is not allowed to chase its noise across the whole curve).  Such
    fits are flagged "m3_best_fit" and count as converged with an honest
    residual_norm; genuinely infeasible data (variance at or below Poisson,
    no positive-excess solution) yield NoConvergence carrying the best
    attempt.

    ``iterations`` reports the number of scalar-residual evaluations.
    """
    for name, v in (("m1", triple.m1), ("m2", triple.m2), ("m3", triple.m3)):
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError(f"moment {name} must be finite and positive, got {v}")
    starts = [_check_start(init)]
    for extra in multistart:
        try:
            starts.append(_check_start(extra))
        except ValueError:
            continue  # skip inadmissible multistart points

    m1, m2, m3 = triple.m1, triple.m2, triple.m3
    lam_star = m1 / delta
    excess = (m2 - m1 - m1 * m1) / m1
    evaluations = 0

    def make_report(p: HawkesParams, order: int, flags: tuple[str, ...]) -> EstimateReport:
        r1, r2, r3 = _residuals(p, triple, delta)
        norm = max(abs(r1), abs(r2), abs(r3))
        if p.alpha < BOUNDARY_ALPHA_RATIO * p.beta:
            flags = flags + ("boundary_alpha",)
        # a best-fit point still matches the first two moments exactly
        converged = norm <= tol or ("m3_best_fit" in flags
                                    and max(abs(r1), abs(r2)) <= tol)
        return EstimateReport(
            params_hat=p,
            residual_norm=norm,
            iterations=evaluations,
            init=tuple(starts[order]),
            converged=converged,
            window_stats=window_stats,
            flags=flags,
        )

    if excess <= 0.0:
        # at or below Poisson variance: the only candidate is the alpha -> 0
        # boundary, with beta unidentified (kept at the start's value)
        beta0 = starts[0][1]
        alpha = 1e-12 * beta0
        p = HawkesParams(alpha, beta0, lam_star * (1.0 - alpha / beta0))
        report = make_report(p, 0, ())
        if report.converged:
            return report
        raise NoConvergence(
            f"window variance is at or below the Poisson level (excess {excess:.3e}); "
            f"best boundary fit has residual {report.residual_norm:.3e}",
            best_report=report,
        )

    def scalar_residual(x: float) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            p = _params_on_manifold(x, lam_star, excess, delta)
            val = stationary_m3(p, delta) - m3
        except (OverflowError, ZeroDivisionError, ValueError, HawkesError):
            return math.inf
        return val if math.isfinite(val) else math.inf

    # bracket every exact root on a wide dimensionless grid
    from scipy.optimize import brentq

    grid = np.geomspace(_SCAN_LO, _SCAN_HI, _SCAN_POINTS)
    vals = np.array([scalar_residual(x) for x in grid])
    roots: list[float] = []
    for i in range(len(grid) - 1):
        lo, hi = vals[i], vals[i + 1]
        if math.isfinite(lo) and math.isfinite(hi) and lo * hi < 0.0:
            roots.append(brentq(scalar_residual, grid[i], grid[i + 1],
                                xtol=1e-15, rtol=8.9e-16, maxiter=max_iter))
        elif lo == 0.0:
            roots.append(float(grid[i]))

    if roots:
        # selection by (converged, residual, start order); every start sees
        # the same root set, so this reduces to nearest-root-per-start
        attempts: list[tuple[bool, float, int, EstimateReport]] = []
        for order, start in enumerate(starts):
            a0, b0 = start[0], start[1]

            def distance(x: float) -> float:
                p = _params_on_manifold(x, lam_star, excess, delta)
                return math.hypot(math.log(p.alpha) - math.log(a0),
                                  math.log(p.kappa) - math.log(b0 - a0))

            best_x = min(roots, key=distance)
            report = make_report(_params_on_manifold(best_x, lam_star, excess, delta),
                                 order, ())
            attempts.append((not report.converged, report.residual_norm, order, report))
        attempts.sort(key=lambda t: t[:3])
        best = attempts[0][3]
    else:
        # no exact root: local least-squares in x anchored at the primary
        # start (competing by residual across multistart brackets would just
        # chase third-moment noise along the nearly flat curve)
        a0, b0 = starts[0][0], starts[0][1]
        x0 = min(max((b0 - a0) * delta, _SCAN_LO), _SCAN_HI)
        lo = max(x0 * math.exp(-_LOCAL_BRACKET_HALF_WIDTH), _SCAN_LO)
        hi = min(x0 * math.exp(_LOCAL_BRACKET_HALF_WIDTH), _SCAN_HI)
        best_x, _, _ = _brent_minimize(lambda x: abs(scalar_residual(x)), lo, hi)
        best = make_report(_params_on_manifold(best_x, lam_star, excess, delta),
                           0, ("m3_best_fit",))
    if not best.converged:
        raise NoConvergence(
            f"no admissible parameters reach residual {tol} "
            f"(best residual {best.residual_norm:.3e} from init {best.init})",
            best_report=best,
        )
    return best


def default_multistart(emp: EmpiricalMoments) -> tuple[tuple[float, float, float], ...]:
    """Fallback starting points: the two standard inits plus a data-driven
    one seeding lambda_inf with M1/delta at alpha = beta/2, beta = 1."""
    grid: list[tuple[float, float, float]] = [(0.5, 1.5, 2.0), (0.5, 1.5, 0.75)]
    lam_seed = emp.triple.m1 / emp.delta
    if lam_seed > 0.0:
        grid.append((0.5, 1.0, lam_seed))
    return tuple(grid)


def estimate(events: EventSequence, config: EstimateConfig) -> EstimateReport:
    """Empirical moments followed by the moment-system solve.

    Retries from every multistart point on non-convergence and then reports
    the best attempt (converged = False) rather than raising, so harness
    callers can keep partial results.  InsufficientData propagates.
    """
    emp = empirical_moments(events, config.t0, config.delta)
    extra_flags: tuple[str, ...] = ()
    if config.t0 == 0.0:
        warnings.warn(
            "t0 = 0 applies stationary-limit moment formulas from the start of "
            "the record; consider discarding a burn-in interval",
            UserWarning,
            stacklevel=2,
        )
        extra_flags = ("t0_in_transient",)

    multistart = config.multistart if config.multistart is not None else default_multistart(emp)
    try:
        report = solve_moment_system(
            emp.triple, config.delta, config.init,
            tol=config.tol, max_iter=config.max_iter,
            multistart=multistart, window_stats=emp,
        )
    except NoConvergence as exc:
        warnings.warn(str(exc), UserWarning, stacklevel=2)
        report = exc.best_report
    if extra_flags:
        report = EstimateReport(
            params_hat=report.params_hat,
            residual_norm=report.residual_norm,
            iterations=report.iterations,
            init=report.init,
            converged=report.converged,
            window_stats=report.window_stats,
            flags=report.flags + extra_flags,
        )
    return report
