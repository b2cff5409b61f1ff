"""Vanishing-regularization sweeps and the fractional-regime matrix."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .diagnostics import DiagnosticsMonitor, sobolev_norm
from .errors import ConfigError, MaxStepsExceeded, NonFiniteError
from .initial import make_initial_data
from .spectral import VoigtParams
from .timestepper import integrate

log = logging.getLogger(__name__)

RATE_WINDOW = (0.35, 0.75)
TAIL_LIMIT = 1e-10
# outer band of the retained box used for the resolution check
TAIL_BAND = 2


@dataclass
class PairSeries:
    """Difference between a Voigt run and the eps=0 reference on a shared time grid."""

    epsilon: float
    times: np.ndarray
    E: np.ndarray
    velocity_l2: np.ndarray  # ||u_V - u_B||, equivalent to ||omega_V - omega_B||_{H^-1}
    theta_l2: np.ndarray

    @property
    def metric(self):
        return self.velocity_l2 + self.theta_l2

    @property
    def e_max(self):
        return float(np.max(self.E))


@dataclass
class ConvergenceReport:
    epsilons: list
    e_max: list
    rates: list
    time_grid: list
    metric_max: list = field(default_factory=list)
    metric_rates: list = field(default_factory=list)
    reference_tail: float = float("nan")
    passed: bool | None = None

    @property
    def mean_rate(self):
        return float(np.mean(self.rates)) if self.rates else float("nan")

    @property
    def e_max_decreasing(self):
        return all(b < a for a, b in zip(self.e_max, self.e_max[1:]))

    @property
    def metric_decreasing(self):
        return all(b < a for a, b in zip(self.metric_max, self.metric_max[1:]))

    def as_dict(self):
        return {
            "epsilons": list(self.epsilons),
            "e_max": list(self.e_max),
            "rates": list(self.rates),
            "mean_rate": self.mean_rate if self.rates else None,
            "metric_max": list(self.metric_max),
            "metric_rates": list(self.metric_rates),
            "reference_tail": self.reference_tail,
            "time_grid": list(self.time_grid),
            "passed": self.passed,
        }


@dataclass
class RegimeCell:
    alpha: float
    beta: float
    label: str
    completed: bool = False
    bkm_value: float = float("nan")
    max_hs_omega: float = float("nan")
    t_reached: float = 0.0
    bkm_nondecreasing: bool = False
    error: str | None = None

    def as_dict(self):
        return dict(self.__dict__)


def regime_label(alpha, beta, tol=1e-12):
    """'proven' when (alpha, beta) meets a global-regularity hypothesis, else 'conjectural'.

    Proven regions: alpha + beta >= 2 with alpha > 1 and beta >= 2/3;
    alpha > 2 with beta = 0; and the classical point alpha = beta = 1.
    """
    if abs(alpha - 1.0) <= tol and abs(beta - 1.0) <= tol:
        return "proven"
    if alpha + beta >= 2.0 - tol and alpha > 1.0 and beta >= 2.0 / 3.0 - tol:
        return "proven"
    if alpha > 2.0 and abs(beta) <= tol:
        return "proven"
    return "conjectural"


def spectral_tail(state):
    """Largest coefficient on the outer band of the retained box, relative to the peak."""
    grid = state.grid
    cut = grid.kmax_retained
    band = np.maximum(np.abs(grid.k1), np.abs(grid.k2)) > cut - TAIL_BAND
    band &= grid.dealias_mask
    worst = 0.0
    for c in (state.omega_hat, state.theta_hat):
        peak = float(np.max(np.abs(c)))
        if peak > 0:
            worst = max(worst, float(np.max(np.abs(c[band]))) / peak)
    return worst


def _require_fixed(config):
    if config.control.mode != "fixed":
        raise ConfigError("convergence runs need a shared time grid (mode: fixed)", key="time.mode")


def _snapshots(config, params):
    state0 = make_initial_data(config.initial, config.grid)
    out = []
    integrate(state0, config.control, params, observer=out.append, observe_every=config.every_steps)
    return out


def reference_run(config):
    """Snapshots of the eps=0 (Boussinesq) run at the output cadence."""
    _require_fixed(config)
    return _snapshots(config, VoigtParams(0.0, 1.0, 1.0))


def _error_functional(grid, a, b, epsilon):
    d_omega = a.omega_hat - b.omega_hat
    d_theta = a.theta_hat - b.theta_hat
    u1, u2 = spectral.biot_savart(grid, d_omega)
    u_sq = spectral.l2_norm(u1) ** 2 + spectral.l2_norm(u2) ** 2
    th_sq = spectral.l2_norm(d_theta) ** 2
    u_half = sobolev_norm(grid, u1, 0.5)[0] ** 2 + sobolev_norm(grid, u2, 0.5)[0] ** 2
    th_half = sobolev_norm(grid, d_theta, 0.5)[0] ** 2
    E = u_sq + th_sq + epsilon * (u_half + th_half)
    return E, math.sqrt(u_sq), math.sqrt(th_sq)


def run_pair(epsilon, config, reference=None):
    """Integrate the Voigt run at ``epsilon`` (alpha = beta = 1) against the eps=0
    reference and return the error functional on the shared output times.

    ``reference`` may be a precomputed ``reference_run(config)``.
    """
    _require_fixed(config)
    if reference is None:
        reference = reference_run(config)
    voigt = _snapshots(config, VoigtParams(epsilon, 1.0, 1.0))
    if len(voigt) != len(reference):
        raise ValueError("Voigt and reference runs produced different output grids")
    grid = config.grid
    times, E, vel, th = [], [], [], []
    for a, b in zip(voigt, reference):
        if a.t != b.t or a.omega_hat.shape != b.omega_hat.shape:
            raise ValueError(f"mismatched snapshots at t={a.t} vs t={b.t}")
        e, v, h = _error_functional(grid, a, b, epsilon)
        times.append(a.t)
        E.append(e)
        vel.append(v)
        th.append(h)
    return PairSeries(epsilon, np.array(times), np.array(E), np.array(vel), np.array(th))


def _run_pair_job(args):
    epsilon, config, reference = args
    return run_pair(epsilon, config, reference)


def sweep_epsilon(config, epsilons, workers=1):
    """Run every epsilon against one shared reference and summarize the decay.

    ``passed`` is True when e_max strictly decreases and the mean successive
    ratio lies in RATE_WINDOW; None for a single epsilon.
    """
    epsilons = [float(e) for e in epsilons]
    if not epsilons:
        raise ConfigError("need at least one epsilon", key="sweep.epsilons")
    if any(e <= 0 for e in epsilons):
        raise ConfigError("every epsilon must be positive", key="sweep.epsilons")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ConfigError("must be strictly decreasing", key="sweep.epsilons")

    reference = reference_run(config)
    tail = spectral_tail(reference[-1])
    if tail >= TAIL_LIMIT:
        log.warning("reference run under-resolved: spectral tail %.3e >= %.0e", tail, TAIL_LIMIT)

    jobs = [(e, config, reference) for e in epsilons]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(_run_pair_job, jobs))
    else:
        pairs = [_run_pair_job(j) for j in jobs]

    e_max = [p.e_max for p in pairs]
    metric_max = [float(np.max(p.metric)) for p in pairs]
    rates = [b / a for a, b in zip(e_max, e_max[1:])]
    report = ConvergenceReport(
        epsilons=epsilons,
        e_max=e_max,
        rates=rates,
        time_grid=[float(t) for t in pairs[0].times],
        metric_max=metric_max,
        metric_rates=[b / a for a, b in zip(metric_max, metric_max[1:])],
        reference_tail=tail,
    )
    if rates:
        lo, hi = RATE_WINDOW
        report.passed = report.e_max_decreasing and lo <= report.mean_rate <= hi
    return report


def _run_cell(args):
    alpha, beta, config = args
    params = VoigtParams(1.0, alpha, beta)
    cell = RegimeCell(alpha, beta, regime_label(alpha, beta))
    monitor = DiagnosticsMonitor(params, s_values=(config.regime_s,))
    state0 = make_initial_data(config.initial, config.grid)
    try:
        integrate(state0, config.control, params, observer=monitor,
                  observe_every=config.every_steps, observe_dt=config.every_time)
        cell.completed = True
    except (NonFiniteError, MaxStepsExceeded) as exc:
        cell.error = f"{type(exc).__name__}: {exc}"
    if monitor.records:
        last = monitor.last
        cell.t_reached = last.t
        cell.bkm_value = last.bkm_integral
        cell.max_hs_omega = max(r.hs_omega[0] for r in monitor.records)
        bkm = monitor.series("bkm_integral")
        cell.bkm_nondecreasing = bool(np.all(np.isfinite(bkm)) and np.all(np.diff(bkm) >= 0))
    return cell


def regime_matrix(config, cells, workers=1):
    """One eps=1 integration per (alpha, beta) cell; failures are recorded, not raised."""
    jobs = []
    for alpha, beta in cells:
        if alpha < 0 or beta < 0:
            raise ConfigError(f"exponents must be nonnegative, got ({alpha}, {beta})", key="regimes.cells")
        jobs.append((float(alpha), float(beta), config))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_cell, jobs))
    return [_run_cell(j) for j in jobs]
