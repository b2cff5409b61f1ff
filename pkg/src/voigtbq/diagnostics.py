"""Norms, Voigt energies, the H^{1/2} growth-bound check and the BKM integral."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral

SCHEMA_VERSION = 1

# Serialization order of DiagnosticsRecord. Append only.
FIELDS = (
    "t",
    "l2_omega",
    "l2_theta",
    "h_half_omega",
    "h_half_theta",
    "q_theta",
    "q_omega",
    "frac_q_theta",
    "frac_q_omega",
    "max_omega",
    "max_theta",
    "max_u",
    "bkm_integral",
    "hs_s",
    "hs_omega",
    "hs_theta",
    "bound_slack",
)


@dataclass
class DiagnosticsRecord:
    t: float
    l2_omega: float
    l2_theta: float
    h_half_omega: float
    h_half_theta: float
    q_theta: float
    q_omega: float
    frac_q_theta: float
    frac_q_omega: float
    max_omega: float
    max_theta: float
    max_u: float
    bkm_integral: float = 0.0
    hs_s: list = field(default_factory=list)
    hs_omega: list = field(default_factory=list)
    hs_theta: list = field(default_factory=list)
    # residual of the H^{1/2} growth bound; None when the run is not eps=1 classical Voigt
    bound_slack: float | None = None

    def as_dict(self):
        return {name: getattr(self, name) for name in FIELDS}


def sobolev_norm(grid, f_hat, s):
    """Return ``(homogeneous, inhomogeneous)`` order-``s`` norms.

    homogeneous:   (sum_k |k|^{2s} |f_k|^2)^{1/2}
    inhomogeneous: (sum_k (1+|k|)^{2s} |f_k|^2)^{1/2}

    For ``s < 0`` the homogeneous sum skips k=0.
    """
    power = np.abs(f_hat) ** 2
    if s == 0:
        hom = float(np.sum(power))
    else:
        kmag = grid.kmag
        with np.errstate(divide="ignore"):
            weight = np.where(kmag > 0, kmag ** (2.0 * s), 0.0)
        hom = float(np.sum(weight * power))
    inhom = float(np.sum((1.0 + grid.kmag) ** (2.0 * s) * power))
    return math.sqrt(hom), math.sqrt(inhom)


def _weighted_energy(grid, f_hat, epsilon, exponent):
    w = spectral.voigt_weight(grid, epsilon, exponent)
    return float(np.sum(w * np.abs(f_hat) ** 2))


def voigt_theta_energy(grid, theta_hat, params):
    """``sum_k (1 + eps|k|) |theta_k|^2``, conserved by the classical Voigt flow."""
    return _weighted_energy(grid, theta_hat, params.epsilon, 1.0)


def voigt_omega_energy(grid, omega_hat, params):
    """``sum_k (1 + eps|k|) |omega_k|^2``; changes only through buoyancy."""
    return _weighted_energy(grid, omega_hat, params.epsilon, 1.0)


def fractional_invariants(state, params):
    """``(sum (1+eps|k|)^beta |theta_k|^2, sum (1+eps|k|)^alpha |omega_k|^2)``.

    The first is exactly conserved by the semi-discrete fractional system.
    """
    grid = state.grid
    return (
        _weighted_energy(grid, state.theta_hat, params.epsilon, params.beta),
        _weighted_energy(grid, state.omega_hat, params.epsilon, params.alpha),
    )


def lp_norm(grid, f_hat, p):
    """Grid L^p norm with uniform weights (mean of |f|^p), or grid max for p=inf."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    f = np.abs(spectral.inverse_transform(grid, f_hat))
    if math.isinf(p):
        return float(np.max(f))
    if p == 2:
        return float(np.sqrt(np.mean(f * f)))
    return float(np.mean(f**p) ** (1.0 / p))


def bkm_accumulate(prev, record_prev, record_now):
    """Add the trapezoid increment of ``||omega||_inf + ||theta||_inf``."""
    dt = record_now.t - record_prev.t
    if not dt > 0:
        raise ValueError("records must be strictly increasing in time")
    a = record_prev.max_omega + record_prev.max_theta
    b = record_now.max_omega + record_now.max_theta
    return prev + 0.5 * dt * (a + b)


def is_classical_unit(params):
    return params.epsilon == 1.0 and params.alpha == 1.0 and params.beta == 1.0


def growth_bound_tolerance(omega0_h_half):
    return 1e-6 * (1.0 + omega0_h_half)


def check_growth_bound(records, A0, omega0_h_half, params, t0=None):
    """Residuals ``||omega(t)|| - ||omega_0|| - (t - t0) sqrt(A0)``.

    The norm is ``sqrt(q_omega)``, the inhomogeneous H^{1/2} norm at eps=1.
    The bound holds iff every residual is <= ``growth_bound_tolerance``.
    Only defined for eps=1 classical Voigt runs.
    """
    if not is_classical_unit(params):
        raise ValueError(
            f"growth bound is stated for eps=1, alpha=beta=1; got {params}"
        )
    records = list(records)
    if not records:
        return np.zeros(0)
    if t0 is None:
        t0 = records[0].t
    sqrt_a0 = math.sqrt(A0)
    return np.array(
        [math.sqrt(r.q_omega) - omega0_h_half - (r.t - t0) * sqrt_a0 for r in records]
    )


def make_record(state, params, s_values=()):
    """All instantaneous diagnostics of ``state`` (no time accumulation)."""
    grid = state.grid
    w, th = state.omega_hat, state.theta_hat
    omega = spectral.inverse_transform(grid, w)
    theta = spectral.inverse_transform(grid, th)
    u1_hat, u2_hat = spectral.biot_savart(grid, w)
    u1 = spectral.inverse_transform(grid, u1_hat)
    u2 = spectral.inverse_transform(grid, u2_hat)
    fq_theta, fq_omega = fractional_invariants(state, params)
    s_values = [float(s) for s in s_values]
    return DiagnosticsRecord(
        t=float(state.t),
        l2_omega=spectral.l2_norm(w),
        l2_theta=spectral.l2_norm(th),
        h_half_omega=sobolev_norm(grid, w, 0.5)[0],
        h_half_theta=sobolev_norm(grid, th, 0.5)[0],
        q_theta=voigt_theta_energy(grid, th, params),
        q_omega=voigt_omega_energy(grid, w, params),
        frac_q_theta=fq_theta,
        frac_q_omega=fq_omega,
        max_omega=float(np.max(np.abs(omega))),
        max_theta=float(np.max(np.abs(theta))),
        max_u=float(np.sqrt(np.max(u1 * u1 + u2 * u2))),
        hs_s=s_values,
        hs_omega=[sobolev_norm(grid, w, s)[1] for s in s_values],
        hs_theta=[sobolev_norm(grid, th, s)[1] for s in s_values],
    )


class DiagnosticsMonitor:
    """Observer that turns states into a time series of records.

    Accumulates the BKM integral and, for eps=1 classical runs, the growth
    bound residual relative to the first observed state. Pass ``sink`` (a
    callable taking a record) to stream records as they are produced.
    """

    def __init__(self, params, s_values=(), sink=None, keep=True):
        self.params = params
        self.s_values = tuple(s_values)
        self.sink = sink
        self.keep = keep
        self.records = []
        self.last = None
        self.first = None
        self.A0 = None
        self.omega0_h_half = None

    def __call__(self, state):
        rec = make_record(state, self.params, self.s_values)
        if self.last is None:
            self.first = rec
            self.A0 = rec.q_theta
            self.omega0_h_half = math.sqrt(rec.q_omega)
            rec.bkm_integral = 0.0
        elif rec.t <= self.last.t:
            # duplicate observation of the same time (e.g. t_end == t0)
            return
        else:
            rec.bkm_integral = bkm_accumulate(self.last.bkm_integral, self.last, rec)
        if is_classical_unit(self.params):
            rec.bound_slack = (
                math.sqrt(rec.q_omega)
                - self.omega0_h_half
                - (rec.t - self.first.t) * math.sqrt(self.A0)
            )
        self.last = rec
        if self.keep:
            self.records.append(rec)
        if self.sink is not None:
            self.sink(rec)

    def series(self, name):
        return np.array([getattr(r, name) for r in self.records])
