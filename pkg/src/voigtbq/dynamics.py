"""Right-hand side of the (fractional) Voigt-Boussinesq system in divergence form.

    d_t omega = (1 + eps|k|)^(-alpha) [ -div(u omega) + d_1 theta ]
    d_t theta = -(1 + eps|k|)^(-beta) div(u theta)
    u = grad_perp Delta^{-1} omega

Classical Voigt is ``alpha = beta = 1``; ``eps = 0`` is inviscid Boussinesq.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import spectral
from .errors import ConstraintViolation, NonFiniteError
from .spectral import make_grid


@dataclass(frozen=True, eq=False)
class State:
    """Vorticity and temperature coefficients at time ``t``."""

    omega_hat: np.ndarray
    theta_hat: np.ndarray
    t: float = 0.0

    @property
    def grid(self):
        return make_grid(self.omega_hat.shape[0])

    def with_time(self, t):
        return replace(self, t=t)

    def validate(self, tol=1e-13):
        """Raise ConstraintViolation if a State invariant is broken."""
        grid = self.grid
        for name, c in (("omega_hat", self.omega_hat), ("theta_hat", self.theta_hat)):
            if c.shape != grid.shape:
                raise ConstraintViolation(f"{name} has shape {c.shape}, expected {grid.shape}")
            if np.any(c[~grid.dealias_mask] != 0):
                raise ConstraintViolation(f"{name} has energy outside the dealias mask")
            scale = float(np.max(np.abs(c))) if c.size else 0.0
            if spectral.hermitian_defect(c) > tol * max(scale, 1e-300):
                raise ConstraintViolation(f"{name} is not Hermitian (field not real)")
        if self.omega_hat[0, 0] != 0:
            raise ConstraintViolation("omega_hat must have an exactly zero mean mode")
        if self.t < 0:
            raise ConstraintViolation(f"time must be nonnegative, got {self.t}")


@dataclass(frozen=True, eq=False)
class Tendency:
    d_omega: np.ndarray
    d_theta: np.ndarray


@lru_cache(maxsize=64)
def _symbol(N, epsilon, exponent):
    s = spectral.voigt_symbol(make_grid(N), epsilon, exponent)
    s.setflags(write=False)
    return s


def buoyancy_term(grid, theta_hat, params):
    """Regularized forcing ``(1 + eps|k|)^(-alpha) d_1 theta``."""
    out = _symbol(grid.N, params.epsilon, params.alpha) * (1j * grid.kd1 * theta_hat)
    out[0, 0] = 0.0
    return out


def rhs(state, params):
    """Time derivative of ``state`` under ``params``.

    Raises ConstraintViolation for mean vorticity and NonFiniteError when the
    tendency contains NaN or inf.
    """
    grid = state.grid
    omega_hat, theta_hat = state.omega_hat, state.theta_hat
    u1_hat, u2_hat = spectral.biot_savart(grid, omega_hat)

    u1 = spectral.inverse_transform(grid, u1_hat)
    u2 = spectral.inverse_transform(grid, u2_hat)
    omega = spectral.inverse_transform(grid, omega_hat)
    theta = spectral.inverse_transform(grid, theta_hat)

    flux_omega = spectral.flux_from_physical(grid, u1, u2, omega)
    flux_theta = spectral.flux_from_physical(grid, u1, u2, theta)

    sym_a = _symbol(grid.N, params.epsilon, params.alpha)
    sym_b = _symbol(grid.N, params.epsilon, params.beta)
    d_omega = sym_a * (1j * grid.kd1 * theta_hat - flux_omega)
    d_omega[0, 0] = 0.0
    d_theta = -sym_b * flux_theta

    if not (np.all(np.isfinite(d_omega)) and np.all(np.isfinite(d_theta))):
        raise NonFiniteError(f"non-finite tendency at t={state.t!r}", t=state.t)
    return Tendency(d_omega, d_theta)
