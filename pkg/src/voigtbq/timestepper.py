"""Explicit RK4 time stepping with fixed-dt or advective-CFL step selection."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .dynamics import State, rhs
from .errors import ConfigError, MaxStepsExceeded, NonFiniteError

log = logging.getLogger(__name__)

VELOCITY_FLOOR = 1e-8
CFL_CAP = 0.5


@dataclass(frozen=True)
class StepControl:
    """How to step: ``mode="fixed"`` uses ``dt``; ``mode="cfl"`` picks each step
    from ``cfl`` and the current velocity, clamped by ``dt_max``."""

    t_end: float
    mode: str = "fixed"
    dt: float = 1e-3
    cfl: float = 0.4
    dt_max: float = 1e-2
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.mode not in ("fixed", "cfl"):
            raise ConfigError(f"must be 'fixed' or 'cfl', got {self.mode!r}", key="mode")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigError(f"must be finite and >= 0, got {self.t_end!r}", key="t_end")
        if self.mode == "fixed" and not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"must be positive, got {self.dt!r}", key="dt")
        if self.mode == "cfl" and not (0 < self.cfl <= CFL_CAP):
            raise ConfigError(f"must lie in (0, {CFL_CAP}], got {self.cfl!r}", key="cfl")
        if not (self.dt_max > 0):
            raise ConfigError(f"must be positive, got {self.dt_max!r}", key="dt_max")
        if isinstance(self.max_steps, bool) or not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ConfigError(f"must be a positive integer, got {self.max_steps!r}", key="max_steps")


def _axpy(grid, base, a, incr):
    return spectral.dealias(grid, base + a * incr)


def rk4_step(state, dt, params):
    """One classical Runge-Kutta step of size ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    grid = state.grid
    w0, th0 = state.omega_hat, state.theta_hat
    half = 0.5 * dt

    k1 = rhs(state, params)
    s = State(w0 + half * k1.d_omega, th0 + half * k1.d_theta, state.t + half)
    k2 = rhs(s, params)
    s = State(w0 + half * k2.d_omega, th0 + half * k2.d_theta, state.t + half)
    k3 = rhs(s, params)
    s = State(w0 + dt * k3.d_omega, th0 + dt * k3.d_theta, state.t + dt)
    k4 = rhs(s, params)

    sixth = dt / 6.0
    d_omega = k1.d_omega + 2.0 * k2.d_omega + 2.0 * k3.d_omega + k4.d_omega
    d_theta = k1.d_theta + 2.0 * k2.d_theta + 2.0 * k3.d_theta + k4.d_theta
    omega = _axpy(grid, w0, sixth, d_omega)
    theta = _axpy(grid, th0, sixth, d_theta)
    omega[0, 0] = 0.0
    if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(theta))):
        raise NonFiniteError(f"non-finite state after step from t={state.t!r}", t=state.t + dt)
    return State(omega, theta, state.t + dt)


def max_velocity(state):
    grid = state.grid
    u1_hat, u2_hat = spectral.biot_savart(grid, state.omega_hat)
    u1 = spectral.inverse_transform(grid, u1_hat)
    u2 = spectral.inverse_transform(grid, u2_hat)
    return float(np.sqrt(np.max(u1 * u1 + u2 * u2)))


def stable_dt(state, cfl_number, dt_max=None):
    """Advective step ``cfl * dx / max(|u|_inf, floor)``, optionally clamped."""
    umax = max(max_velocity(state), VELOCITY_FLOOR)
    dt = cfl_number * state.grid.dx / umax
    if dt_max is not None:
        dt = min(dt, dt_max)
    return dt


def _on_grid(x, dt):
    """Integer n with x == n*dt up to rounding, or None."""
    n = round(x / dt)
    if abs(x - n * dt) <= 1e-9 * max(dt, abs(x)):
        return n
    return None


def integrate(state0, control, params, observer=None, observe_every=10, observe_dt=None):
    """Advance ``state0`` to ``control.t_end``.

    ``observer(state)`` is called at the start, every ``observe_every`` steps
    (or each time a multiple of ``observe_dt`` is crossed, if given) and at
    the end. In fixed mode times are ``n * dt`` on a grid anchored at t=0, so
    a run resumed from a checkpoint reproduces the uninterrupted one exactly.
    """
    notify = observer if observer is not None else (lambda s: None)
    state = state0
    notify(state)
    if control.t_end <= state.t:
        return state

    if control.mode == "fixed":
        return _integrate_fixed(state, control, params, notify, observe_every, observe_dt)
    return _integrate_cfl(state, control, params, notify, observe_every, observe_dt)


def _next_mark(t, observe_dt):
    return (math.floor(t / observe_dt + 1e-9) + 1) * observe_dt


def _integrate_fixed(state, control, params, notify, observe_every, observe_dt):
    dt = control.dt
    n = _on_grid(state.t, dt)
    base = 0.0
    if n is None:
        base, n = state.t, 0
    span = (control.t_end - base) / dt
    n_end = _on_grid(control.t_end - base, dt)
    truncated = n_end is None
    if truncated:
        n_end = math.floor(span)

    mark = _next_mark(state.t, observe_dt) if observe_dt else None
    steps = 0
    while n < n_end:
        if steps >= control.max_steps:
            raise MaxStepsExceeded(f"max_steps={control.max_steps} reached at t={state.t}")
        state = _guarded_step(state, dt, params)
        n += 1
        steps += 1
        state = state.with_time(base + n * dt)
        if n == n_end and not truncated:
            state = state.with_time(control.t_end)
            break
        if _due(state, n, observe_every, mark):
            notify(state)
            if mark is not None:
                mark = _next_mark(state.t, observe_dt)

    if truncated:
        h = control.t_end - state.t
        if h > 0:
            if steps >= control.max_steps:
                raise MaxStepsExceeded(f"max_steps={control.max_steps} reached at t={state.t}")
            state = _guarded_step(state, h, params).with_time(control.t_end)
    notify(state)
    return state


def _integrate_cfl(state, control, params, notify, observe_every, observe_dt):
    mark = _next_mark(state.t, observe_dt) if observe_dt else None
    steps = 0
    while True:
        remaining = control.t_end - state.t
        if remaining <= 1e-14 * max(1.0, control.t_end):
            break
        if steps >= control.max_steps:
            raise MaxStepsExceeded(f"max_steps={control.max_steps} reached at t={state.t}")
        h = stable_dt(state, control.cfl, control.dt_max)
        last = h >= remaining
        state = _guarded_step(state, min(h, remaining), params)
        steps += 1
        if last:
            state = state.with_time(control.t_end)
            break
        if _due(state, steps, observe_every, mark):
            notify(state)
            if mark is not None:
                mark = _next_mark(state.t, observe_dt)
    notify(state)
    return state


def _due(state, n, observe_every, mark):
    if mark is not None:
        return state.t >= mark - 1e-12
    return bool(observe_every) and n % observe_every == 0


def _guarded_step(state, dt, params):
    try:
        return rk4_step(state, dt, params)
    except NonFiniteError as exc:
        log.error("integration aborted: non-finite values after t=%r", state.t)
        raise NonFiniteError(
            f"non-finite values in step starting at t={state.t!r}", t=exc.t, last_good_t=state.t
        ) from exc
