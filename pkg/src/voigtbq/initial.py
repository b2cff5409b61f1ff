"""Built-in initial-data families."""

import numpy as np

from . import spectral
from .dynamics import State
from .errors import ConfigError

FAMILIES = ("single_mode", "taylor_green", "random_bandlimited")


def single_mode(grid, k=(1, 0), amp=1.0, field="theta"):
    """``amp * sin(k.x)`` in one field, the other at rest."""
    if field not in ("omega", "theta"):
        raise ConfigError(f"must be 'omega' or 'theta', got {field!r}", key="field")
    k1, k2 = int(k[0]), int(k[1])
    if (k1, k2) == (0, 0):
        raise ConfigError("wavenumber must be nonzero", key="k")
    cut = grid.kmax_retained
    if abs(k1) > cut or abs(k2) > cut:
        raise ConfigError(f"{(k1, k2)} lies outside the dealias mask |k_i| <= {cut}", key="k")
    c = grid.zeros()
    c[grid.index_of((k1, k2))] = amp / 2j
    c[grid.index_of((-k1, -k2))] = -amp / 2j
    zero = grid.zeros()
    if field == "theta":
        return State(zero, c, 0.0)
    return State(c, zero, 0.0)


def taylor_green(grid, amp=1.0):
    """omega = A sin x1 sin x2, theta = A cos x1."""
    x1, x2 = grid.coordinates()
    omega = spectral.dealias(grid, spectral.forward_transform(grid, amp * np.sin(x1) * np.sin(x2)))
    theta = spectral.dealias(grid, spectral.forward_transform(grid, amp * np.cos(x1)))
    omega[0, 0] = 0.0
    return State(omega, theta, 0.0)


def _random_field(grid, rng, kmax, decay):
    kmag = grid.kmag
    band = (kmag > 0) & (kmag <= kmax)
    raw = rng.uniform(0.0, 2.0 * np.pi, size=grid.shape)
    # odd phase => c_{-k} = conj(c_k) exactly
    phase = raw - spectral.hermitian_partner(raw)
    c = np.where(band, (1.0 + kmag) ** (-decay) * np.exp(1j * phase), 0.0)
    return c / spectral.l2_norm(c)


def random_bandlimited(grid, kmax=6, decay=4.0, seed=0, amp=1.0):
    """Random-phase fields on 0 < |k| <= kmax with |f_k| ~ (1+|k|)^-decay.

    Both fields are mean-free and scaled to L2 norm ``amp``. Deterministic in
    ``seed``.
    """
    if decay < 4:
        raise ConfigError(f"must be >= 4 for H^s (s>1) smoothness, got {decay}", key="decay")
    if not 1 <= kmax <= grid.kmax_retained:
        raise ConfigError(
            f"must lie in [1, {grid.kmax_retained}] (dealias mask of N={grid.N}), got {kmax}",
            key="kmax",
        )
    rng = np.random.default_rng(seed)
    omega = amp * _random_field(grid, rng, kmax, decay)
    theta = amp * _random_field(grid, rng, kmax, decay)
    return State(omega, theta, 0.0)


def make_initial_data(spec, grid):
    """Build a State from ``{"family": name, **parameters}``."""
    spec = dict(spec)
    family = spec.pop("family", None)
    builders = {
        "single_mode": single_mode,
        "taylor_green": taylor_green,
        "random_bandlimited": random_bandlimited,
    }
    if family not in builders:
        raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}", key="family")
    try:
        return builders[family](grid, **spec)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family}: {exc}", key=family) from None
