"""Fourier machinery on the periodic box [0, 2pi)^2.

Coefficient arrays use the full ``fft2`` layout: ``c[i, j]`` is the amplitude
of ``exp(i (k1 x1 + k2 x2))`` where ``k1 = grid.k1[i, j]`` and
``k2 = grid.k2[i, j]``. Axis 0 is x1, axis 1 is x2 (``indexing="ij"``).
The normalization is ``f(x) = sum_k c_k exp(i k.x)`` so ``c[0, 0]`` is the
spatial mean, and the discrete L2 norm of a field is the l2 norm of its
coefficients (no (2pi)^2 volume factor anywhere).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .errors import ConfigError, ConstraintViolation

# relative tolerance for "mean vorticity is zero"
MEAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """N x N collocation grid and its wavenumber lattice.

    Wavenumbers follow ``-N/2 < k_i <= N/2``. The derivative wavenumbers
    ``kd1``, ``kd2`` are the same lattice with the Nyquist row/column zeroed,
    which keeps every odd operator Hermitian-preserving.
    """

    N: int
    k1: np.ndarray
    k2: np.ndarray
    kd1: np.ndarray
    kd2: np.ndarray
    kmag: np.ndarray
    ksq: np.ndarray
    dealias_mask: np.ndarray
    nyquist_free: np.ndarray

    @property
    def dx(self):
        return 2.0 * np.pi / self.N

    @property
    def kmax_retained(self):
        """Largest |k_i| kept by the 2/3 rule."""
        return self.N // 3

    @property
    def shape(self):
        return (self.N, self.N)

    def coordinates(self):
        """Physical sample points ``(x1, x2)`` as two N x N arrays."""
        x = np.arange(self.N) * self.dx
        return np.meshgrid(x, x, indexing="ij")

    def zeros(self):
        return np.zeros(self.shape, dtype=complex)

    def index_of(self, k):
        """Array index of the lattice point ``k = (k1, k2)``."""
        half = self.N // 2
        k1, k2 = int(k[0]), int(k[1])
        if not (-half < k1 <= half and -half < k2 <= half):
            raise ValueError(f"wavenumber {k} outside lattice of N={self.N}")
        return (k1 % self.N, k2 % self.N)

    def __repr__(self):
        return f"SpectralGrid(N={self.N})"


def _frozen(a):
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def make_grid(N):
    """Build the grid for an N x N periodic box. N must be even and >= 8."""
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise ConfigError(f"must be an integer, got {N!r}", key="N")
    N = int(N)
    if N < 8:
        raise ConfigError(f"must be >= 8, got {N}", key="N")
    if N % 2:
        raise ConfigError(f"must be even, got {N}", key="N")

    k = np.fft.fftfreq(N, d=1.0 / N).astype(np.int64)
    k[N // 2] = N // 2  # lattice convention -N/2 < k <= N/2
    k1, k2 = np.meshgrid(k, k, indexing="ij")

    kd = k.astype(float)
    kd[N // 2] = 0.0
    kd1, kd2 = np.meshgrid(kd, kd, indexing="ij")

    ksq = (k1 * k1 + k2 * k2).astype(float)
    cut = N // 3
    mask = (np.abs(k1) <= cut) & (np.abs(k2) <= cut)
    nyq = (np.abs(k1) != N // 2) & (np.abs(k2) != N // 2)
    return SpectralGrid(
        N=N,
        k1=_frozen(k1),
        k2=_frozen(k2),
        kd1=_frozen(kd1),
        kd2=_frozen(kd2),
        kmag=_frozen(np.sqrt(ksq)),
        ksq=_frozen(ksq),
        dealias_mask=_frozen(mask),
        nyquist_free=_frozen(nyq),
    )


@dataclass(frozen=True)
class VoigtParams:
    """Regularization strength ``epsilon`` and the exponents on the velocity
    (``alpha``) and temperature (``beta``) equations. ``epsilon == 0`` is the
    inviscid Boussinesq system whatever the exponents."""

    epsilon: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("epsilon", "alpha", "beta"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ConfigError(f"must be a finite nonnegative number, got {value!r}", key=name)
            object.__setattr__(self, name, float(value))

    @property
    def is_boussinesq(self):
        return self.epsilon == 0.0


def forward_transform(grid, samples):
    """Physical N x N real samples -> Fourier coefficients (mean at [0, 0])."""
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise ValueError(f"expected samples of shape {grid.shape}, got {samples.shape}")
    return scipy.fft.fft2(samples, norm="forward")


def inverse_transform(grid, coeffs):
    """Fourier coefficients -> real physical samples."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != grid.shape:
        raise ValueError(f"expected coefficients of shape {grid.shape}, got {coeffs.shape}")
    return scipy.fft.ifft2(coeffs, norm="forward").real


def hermitian_partner(coeffs):
    """Array whose entry at k is the input's entry at -k."""
    return np.roll(np.flip(coeffs, axis=(0, 1)), 1, axis=(0, 1))


def hermitian_defect(coeffs):
    """max_k |c_{-k} - conj(c_k)|; zero for the transform of a real field."""
    return float(np.max(np.abs(hermitian_partner(coeffs) - np.conj(coeffs))))


def voigt_inverse_multiplier(k, params, exponent):
    """Symbol ``(1 + eps |k|)^(-exponent)`` at a single wavenumber ``k``."""
    if params.epsilon == 0.0:
        return 1.0
    kabs = float(np.hypot(k[0], k[1]))
    return (1.0 + params.epsilon * kabs) ** (-exponent)


def voigt_symbol(grid, epsilon, exponent):
    """Array of ``(1 + eps |k|)^(-exponent)`` over the whole lattice."""
    if epsilon == 0.0 or exponent == 0.0:
        return np.ones(grid.shape)
    return (1.0 + epsilon * grid.kmag) ** (-exponent)


def voigt_weight(grid, epsilon, exponent):
    """Array of ``(1 + eps |k|)^exponent``, the weight of the Voigt energies."""
    if epsilon == 0.0 or exponent == 0.0:
        return np.ones(grid.shape)
    return (1.0 + epsilon * grid.kmag) ** exponent


def dealias(grid, coeffs):
    """Zero every mode outside the 2/3-rule box."""
    return np.where(grid.dealias_mask, coeffs, 0.0)


def check_mean_free(omega_hat):
    """Raise ConstraintViolation unless the k=0 coefficient is negligible."""
    mean = abs(omega_hat[0, 0])
    if mean == 0.0:
        return
    norm = float(np.sqrt(np.sum(np.abs(omega_hat) ** 2)))
    if mean >= MEAN_TOL * norm:
        raise ConstraintViolation(
            f"vorticity must be mean-free: |omega_0| = {mean:.3e}, ||omega|| = {norm:.3e}"
        )


def biot_savart(grid, omega_hat):
    """Velocity ``u = grad_perp Delta^{-1} omega`` in Fourier space.

    ``u_k = -i k_perp omega_k / |k|^2`` with ``k_perp = (-k2, k1)``; the mean
    velocity and the Nyquist modes are set to zero.
    """
    check_mean_free(omega_hat)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = np.where(grid.nyquist_free & (grid.ksq > 0), -omega_hat / grid.ksq, 0.0)
    # u = (-d2 psi, d1 psi)
    u1 = -1j * grid.kd2 * psi
    u2 = 1j * grid.kd1 * psi
    return u1, u2


def flux_from_physical(grid, u1, u2, f):
    """Dealiased coefficients of div(u f) given physical-space u1, u2, f."""
    a = dealias(grid, forward_transform(grid, u1 * f))
    b = dealias(grid, forward_transform(grid, u2 * f))
    out = 1j * grid.kd1 * a + 1j * grid.kd2 * b
    out[0, 0] = 0.0
    return out


def divergence_flux(grid, u1_hat, u2_hat, f_hat):
    """Dealiased Fourier coefficients of ``div(u f)``.

    Products are formed pointwise on the grid; with 2/3-dealiased inputs they
    are exact on every retained mode.
    """
    u1 = inverse_transform(grid, u1_hat)
    u2 = inverse_transform(grid, u2_hat)
    f = inverse_transform(grid, f_hat)
    return flux_from_physical(grid, u1, u2, f)


def l2_norm(coeffs):
    return float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))


def inner(a, b):
    """Real part of ``sum_k conj(a_k) b_k``, the discrete L2 pairing."""
    return float(np.real(np.vdot(a, b)))
