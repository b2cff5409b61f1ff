"""Brute-force references for the spectral core.

Nothing here goes through an FFT: the nonlinear flux is a direct double sum
over mode pairs, and the single-mode tendency is written out by hand.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Tendency

MAX_K = 8


@dataclass
class DenseModeArray:
    """Coefficients on the box |k1|, |k2| <= K, stored at ``table[k1 + K, k2 + K]``."""

    K: int
    table: np.ndarray

    def __post_init__(self):
        side = 2 * self.K + 1
        if self.table.shape != (side, side):
            raise ValueError(f"table must be {side}x{side} for K={self.K}")

    @classmethod
    def zeros(cls, K):
        return cls(K, np.zeros((2 * K + 1, 2 * K + 1), dtype=complex))

    def __getitem__(self, k):
        return self.table[k[0] + self.K, k[1] + self.K]

    def __setitem__(self, k, value):
        self.table[k[0] + self.K, k[1] + self.K] = value

    def wavenumbers(self):
        r = np.arange(-self.K, self.K + 1)
        return np.meshgrid(r, r, indexing="ij")

    def truncate(self, K):
        if K > self.K:
            raise ValueError("cannot truncate to a larger box")
        lo = self.K - K
        return DenseModeArray(K, self.table[lo:lo + 2 * K + 1, lo:lo + 2 * K + 1].copy())

    def hermitian_defect(self):
        return float(np.max(np.abs(self.table[::-1, ::-1] - np.conj(self.table))))


def to_dense(grid, coeffs, K):
    """Copy the |k_i| <= K block of an fft-layout array into a DenseModeArray."""
    if 2 * K >= grid.N:
        raise ValueError(f"K={K} does not fit on N={grid.N}")
    r = np.arange(-K, K + 1) % grid.N
    return DenseModeArray(K, coeffs[np.ix_(r, r)].copy())


def from_dense(grid, dense):
    """Inverse of ``to_dense``: embed into a zero fft-layout array."""
    out = grid.zeros()
    r = np.arange(-dense.K, dense.K + 1) % grid.N
    out[np.ix_(r, r)] = dense.table
    return out


def convolution_flux_direct(u1, u2, f, retain=None):
    """``(div(u f))_k = sum_{p+q=k} i k.(u_p f_q)`` by explicit pair enumeration.

    Inputs share the same box size K <= 8. The result is truncated to
    ``|k_i| <= retain`` (default K), the retained set of the grid it is
    compared against.
    """
    K = f.K
    if u1.K != K or u2.K != K:
        raise ValueError("u1, u2 and f must share the same box size")
    if K > MAX_K:
        raise ValueError(f"support K={K} exceeds the cost guard K <= {MAX_K}")
    retain = K if retain is None else retain

    big = 2 * K
    out = DenseModeArray.zeros(big)
    side = 2 * K + 1
    q1, q2 = f.wavenumbers()
    for i in range(side):
        p1 = i - K
        for j in range(side):
            p2 = j - K
            a, b = u1.table[i, j], u2.table[i, j]
            if a == 0 and b == 0:
                continue
            k1 = p1 + q1
            k2 = p2 + q2
            term = 1j * (k1 * a + k2 * b) * f.table
            # output index of k = p + q is (p + q) + 2K
            out.table[i:i + side, j:j + side] += term
    return out.truncate(retain)


def single_mode_tendency(grid, k0, amplitude, params):
    """Closed-form tendency for u = 0, theta = amplitude * sin(k0.x).

    Only the buoyancy term survives: at +-k0 the vorticity tendency is
    (1 + eps|k0|)^-alpha * i k0_1 * theta_k, and the temperature is frozen.
    """
    k1, k2 = int(k0[0]), int(k0[1])
    theta_plus = amplitude / 2j
    kabs = math.sqrt(k1 * k1 + k2 * k2)
    mult = 1.0 if params.epsilon == 0 else (1.0 + params.epsilon * kabs) ** (-params.alpha)
    d_omega = grid.zeros()
    d_omega[grid.index_of((k1, k2))] = mult * 1j * k1 * theta_plus
    d_omega[grid.index_of((-k1, -k2))] = mult * 1j * (-k1) * (-theta_plus)
    return Tendency(d_omega, grid.zeros())


def random_dense_state(rng, K):
    """Random Hermitian ``(u1, u2, f)`` on the box |k_i| <= K, each of unit l2 norm.

    u is built from a random stream function, so it is divergence-free.
    """

    def hermitian(z):
        z = 0.5 * (z + np.conj(z[::-1, ::-1]))
        z[K, K] = 0.0
        return z

    side = 2 * K + 1
    shape = (side, side)
    psi = hermitian(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    f = hermitian(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    f[K, K] = rng.standard_normal()
    r = np.arange(-K, K + 1)
    k1, k2 = np.meshgrid(r, r, indexing="ij")
    u1 = -1j * k2 * psi
    u2 = 1j * k1 * psi
    scale = math.sqrt(np.sum(np.abs(u1) ** 2) + np.sum(np.abs(u2) ** 2))
    u1, u2 = u1 / scale, u2 / scale
    f = f / math.sqrt(np.sum(np.abs(f) ** 2))
    return DenseModeArray(K, u1), DenseModeArray(K, u2), DenseModeArray(K, f)


def oracle_agreement(n_states=50, N=16, seed=0):
    """Max mode-wise |divergence_flux - convolution_flux_direct| over random states."""
    from . import spectral

    grid = spectral.make_grid(N)
    K = grid.kmax_retained
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        u1, u2, f = random_dense_state(rng, K)
        expected = convolution_flux_direct(u1, u2, f, retain=K)
        got = spectral.divergence_flux(
            grid, from_dense(grid, u1), from_dense(grid, u2), from_dense(grid, f)
        )
        worst = max(worst, float(np.max(np.abs(to_dense(grid, got, K).table - expected.table))))
        # nothing outside the retained box
        worst = max(worst, float(np.max(np.abs(got[~grid.dealias_mask]), initial=0.0)))
    return worst
