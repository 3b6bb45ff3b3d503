"""The semigroup P_t = exp(-t A^2) and exp(-t L*L) = exp(-t n^2/4) P_t.

In cylinder coordinates P_t is convolution in s with the Gaussian kernel
(4 pi t)^{-1/2} exp(-(r - s)^2 / 4t), applied slice by slice in omega.  Three
independent evaluation paths are provided: a quadrature sum (``direct``), a
zero-padded FFT convolution (``fast-convolution``) and the multiplier
exp(-t tau^2) on the discrete Mellin data (``mellin-multiplier``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .core_fields import (
    LogField,
    LogRadialGrid,
    RadialProfile,
    ScalarField,
    phi_forward,
    phi_inverse,
)

__all__ = [
    "METHODS",
    "LeakageError",
    "SemigroupQuery",
    "heat_kernel",
    "sampled_kernel_mass",
    "evolve",
    "evolve_LstarL",
    "smoothed_derivative",
    "linear_convolve",
]

METHODS = ("direct", "fast-convolution", "mellin-multiplier")
T_MIN, T_MAX = 1e-4, 1e4
RENORM_THRESHOLD = 1e-13


class LeakageError(ValueError):
    """Kernel mass escaping the padded window exceeds tolerance."""

    def __init__(self, leakage, tol):
        super().__init__(f"tail leakage {leakage:.3e} exceeds tolerance {tol:.1e}; increase pad_width")
        self.leakage = leakage


def heat_kernel(r, s, t):
    """(4 pi t)^{-1/2} exp(-(r - s)^2 / 4t)."""
    if not np.all(np.asarray(t) > 0):
        raise ValueError("heat kernel needs t > 0")
    r, s = np.asarray(r, dtype=float), np.asarray(s, dtype=float)
    return np.exp(-((r - s) ** 2) / (4 * t)) / np.sqrt(4 * np.pi * t)


@dataclass(frozen=True)
class SemigroupQuery:
    time: float
    method: str = "fast-convolution"
    pad_width: float | None = None
    leakage_tol: float = 1e-8

    def __post_init__(self):
        t = self.time
        if not (np.isfinite(t) and t > 0):
            raise ValueError(f"semigroup time must be positive, got {t}")
        if t < T_MIN or t > T_MAX:
            raise ValueError(f"t = {t} outside the supported range [{T_MIN}, {T_MAX}]; "
                             "the kernel is under-resolved below 1e-4")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.pad_width is not None and self.pad_width < 8 * math.sqrt(t):
            raise ValueError(f"pad_width {self.pad_width} is below 8*sqrt(t) = {8 * math.sqrt(t):.4g}")

    def pad_for(self, grid: LogRadialGrid) -> float:
        if self.pad_width is not None:
            return float(self.pad_width)
        return max(8 * math.sqrt(self.time), 10 * grid.spacing)


def sampled_kernel_mass(t: float, h: float) -> float:
    """sum_k K(k h) h over all integers k."""
    kmax = int(math.ceil(12 * math.sqrt(t) / h)) + 1
    k = np.arange(-kmax, kmax + 1)
    return float(np.sum(heat_kernel(k * h, 0.0, t)) * h)


def _kernel_scale(t, h):
    mass = sampled_kernel_mass(t, h)
    return 1.0 / mass if abs(mass - 1.0) > RENORM_THRESHOLD else 1.0


def leakage(values, grid: LogRadialGrid, t: float, pad: float) -> float:
    """Fraction of the evolved mass that leaves [s_min - pad, s_max + pad]."""
    w = np.abs(values)
    if w.ndim > 1:
        w = w.sum(axis=1)
    total = w.sum()
    if total == 0:
        return 0.0
    s = grid.s
    rt = 2 * math.sqrt(t)
    out = 0.5 * (erfc((grid.s_max + pad - s) / rt) + erfc((s - grid.s_min + pad) / rt))
    return float(np.sum(w * out) / total)


def linear_convolve(values, kernel, h, min_length=0):
    """out_i = sum_j kernel((i - j) h) values_j h, exactly, through an FFT of
    power-of-two length at least ``max(2N, min_length)``."""
    v = np.asarray(values)
    n = v.shape[0]
    length = 1 << int(math.ceil(math.log2(max(2 * n, min_length, 2))))
    k = np.arange(length)
    k = np.where(k < length // 2, k, k - length)
    ker = kernel(k * h) * h
    shape = (length,) + (1,) * (v.ndim - 1)
    spec = np.fft.fft(v, n=length, axis=0) * np.fft.fft(ker).reshape(shape)
    out = np.fft.ifft(spec, axis=0)[:n]
    return out


def _direct(values, grid, t):
    s = grid.s
    K = heat_kernel(s[:, None], s[None, :], t) * grid.spacing * _kernel_scale(t, grid.spacing)
    return K @ values


def _fast(values, grid, t, pad):
    h = grid.spacing
    pad_pts = int(math.ceil(pad / h))
    scale = _kernel_scale(t, h)
    return linear_convolve(values, lambda z: heat_kernel(z, 0.0, t) * scale, h,
                           min_length=values.shape[0] + 2 * pad_pts)


def _mellin(values, grid, t, pad):
    from .mellin import log_fourier, log_fourier_inverse

    pad_pts = int(math.ceil(pad / grid.spacing))
    tau, spec = log_fourier(values, grid, pad_pts)
    shape = (len(tau),) + (1,) * (np.ndim(values) - 1)
    return log_fourier_inverse(spec * np.exp(-t * tau ** 2).reshape(shape), grid, pad_pts)


def evolve(g, q: SemigroupQuery | float):
    """P_t applied in s to a RadialProfile or a LogField (slice-wise)."""
    if not isinstance(q, SemigroupQuery):
        q = SemigroupQuery(float(q))
    vals = g.values
    grid = g.grid
    pad = q.pad_for(grid)
    if pad < 8 * math.sqrt(q.time):
        raise ValueError("pad_width below 8*sqrt(t)")
    leak = leakage(vals, grid, q.time, pad)
    if leak > q.leakage_tol:
        raise LeakageError(leak, q.leakage_tol)
    if q.method == "direct":
        out = _direct(vals, grid, q.time)
    elif q.method == "fast-convolution":
        out = _fast(vals, grid, q.time, pad)
    else:
        out = _mellin(vals, grid, q.time, pad)
    return g.with_values(out)


def evolve_LstarL(f: ScalarField, t: float, method: str = "fast-convolution") -> ScalarField:
    """exp(-t L*L) f = exp(-t n^2/4) Phi^{-1} P_t Phi f."""
    g = evolve(phi_forward(f), SemigroupQuery(t, method))
    out = phi_inverse(g.with_values(math.exp(-t * f.dimension ** 2 / 4) * g.values))
    return out.reweighted(f.kappa)


def smoothed_derivative(G: RadialProfile | LogField, t: float):
    """d/ds of P_t G, by convolution with the sampled derivative kernel."""
    if not t > 0:
        raise ValueError("t must be positive")

    def dker(z):
        return -z / (2 * t) * heat_kernel(z, 0.0, t)

    return G.with_values(linear_convolve(G.values, dker, G.grid.spacing))
