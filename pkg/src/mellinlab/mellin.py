"""Discrete Mellin transform M = F o Phi and the diagonalization checks.

The Fourier transform in s uses the symmetric continuum normalization

    (M psi)(tau, omega) = (2 pi)^{-1/2} int exp(-i s tau) (Phi psi)(s, omega) ds,

approximated on the (optionally zero-padded) log grid, so that
sum |M psi|^2 dtau = ||psi||^2 holds exactly at the discrete level.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core_fields import (
    LogField,
    LogRadialGrid,
    RadialProfile,
    ScalarField,
    SphericalQuadrature,
    apply_A,
    dilate,
    phi_forward,
    phi_inverse,
)

__all__ = [
    "MellinData",
    "Deviation",
    "log_fourier",
    "log_fourier_inverse",
    "mellin_forward",
    "mellin_inverse",
    "apply_multiplier",
    "parseval_defect",
    "check_dilation_shift",
    "check_generator",
    "check_semigroup",
    "check_generator_squared",
    "dump_spectrum_csv",
]


def _padded_start(grid, pad_pts):
    return grid.s_min - pad_pts * grid.spacing


def log_fourier(values, grid: LogRadialGrid, pad_pts: int = 0):
    """Continuum-normalized DFT along axis 0.  Returns (tau, spectrum) in FFT
    order; the data is zero-padded by ``pad_pts`` samples on each side."""
    v = np.asarray(values)
    h = grid.spacing
    if pad_pts:
        widths = [(pad_pts, pad_pts)] + [(0, 0)] * (v.ndim - 1)
        v = np.pad(v, widths)
    n = v.shape[0]
    tau = 2 * np.pi * np.fft.fftfreq(n, h)
    phase = np.exp(-1j * tau * _padded_start(grid, pad_pts)) * h / math.sqrt(2 * np.pi)
    shape = (n,) + (1,) * (v.ndim - 1)
    return tau, phase.reshape(shape) * np.fft.fft(v, axis=0)


def log_fourier_inverse(spectrum, grid: LogRadialGrid, pad_pts: int = 0):
    spec = np.asarray(spectrum)
    n = spec.shape[0]
    if n != grid.count + 2 * pad_pts:
        raise ValueError(f"spectrum length {n} does not match grid {grid.count} + 2*{pad_pts}")
    h = grid.spacing
    tau = 2 * np.pi * np.fft.fftfreq(n, h)
    phase = np.exp(1j * tau * _padded_start(grid, pad_pts)) * math.sqrt(2 * np.pi) / h
    shape = (n,) + (1,) * (spec.ndim - 1)
    v = np.fft.ifft(phase.reshape(shape) * spec, axis=0)
    return v[pad_pts:pad_pts + grid.count]


@dataclass(frozen=True, eq=False)
class MellinData:
    grid: LogRadialGrid
    sphere: SphericalQuadrature
    frequencies: np.ndarray
    values: np.ndarray
    pad_points: int = 0
    radial: bool = False
    scheme: str = "spectral"

    @property
    def spacing(self) -> float:
        return 2 * np.pi / (len(self.frequencies) * self.grid.spacing)

    @property
    def nyquist(self) -> float:
        return np.pi / self.grid.spacing

    def band(self, fraction: float = 0.5) -> np.ndarray:
        return np.abs(self.frequencies) <= fraction * self.nyquist

    def with_values(self, values) -> "MellinData":
        return MellinData(self.grid, self.sphere, self.frequencies, np.asarray(values),
                          self.pad_points, self.radial, self.scheme)


def mellin_forward(f: ScalarField | LogField, pad_points: int = 0) -> MellinData:
    g = phi_forward(f) if isinstance(f, ScalarField) else f
    tau, spec = log_fourier(g.values, g.grid, pad_points)
    return MellinData(g.grid, g.sphere, tau, spec, pad_points, g.radial, g.scheme)


def mellin_inverse(d: MellinData) -> ScalarField:
    vals = log_fourier_inverse(d.values, d.grid, d.pad_points)
    return phi_inverse(LogField(d.grid, d.sphere, vals, d.radial, d.scheme))


def apply_multiplier(d: MellinData, multiplier) -> MellinData:
    """Multiply by m(tau), given as a callable or an array over frequencies."""
    m = multiplier(d.frequencies) if callable(multiplier) else np.asarray(multiplier)
    m = np.broadcast_to(m, d.frequencies.shape)
    return d.with_values(m[:, None] * d.values)


def parseval_defect(f: ScalarField, pad_points: int = 0) -> float:
    """Relative difference between sum |M f|^2 dtau and ||Phi f||^2."""
    g = phi_forward(f)
    d = mellin_forward(g, pad_points)
    lhs = float(np.sum((np.abs(d.values) ** 2) @ d.sphere.weights) * d.spacing)
    rhs = float(np.sum((np.abs(g.values) ** 2) @ g.sphere.weights) * g.grid.spacing)
    return abs(lhs - rhs) / rhs if rhs else abs(lhs)


@dataclass(frozen=True)
class Deviation:
    """Sup-norm deviation of a diagonalization identity.

    ``in_band`` is measured for |tau| <= band_fraction * tau_Nyquist,
    ``out_of_band`` over the remaining frequencies.
    """

    in_band: float
    out_of_band: float
    scale: float
    band_fraction: float

    @property
    def relative(self) -> float:
        return self.in_band / self.scale if self.scale else self.in_band


def _deviation(lhs: MellinData, rhs_values, fraction):
    diff = np.abs(lhs.values - rhs_values)
    band = lhs.band(fraction)
    inb = float(diff[band].max()) if band.any() else 0.0
    outb = float(diff[~band].max()) if (~band).any() else 0.0
    return Deviation(inb, outb, float(np.abs(rhs_values).max()), fraction)


def check_dilation_shift(f: ScalarField, t: float, band_fraction: float = 0.5,
                         dilated: ScalarField | None = None) -> Deviation:
    """|| M(U(t) f) - exp(i t tau) M f ||_inf on the resolved band.

    ``dilated`` may supply U(t) f computed independently (e.g. sampled
    exactly); by default the interpolating :func:`dilate` is used.
    """
    base = mellin_forward(f)
    uf = dilated if dilated is not None else dilate(f, t)
    lhs = mellin_forward(uf)
    rhs = np.exp(1j * t * base.frequencies)[:, None] * base.values
    return _deviation(lhs, rhs, band_fraction)


def check_generator(f: ScalarField, band_fraction: float = 0.5) -> Deviation:
    """|| M(A f) - tau M f ||_inf, with A f from the field's derivative scheme."""
    g = phi_forward(f)
    base = mellin_forward(g)
    lhs = mellin_forward(apply_A(g))
    return _deviation(lhs, base.frequencies[:, None] * base.values, band_fraction)


def check_generator_squared(f: ScalarField, band_fraction: float = 0.5) -> Deviation:
    g = phi_forward(f)
    base = mellin_forward(g)
    lhs = mellin_forward(apply_A(apply_A(g)))
    return _deviation(lhs, base.frequencies[:, None] ** 2 * base.values, band_fraction)


def check_semigroup(f: ScalarField, t: float, method: str = "direct",
                    band_fraction: float = 0.5) -> Deviation:
    """|| M(P_t f) - exp(-t tau^2) M f ||_inf with P_t evaluated by ``method``."""
    from .semigroup import SemigroupQuery, evolve

    g = phi_forward(f)
    base = mellin_forward(g)
    lhs = mellin_forward(evolve(g, SemigroupQuery(t, method)))
    return _deviation(lhs, np.exp(-t * base.frequencies ** 2)[:, None] * base.values, band_fraction)


def dump_spectrum_csv(d: MellinData, path) -> None:
    order = np.argsort(d.frequencies, kind="stable")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "omega_index", "re", "im"])
        for k in order:
            for j in range(d.values.shape[1]):
                v = d.values[k, j]
                w.writerow([repr(float(d.frequencies[k])), j, repr(float(v.real)), repr(float(v.imag))])
