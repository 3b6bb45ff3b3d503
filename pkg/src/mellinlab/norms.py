"""Norms and functionals on R^n, on the cylinder R x S^{n-1} and on the line.

Integrals over R^n are evaluated in log-polar form,

    int_{R^n} h(x) dx = sum_i sum_j w_j h(e^{s_i} omega_j) e^{n s_i} ds,

in log space so that wide grids and large weight exponents do not overflow.
Every norm returns 0 for the zero input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .core_fields import (
    LogField,
    RadialProfile,
    ScalarField,
    angular_gradient_sq,
    apply_L,
    s_derivative,
    spherical_mean,
)
from .semigroup import heat_kernel, sampled_kernel_mass, RENORM_THRESHOLD

__all__ = [
    "NORM_KINDS",
    "NormSpec",
    "BesovGridError",
    "rn_integral",
    "lp_norm_rn",
    "lp_norm_cylinder",
    "lq_norm_line",
    "weak_lq",
    "besov_norm",
    "l2star_radial",
    "gradient_integral",
    "norm",
]

NORM_KINDS = ("lp_rn", "lp_cylinder", "lq_line", "weak_lq", "besov", "l2star_radial")


class BesovGridError(ValueError):
    """The sup defining the B^alpha norm sits at an end of the time grid."""


def _check_exponent(p, strict=False):
    if not np.isfinite(p) or p < 1 or (strict and p == 1):
        raise ValueError(f"exponent must be {'>' if strict else '>='} 1, got {p}")


def _log_abs(a):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(a))


def rn_integral(abs_data, p, exponent, f: ScalarField) -> float:
    """sum_ij w_j |abs_data_ij|^p exp(exponent * s_i) ds for the grid/sphere
    of ``f``.  Zero samples contribute exactly zero."""
    with np.errstate(over="ignore", under="ignore"):
        logs = p * _log_abs(abs_data) + exponent * f.grid.s[:, None]
        vals = np.exp(logs)
    return float(np.sum(vals @ f.sphere.weights) * f.grid.spacing)


def lp_norm_rn(f: ScalarField, p: float, weight: str | None = None, powered: bool = False) -> float:
    """||f||_{L^p(R^n)} with optional weight ``"hardy"`` = |x|^{-p}.

    ``powered=True`` returns the integral int |f|^p W dx instead of its p-th
    root.
    """
    _check_exponent(p)
    extra = 0.0
    if weight == "hardy":
        extra = -p
    elif weight is not None:
        raise ValueError(f"unknown weight {weight!r}")
    val = rn_integral(f.data, p, f.dimension - p * f.kappa + extra, f)
    return val if powered else val ** (1 / p)


def gradient_integral(f: ScalarField, p: float, kind: str = "grad") -> float:
    """Integrals of gradient expressions over R^n.

    kind:
      ``"grad"``    int |grad f|^p dx
      ``"r_grad"``  int (|x| |grad f|)^p dx
      ``"grad_rf"`` int |grad(|x| f)|^p dx
      ``"L"``       int |L f|^p dx

    Uses r^2 |grad f|^2 = |L f|^2 + |grad_omega f|^2 and
    grad(|x| f) = (f + L f) x/|x| + grad_omega f.
    """
    _check_exponent(p)
    n, kap = f.dimension, f.kappa
    Lf = apply_L(f).data
    ang = angular_gradient_sq(f)
    if kind == "L":
        return rn_integral(Lf, p, n - p * kap, f)
    if kind == "grad_rf":
        mag = np.sqrt(np.abs(f.data + Lf) ** 2 + ang)
        return rn_integral(mag, p, n - p * kap, f)
    mag = np.sqrt(np.abs(Lf) ** 2 + ang)
    if kind == "r_grad":
        return rn_integral(mag, p, n - p * kap, f)
    if kind == "grad":
        return rn_integral(mag, p, n - p - p * kap, f)
    raise ValueError(f"unknown gradient functional {kind!r}")


def lp_norm_cylinder(g: LogField, p: float) -> float:
    """(int_R int_S |g|^p domega ds)^{1/p}."""
    _check_exponent(p)
    val = np.sum((np.abs(g.values) ** p) @ g.sphere.weights) * g.grid.spacing
    return float(val) ** (1 / p)


def lq_norm_line(G: RadialProfile, q: float) -> float:
    """(sum |G|^q ds)^{1/q}."""
    _check_exponent(q)
    return float(np.sum(np.abs(G.values) ** q) * G.grid.spacing) ** (1 / q)


def weak_lq(G: RadialProfile, q: float) -> float:
    """(sup_u u^q lambda(|G| >= u))^{1/q} over the sample distribution.

    With |G| sorted decreasingly as a_1 >= a_2 >= ..., the level set
    {|G| >= a_k} holds at least k samples, so the sup is max_k a_k^q k ds.
    """
    _check_exponent(q, strict=True)
    a = np.sort(np.abs(G.values))[::-1]
    if a.size == 0 or a[0] == 0:
        return 0.0
    k = np.arange(1, a.size + 1)
    # ties: the level set {|G| >= a_k} contains every sample equal to a_k
    last = np.searchsorted(-a, -a, side="right")
    k = np.maximum(k, last)
    return float(np.max(a ** q * k * G.grid.spacing)) ** (1 / q)


# ---------------------------------------------------------------------------
# B^alpha


def default_time_grid():
    return np.logspace(-4, 4, 200)


def _smoothed_sup(absG, h, times):
    """max_s (P_t |G|)(s) over grid nodes for every t, batched over t."""
    n = absG.shape[0]
    length = 1 << int(math.ceil(math.log2(2 * n)))
    k = np.arange(length)
    z = np.where(k < length // 2, k, k - length) * h
    vhat = np.fft.rfft(absG, n=length)
    out = np.empty(len(times))
    for start in range(0, len(times), 32):
        ts = np.asarray(times[start:start + 32])
        ker = heat_kernel(z[:, None], 0.0, ts[None, :]) * h
        for i, t in enumerate(ts):
            mass = sampled_kernel_mass(t, h)
            if abs(mass - 1) > RENORM_THRESHOLD:
                ker[:, i] /= mass
        conv = np.fft.irfft(np.fft.rfft(ker, axis=0) * vhat[:, None], n=length, axis=0)[:n]
        out[start:start + 32] = conv.max(axis=0)
    return out


def besov_norm(g: LogField | RadialProfile, alpha: float, t_grid=None, *,
               max_widen: int = 2, refine: bool = True) -> float:
    """sup_t t^{-alpha/2} || P_t |G| ||_inf with G the spherical mean of g.

    The sup is taken over ``t_grid`` (default: 200 log-spaced points on
    [1e-4, 1e4]).  If it lands on an end point the grid is extended by a
    factor 10 on that side, at most ``max_widen`` times, before
    :class:`BesovGridError` is raised.  With ``refine`` the best grid point
    is polished by a bounded scalar search in log t between its neighbours.
    """
    if not alpha < 0:
        raise ValueError("the B^alpha norm is only evaluated for alpha < 0")
    G = g if isinstance(g, RadialProfile) else spherical_mean(g)
    absG = np.abs(G.values)
    if not absG.any():
        return 0.0
    h = G.grid.spacing
    times = np.asarray(default_time_grid() if t_grid is None else t_grid, dtype=float)
    if times.ndim != 1 or len(times) < 3 or np.any(times <= 0):
        raise ValueError("t_grid must hold at least three positive times")
    times = np.sort(times)
    for attempt in range(max_widen + 1):
        vals = times ** (-alpha / 2) * _smoothed_sup(absG, h, times)
        k = int(np.argmax(vals))
        if 0 < k < len(times) - 1:
            break
        if attempt == max_widen:
            raise BesovGridError(
                f"sup attained at t = {times[k]:.3g}, an end of the time grid; "
                "the B^alpha norm may be infinite or the grid too narrow")
        step = times[1] / times[0] if k == 0 else times[-1] / times[-2]
        extra = np.geomspace(times[k] / 10 if k == 0 else times[k] * step,
                             times[k] / step if k == 0 else times[k] * 10,
                             int(math.ceil(math.log(10) / math.log(step))))
        times = np.unique(np.concatenate([times, extra]))
    best = float(vals[k])
    if refine:
        def neg(logt):
            t = math.exp(logt)
            return -t ** (-alpha / 2) * _smoothed_sup(absG, h, [t])[0]

        res = minimize_scalar(neg, bounds=(math.log(times[k - 1]), math.log(times[k + 1])),
                              method="bounded", options={"xatol": 1e-10})
        best = max(best, -float(res.fun))
    return best


def l2star_radial(F: RadialProfile, n: int, premultiplier: str | int = 1, kappa: float = 0.0) -> float:
    """(int_0^inf |pre(r) F(r)|^{2*} r^{n-1} dr)^{1/2*}, 2* = 2n/(n-2).

    ``F.values`` holds exp(kappa*s) F(exp(s)); ``premultiplier`` is 1 or
    ``"r"``.
    """
    if n < 3:
        raise ValueError("2* = 2n/(n-2) needs n >= 3")
    q = 2 * n / (n - 2)
    pre = {1: 0.0, "1": 0.0, "r": 1.0}.get(premultiplier)
    if pre is None:
        raise ValueError(f"premultiplier must be 1 or 'r', got {premultiplier!r}")
    with np.errstate(over="ignore", under="ignore"):
        vals = np.exp(q * _log_abs(F.values) + (q * (pre - kappa) + n) * F.grid.s)
    return float(np.sum(vals) * F.grid.spacing) ** (1 / q)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormSpec:
    kind: str
    exponent: float
    weight: str | None = None

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "besov":
            if not self.exponent < 0:
                raise ValueError("besov exponent alpha must be negative")
        elif self.kind == "weak_lq":
            _check_exponent(self.exponent, strict=True)
        elif self.kind != "l2star_radial":
            _check_exponent(self.exponent)


def norm(spec: NormSpec, obj) -> float:
    if spec.kind == "lp_rn":
        return lp_norm_rn(obj, spec.exponent, spec.weight)
    if spec.kind == "lp_cylinder":
        return lp_norm_cylinder(obj, spec.exponent)
    if spec.kind == "lq_line":
        return lq_norm_line(obj, spec.exponent)
    if spec.kind == "weak_lq":
        return weak_lq(obj, spec.exponent)
    if spec.kind == "besov":
        return besov_norm(obj, spec.exponent)
    return l2star_radial(obj, int(spec.exponent), spec.weight or 1)
