"""Log-polar discretization of R^n, the unitary map to the cylinder R x S^{n-1},
spherical means, the dilation generator and the dilation group.

A point x = r*omega of R^n is stored through s = ln r on a uniform grid and a
quadrature rule on the unit sphere.  Fields are kept in *weighted* form: a
:class:`ScalarField` holds ``data = exp(kappa*s) * f(exp(s)*omega)`` together
with the exponent ``kappa``.  With the default ``kappa = n/2`` the stored data
is exactly the cylinder function ``g = Phi f``.  Other exponents keep fields
that are not square integrable (or that live on very wide log grids) finite.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import roots_legendre, sph_harm_y

__all__ = [
    "FieldError",
    "GridError",
    "TailMassError",
    "LogRadialGrid",
    "SphericalQuadrature",
    "ScalarField",
    "LogField",
    "RadialProfile",
    "TailReport",
    "sphere_area",
    "make_spherical_quadrature",
    "sample_field",
    "sample_log_field",
    "sample_profile",
    "phi_forward",
    "phi_inverse",
    "spherical_mean",
    "s_derivative",
    "apply_A",
    "apply_L",
    "angular_gradient_sq",
    "dilate",
    "tail_report",
    "check_tails",
    "dump_field_csv",
    "dump_profile_csv",
    "grid_to_json",
    "grid_from_json",
]

DERIVATIVE_SCHEMES = ("spectral", "fd4")
DEFAULT_SCHEME = "spectral"


class FieldError(ValueError):
    """Invalid field data or an operation the field cannot support."""


class GridError(ValueError):
    pass


class TailMassError(FieldError):
    pass


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class LogRadialGrid:
    """Uniform grid in the log-radius s = ln r."""

    s_min: float = -12.0
    s_max: float = 12.0
    count: int = 2048

    def __post_init__(self):
        if not (np.isfinite(self.s_min) and np.isfinite(self.s_max)):
            raise GridError("grid bounds must be finite")
        if not self.s_min < self.s_max:
            raise GridError(f"need s_min < s_max, got {self.s_min}, {self.s_max}")
        if int(self.count) != self.count or self.count < 16:
            raise GridError(f"count must be an integer >= 16, got {self.count}")
        object.__setattr__(self, "count", int(self.count))

    @property
    def spacing(self) -> float:
        return (self.s_max - self.s_min) / (self.count - 1)

    @cached_property
    def s(self) -> np.ndarray:
        return _frozen(self.s_min + self.spacing * np.arange(self.count))

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.s)

    def refined(self, factor: int = 2) -> "LogRadialGrid":
        return LogRadialGrid(self.s_min, self.s_max, (self.count - 1) * factor + 1)

    def inner_mask(self, fraction: float = 0.8) -> np.ndarray:
        mid = 0.5 * (self.s_min + self.s_max)
        half = 0.5 * fraction * (self.s_max - self.s_min)
        return np.abs(self.s - mid) <= half


# ---------------------------------------------------------------------------
# sphere quadrature


@dataclass(frozen=True, eq=False)
class SphericalQuadrature:
    """Nodes and positive weights on S^{n-1}.

    ``kind`` is one of ``"points"`` (n = 1), ``"circle"`` (n = 2),
    ``"product"`` (n = 3, Gauss-Legendre in cos(theta) times a uniform
    azimuth) or ``"radial"`` (n >= 4, a single marker node that is only valid
    for radial data).
    """

    dimension: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    # (theta, phi) of each node, n = 3 only
    angles: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def area(self) -> float:
        return sphere_area(self.dimension)

    @property
    def radial_only(self) -> bool:
        return self.kind == "radial"

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Quadrature over the last axis of ``values``."""
        return np.asarray(values) @ self.weights

    def __eq__(self, other):
        if not isinstance(other, SphericalQuadrature):
            return NotImplemented
        return (self.dimension, self.order, self.kind) == (other.dimension, other.order, other.kind)

    def __hash__(self):
        return hash((self.dimension, self.order, self.kind))

    @cached_property
    def _gradient_operators(self):
        # Tangential gradient components as node-to-node matrices.
        if self.kind == "points" or self.kind == "radial":
            return ()
        if self.kind == "circle":
            m = self.size
            k = np.fft.fftfreq(m, 1.0 / m)
            if m % 2 == 0:
                k[m // 2] = 0.0
            eye = np.eye(m)
            d_phi = np.fft.ifft(1j * k[:, None] * np.fft.fft(eye, axis=0), axis=0)
            return (d_phi,)
        theta, phi = self.angles[:, 0], self.angles[:, 1]
        L = self.order
        ys, dth, dph = [], [], []
        for l in range(L + 1):
            for m in range(-l, l + 1):
                y = sph_harm_y(l, m, theta, phi)
                up = sph_harm_y(l, m + 1, theta, phi) if m < l else 0.0
                dth.append(m / np.tan(theta) * y
                           + math.sqrt((l - m) * (l + m + 1)) * np.exp(-1j * phi) * up)
                dph.append(1j * m * y / np.sin(theta))
                ys.append(y)
        Y = np.array(ys).T
        project = Y.conj().T * self.weights[None, :]
        return (np.array(dth).T @ project, np.array(dph).T @ project)


def make_spherical_quadrature(n: int, order: int = 8) -> SphericalQuadrature:
    """Quadrature on S^{n-1}.

    For n = 2 the rule has ``2*order + 2`` equally spaced angles and for n = 3
    it is the product of ``order + 1`` Gauss-Legendre nodes in cos(theta) and
    ``2*order + 2`` azimuths; both integrate harmonics of degree up to
    ``2*order + 1`` exactly.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    if int(order) != order or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    n, order = int(n), int(order)
    if n == 1:
        nodes = np.array([[-1.0], [1.0]])
        return SphericalQuadrature(1, order, _frozen(nodes), _frozen(np.ones(2)), "points")
    if n == 2:
        m = 2 * order + 2
        ang = 2 * np.pi * np.arange(m) / m
        nodes = np.column_stack([np.cos(ang), np.sin(ang)])
        w = np.full(m, 2 * np.pi / m)
        return SphericalQuadrature(2, order, _frozen(nodes), _frozen(w), "circle",
                                   angles=_frozen(ang[:, None]))
    if n == 3:
        mu, wmu = roots_legendre(order + 1)
        m = 2 * order + 2
        phi = 2 * np.pi * np.arange(m) / m
        theta = np.arccos(mu)
        T, P = np.meshgrid(theta, phi, indexing="ij")
        W = np.outer(wmu, np.full(m, 2 * np.pi / m))
        T, P, W = T.ravel(), P.ravel(), W.ravel()
        nodes = np.column_stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)])
        return SphericalQuadrature(3, order, _frozen(nodes), _frozen(W), "product",
                                   angles=_frozen(np.column_stack([T, P])))
    node = np.zeros((1, n))
    node[0, 0] = 1.0
    return SphericalQuadrature(n, order, _frozen(node), _frozen(np.array([sphere_area(n)])), "radial")


# ---------------------------------------------------------------------------
# fields


def _check_values(values, shape):
    values = np.asarray(values, dtype=complex)
    if values.shape != shape:
        raise FieldError(f"expected values of shape {shape}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise FieldError("field values must be finite")
    return _frozen(values)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Samples of f(r*omega) on a log-radial grid times a sphere rule.

    ``data[i, j] = exp(kappa*s_i) * f(exp(s_i)*omega_j)``.  ``values`` gives
    the plain samples f(exp(s_i)*omega_j).
    """

    grid: LogRadialGrid
    sphere: SphericalQuadrature
    data: np.ndarray
    kappa: float | None = None
    radial: bool = False
    scheme: str = DEFAULT_SCHEME

    def __post_init__(self):
        if self.kappa is None:
            object.__setattr__(self, "kappa", self.dimension / 2)
        object.__setattr__(self, "data",
                           _check_values(self.data, (self.grid.count, self.sphere.size)))
        if self.sphere.radial_only and not self.radial:
            raise FieldError("radial-only sphere rule used with non-radial data")
        if self.scheme not in DERIVATIVE_SCHEMES:
            raise FieldError(f"unknown derivative scheme {self.scheme!r}")

    @property
    def dimension(self) -> int:
        return self.sphere.dimension

    @property
    def values(self) -> np.ndarray:
        return np.exp(-self.kappa * self.grid.s)[:, None] * self.data

    def with_data(self, data, kappa=None, radial=None) -> "ScalarField":
        return ScalarField(self.grid, self.sphere, data,
                           self.kappa if kappa is None else kappa,
                           self.radial if radial is None else radial, self.scheme)

    def reweighted(self, kappa: float) -> "ScalarField":
        """Same function, stored with a different weight exponent."""
        w = np.exp((kappa - self.kappa) * self.grid.s)[:, None]
        return self.with_data(w * self.data, kappa=kappa)


@dataclass(frozen=True, eq=False)
class LogField:
    """Samples of g(s, omega) on R x S^{n-1}."""

    grid: LogRadialGrid
    sphere: SphericalQuadrature
    values: np.ndarray
    radial: bool = False
    scheme: str = DEFAULT_SCHEME

    def __post_init__(self):
        object.__setattr__(self, "values",
                           _check_values(self.values, (self.grid.count, self.sphere.size)))
        if self.sphere.radial_only and not self.radial:
            raise FieldError("radial-only sphere rule used with non-radial data")
        if self.scheme not in DERIVATIVE_SCHEMES:
            raise FieldError(f"unknown derivative scheme {self.scheme!r}")

    @property
    def dimension(self) -> int:
        return self.sphere.dimension

    def with_values(self, values) -> "LogField":
        return LogField(self.grid, self.sphere, values, self.radial, self.scheme)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples G(s_i) of a function of one variable on the log grid."""

    grid: LogRadialGrid
    values: np.ndarray
    scheme: str = DEFAULT_SCHEME

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.values, (self.grid.count,)))

    def with_values(self, values) -> "RadialProfile":
        return RadialProfile(self.grid, values, self.scheme)


def sample_field(func, grid=None, sphere=None, *, n=None, order=8, kappa=None,
                 radial=False, scheme=DEFAULT_SCHEME) -> ScalarField:
    """Sample ``func(r, omega)`` (broadcasting, r of shape (count, 1) and
    omega of shape (1, nodes, n)) into a ScalarField."""
    grid = grid or LogRadialGrid()
    if sphere is None:
        if n is None:
            raise ValueError("pass either a sphere rule or a dimension")
        sphere = make_spherical_quadrature(n, order)
    if kappa is None:
        kappa = sphere.dimension / 2
    r = grid.r[:, None]
    vals = np.broadcast_to(func(r, sphere.nodes[None, :, :]), (grid.count, sphere.size))
    data = np.exp(kappa * grid.s)[:, None] * vals
    return ScalarField(grid, sphere, data, kappa, radial, scheme)


def sample_log_field(func, grid=None, sphere=None, *, n=None, order=8, kappa=None,
                     radial=False, scheme=DEFAULT_SCHEME) -> ScalarField:
    """Build a ScalarField from its weighted data ``func(s, omega)``.

    ``func`` returns ``exp(kappa*s) f(exp(s) omega)``; with the default
    ``kappa = n/2`` that is the cylinder function Phi f.
    """
    grid = grid or LogRadialGrid()
    if sphere is None:
        if n is None:
            raise ValueError("pass either a sphere rule or a dimension")
        sphere = make_spherical_quadrature(n, order)
    s = grid.s[:, None]
    vals = np.broadcast_to(func(s, sphere.nodes[None, :, :]), (grid.count, sphere.size))
    return ScalarField(grid, sphere, np.asarray(vals, dtype=complex), kappa, radial, scheme)


def sample_profile(func, grid=None, scheme=DEFAULT_SCHEME) -> RadialProfile:
    grid = grid or LogRadialGrid()
    return RadialProfile(grid, np.asarray(func(grid.s), dtype=complex), scheme)


# ---------------------------------------------------------------------------
# the map Phi and spherical means


def phi_forward(f: ScalarField) -> LogField:
    """(Phi f)(s, omega) = exp(s n / 2) f(exp(s) omega)."""
    shift = f.dimension / 2 - f.kappa
    g = f.data if shift == 0 else np.exp(shift * f.grid.s)[:, None] * f.data
    if not np.all(np.isfinite(g)):
        raise FieldError("Phi f overflows on this grid; use a narrower grid")
    return LogField(f.grid, f.sphere, g, f.radial, f.scheme)


def phi_inverse(g: LogField) -> ScalarField:
    """(Phi^{-1} g)(r omega) = r^{-n/2} g(ln r, omega)."""
    return ScalarField(g.grid, g.sphere, g.values, g.dimension / 2, g.radial, g.scheme)


def spherical_mean(g: LogField | ScalarField, radial: bool | None = None) -> RadialProfile:
    """Average over the sphere at every grid radius.

    A ScalarField is first mapped through Phi.  ``radial`` overrides the
    field's own radial flag (the caller asserts radial symmetry).
    """
    if isinstance(g, ScalarField):
        g = phi_forward(g)
    is_radial = g.radial if radial is None else radial
    if g.sphere.radial_only and not is_radial:
        raise FieldError("spherical mean of non-radial data needs a full sphere rule")
    mean = g.sphere.integrate(g.values) / g.sphere.area
    return RadialProfile(g.grid, mean, g.scheme)


# ---------------------------------------------------------------------------
# derivatives in s


def _fd4(values, h):
    v = np.asarray(values)
    if v.shape[0] < 5:
        raise GridError("grid too coarse for the 4th-order stencil")
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    # one-sided 4th-order closures
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h)
    d[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / (12 * h)
    d[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / (12 * h)
    return d


def _spectral(values, h):
    v = np.asarray(values)
    n = v.shape[0]
    k = 2 * np.pi * np.fft.fftfreq(n, h)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = (n,) + (1,) * (v.ndim - 1)
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(v, axis=0), axis=0)


def s_derivative(values, spacing: float, scheme: str = DEFAULT_SCHEME) -> np.ndarray:
    """d/ds along axis 0.

    ``"spectral"`` treats the data as periodic over the grid and is accurate
    to rounding for data that decays at both ends; ``"fd4"`` is the
    4th-order centred stencil with one-sided closures.
    """
    if scheme == "spectral":
        return _spectral(values, spacing)
    if scheme == "fd4":
        return _fd4(values, spacing)
    raise ValueError(f"unknown derivative scheme {scheme!r}")


def apply_A(g: LogField) -> LogField:
    """The dilation generator in cylinder coordinates, -i d/ds."""
    return g.with_values(-1j * s_derivative(g.values, g.grid.spacing, g.scheme))


def apply_L(f: ScalarField) -> ScalarField:
    """L f = (x . grad) f, evaluated as Phi^{-1} (d/ds - n/2) Phi f.

    In weighted storage this is ``data' - kappa*data`` with the same kappa,
    since r d/dr f(r omega) is the s-derivative of the samples.
    """
    d = s_derivative(f.data, f.grid.spacing, f.scheme)
    return f.with_data(d - f.kappa * f.data)


def angular_gradient_sq(f: ScalarField) -> np.ndarray:
    """|grad_omega f|^2 at every node, in the weighted storage of ``f``.

    Returns ``exp(2 kappa s) |grad_omega f|^2`` on the unit-sphere metric, so
    that ``r^2 |grad f|^2 = |L f|^2 + |grad_omega f|^2``.  Zero for n = 1 and
    for radial-only rules.
    """
    ops = f.sphere._gradient_operators
    if not ops or f.radial:
        return np.zeros(f.data.shape)
    out = np.zeros(f.data.shape)
    for op in ops:
        out += np.abs(f.data @ op.T) ** 2
    return out


# ---------------------------------------------------------------------------
# dilations


def _lagrange_shift(values, shift_cells, points):
    """Evaluate samples at i + shift_cells with ``points``-point Lagrange
    interpolation (points even).  Outside the grid the data is zero."""
    n = values.shape[0]
    base = math.floor(shift_cells)
    frac = shift_cells - base
    half = points // 2
    offsets = np.arange(-half + 1, half + 1)
    out = np.zeros_like(values)
    idx = np.arange(n)
    for o in offsets:
        # weight of node base+o at fractional position frac
        w = 1.0
        for q in offsets:
            if q != o:
                w *= (frac - q) / (o - q)
        src = idx + base + o
        ok = (src >= 0) & (src < n)
        out[ok] += w * values[src[ok]]
    return out


def dilate(f: ScalarField, t: float, return_error: bool = False):
    """(U(t) f)(x) = exp(t n/2) f(exp(t) x), a shift by t in s.

    Off-grid shifts use 4-point (cubic) Lagrange interpolation.  With
    ``return_error=True`` also returns the max difference between the cubic
    and a 6-point interpolant, an estimate of the interpolation error.
    """
    span = f.grid.s_max - f.grid.s_min
    if not np.isfinite(t) or abs(t) >= span:
        raise GridError(f"shift {t} exceeds the grid span {span}")
    cells = t / f.grid.spacing
    scale = math.exp(t * f.dimension / 2 - f.kappa * t)
    if abs(cells - round(cells)) < 1e-12:
        shifted = _lagrange_shift(f.data, round(cells), 2)
        err = 0.0
    else:
        shifted = _lagrange_shift(f.data, cells, 4)
        err = float(np.max(np.abs(shifted - _lagrange_shift(f.data, cells, 6)))) * scale
    dens = np.abs(f.data) ** 2 @ f.sphere.weights
    src = f.grid.s - t
    lost = dens[(src < f.grid.s_min) | (src > f.grid.s_max)].sum()
    if dens.sum() > 0 and lost / dens.sum() > 1e-12:
        warnings.warn(f"dilation by {t} moves {lost / dens.sum():.2e} of the mass off the grid",
                      RuntimeWarning, stacklevel=2)
    out = f.with_data(scale * shifted)
    return (out, err) if return_error else out


# ---------------------------------------------------------------------------
# tails


@dataclass(frozen=True)
class TailReport:
    outer_mass: float
    total_mass: float
    inner_fraction: float

    @property
    def relative(self) -> float:
        return self.outer_mass / self.total_mass if self.total_mass > 0 else 0.0


def tail_report(obj, inner_fraction: float = 0.8) -> TailReport:
    """Squared mass of the stored samples outside the central part of the grid.

    For a ScalarField the weighted data is used (the L^2 mass of Phi f when
    kappa = n/2).
    """
    if isinstance(obj, ScalarField):
        vals, w = obj.data, obj.sphere.weights
    elif isinstance(obj, LogField):
        vals, w = obj.values, obj.sphere.weights
    else:
        vals, w = obj.values[:, None], np.ones(1)
    dens = (np.abs(vals) ** 2) @ w * obj.grid.spacing
    inner = obj.grid.inner_mask(inner_fraction)
    return TailReport(float(dens[~inner].sum()), float(dens.sum()), inner_fraction)


def check_tails(obj, tol: float = 1e-12, inner_fraction: float = 0.8) -> TailReport:
    rep = tail_report(obj, inner_fraction)
    if rep.relative > tol:
        raise TailMassError(f"tail mass {rep.relative:.3e} exceeds {tol:.1e}")
    return rep


# ---------------------------------------------------------------------------
# serialization


def grid_to_json(grid: LogRadialGrid, sphere: SphericalQuadrature | None = None) -> str:
    obj = {"s_min": grid.s_min, "s_max": grid.s_max, "count": grid.count,
           "dimension": sphere.dimension if sphere else None,
           "order": sphere.order if sphere else None}
    return json.dumps(obj)


def grid_from_json(text: str):
    obj = json.loads(text)
    grid = LogRadialGrid(obj["s_min"], obj["s_max"], obj["count"])
    sphere = None
    if obj.get("dimension") is not None:
        sphere = make_spherical_quadrature(obj["dimension"], obj.get("order") or 1)
    return grid, sphere


def dump_field_csv(obj: LogField | ScalarField, path) -> None:
    """Write ``s,omega_index,re,im``; ScalarFields are written as plain samples."""
    vals = obj.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "omega_index", "re", "im"])
        for i, s in enumerate(obj.grid.s):
            for j in range(vals.shape[1]):
                v = vals[i, j]
                w.writerow([repr(float(s)), j, repr(float(v.real)), repr(float(v.imag))])


def dump_profile_csv(profile: RadialProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "re", "im"])
        for s, v in zip(profile.grid.s, profile.values):
            w.writerow([repr(float(s)), repr(float(v.real)), repr(float(v.imag))])
