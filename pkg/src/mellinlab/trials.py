"""Trial functions for certification and extremal search.

A trial is described by a JSON-ready dict ``{"family", "params", "context"}``
and rebuilt from it deterministically, so reports can carry the descriptor
instead of the samples.  Every family sizes its own log grid so that the
tail-mass constraint holds for all in-box parameters.

Families
  log_gaussian          f = r^{-n/p} exp(-(ln r - mu)^2 / 2 sigma^2), radial
  log_gaussian_mixture  seeded random complex sums of log-Gaussians, radial
  annulus_bump          exp(-1/(1 - ((s-c)/w)^2)) supported in [c-w, c+w]
  sobolev_bubble        (1 + lam^2 r^2)^{-(n-2)/2}
  perturbed_radial      log-Gaussian times (1 + eps omega_n), n in {2, 3}
  bump_mixture          seeded random non-radial sums of bumps in [-3.5, 3.5]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core_fields import (
    LogRadialGrid,
    RadialProfile,
    ScalarField,
    make_spherical_quadrature,
)

__all__ = [
    "Trial",
    "TrialFamily",
    "build_trial",
    "random_trials",
    "random_profiles",
    "log_gaussian_family",
    "annulus_bump_family",
    "sobolev_bubble_family",
    "perturbed_radial_family",
    "FAMILY_BUILDERS",
    "BUMP_SUPPORT",
]

BUMP_SUPPORT = 3.5


def _radial_sphere(n):
    return make_spherical_quadrature(n, 1)


def _bump(x):
    out = np.zeros_like(x, dtype=float)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1 / (1 - x[inside] ** 2))
    return out


def _log_gaussian(params, ctx):
    n, p = int(ctx["n"]), float(ctx.get("p", 2.0))
    sigma, mu = float(params["sigma"]), float(params.get("mu", 0.0))
    half = max(12.0, (abs(mu) + 7.5 * sigma) / 0.8)
    grid = LogRadialGrid(-half, half, int(ctx.get("count", 2048)))
    data = np.exp(-((grid.s - mu) ** 2) / (2 * sigma ** 2))
    sphere = _radial_sphere(n)
    return ScalarField(grid, sphere, np.repeat(data[:, None], sphere.size, axis=1) + 0j,
                       n / p, True, ctx.get("scheme", "spectral"))


def _mixture(params, ctx):
    n, p = int(ctx["n"]), float(ctx.get("p", 2.0))
    rng = np.random.default_rng([int(params["seed"]), int(params["index"])])
    k = int(rng.integers(1, 5))
    mu = rng.uniform(-3, 3, k)
    sigma = rng.uniform(0.3, 1.5, k)
    amp = rng.normal(size=k) + 1j * rng.normal(size=k)
    grid = LogRadialGrid(-12, 12, int(ctx.get("count", 2048)))
    s = grid.s[:, None]
    data = (amp * np.exp(-((s - mu) ** 2) / (2 * sigma ** 2))).sum(axis=1)
    sphere = _radial_sphere(n)
    return ScalarField(grid, sphere, np.repeat(data[:, None], sphere.size, axis=1),
                       n / p, True, ctx.get("scheme", "spectral"))


def _annulus_bump(params, ctx):
    n = int(ctx["n"])
    half = float(ctx["half"])
    c, w = float(params["center"]), float(params["width"])
    w = min(w, half - abs(c))
    if w <= 0:
        raise ValueError("bump does not fit inside the support window")
    extent = max(12.0, 1.5 * half)
    count = max(int(ctx.get("count", 2048)), int(math.ceil(2 * extent / (w / 60))) + 1)
    grid = LogRadialGrid(-extent, extent, count)
    data = _bump((grid.s - c) / w)
    sphere = _radial_sphere(n)
    return ScalarField(grid, sphere, np.repeat(data[:, None], sphere.size, axis=1) + 0j,
                       None, True, ctx.get("scheme", "spectral"))


def _bubble(params, ctx):
    n = int(ctx["n"])
    if n < 3:
        raise ValueError("the Sobolev bubble needs n >= 3")
    lam = float(params.get("lam", 1.0))
    kappa = (n - 2) / 2
    # the slowest integrand decays like exp(-2 kappa |s|)
    half = abs(math.log(lam)) + 37 / kappa
    grid = LogRadialGrid(-half, half, int(ctx.get("count", 4096)))
    s = grid.s
    data = np.exp(-kappa * np.logaddexp(-s, s + 2 * math.log(lam)))
    sphere = _radial_sphere(n)
    return ScalarField(grid, sphere, np.repeat(data[:, None], sphere.size, axis=1) + 0j,
                       kappa, True, ctx.get("scheme", "spectral"))


def _perturbed(params, ctx):
    n = int(ctx["n"])
    if n not in (2, 3):
        raise ValueError("perturbed-radial trials need n in {2, 3}")
    sigma, mu, eps = float(params["sigma"]), float(params.get("mu", 0.0)), float(params["eps"])
    half = max(12.0, (abs(mu) + 7.5 * sigma) / 0.8)
    grid = LogRadialGrid(-half, half, int(ctx.get("count", 2048)))
    sphere = make_spherical_quadrature(n, int(ctx.get("order", 4)))
    prof = np.exp(-((grid.s - mu) ** 2) / (2 * sigma ** 2))
    data = prof[:, None] * (1 + eps * sphere.nodes[None, :, -1])
    return ScalarField(grid, sphere, data + 0j, None, False, ctx.get("scheme", "spectral"))


def _bump_mixture(params, ctx):
    n = int(ctx["n"])
    rng = np.random.default_rng([int(params["seed"]), int(params["index"]), 7])
    k = int(rng.integers(1, 4))
    width = rng.uniform(0.8, 2.0, k)
    center = rng.uniform(-1, 1, k) * (BUMP_SUPPORT - width)
    amp = rng.normal(size=k) + 1j * rng.normal(size=k)
    grid = LogRadialGrid(-12, 12, int(ctx.get("count", 2048)))
    prof = (amp * _bump((grid.s[:, None] - center) / width)).sum(axis=1)
    if n in (2, 3):
        sphere = make_spherical_quadrature(n, int(ctx.get("order", 4)))
        eps = rng.uniform(0, 0.5)
        data = prof[:, None] * (1 + eps * sphere.nodes[None, :, -1])
        radial = False
    else:
        sphere = _radial_sphere(n)
        data = np.repeat(prof[:, None], sphere.size, axis=1)
        radial = True
    return ScalarField(grid, sphere, data, None, radial, ctx.get("scheme", "spectral"))


FAMILY_BUILDERS: dict[str, Callable] = {
    "log_gaussian": _log_gaussian,
    "log_gaussian_mixture": _mixture,
    "annulus_bump": _annulus_bump,
    "sobolev_bubble": _bubble,
    "perturbed_radial": _perturbed,
    "bump_mixture": _bump_mixture,
}


def build_trial(descriptor: dict) -> ScalarField:
    fam = descriptor["family"]
    if fam not in FAMILY_BUILDERS:
        raise KeyError(f"unknown trial family {fam!r}")
    return FAMILY_BUILDERS[fam](descriptor.get("params", {}), descriptor.get("context", {}))


@dataclass(frozen=True)
class Trial:
    descriptor: dict

    def build(self) -> ScalarField:
        return build_trial(self.descriptor)


def random_trials(family: str, number: int, seed: int, **context) -> list[Trial]:
    """``number`` seeded members of a random family (log_gaussian_mixture or
    bump_mixture)."""
    if family not in ("log_gaussian_mixture", "bump_mixture"):
        raise ValueError(f"{family!r} is not a random family")
    return [Trial({"family": family, "params": {"seed": int(seed), "index": i},
                   "context": dict(context)}) for i in range(number)]


def random_profiles(grid: LogRadialGrid, count: int, seed: int) -> list[RadialProfile]:
    """Smooth complex profiles (sums of Gaussians well inside the grid)."""
    rng = np.random.default_rng(seed)
    half = 0.5 * (grid.s_max - grid.s_min)
    mid = 0.5 * (grid.s_max + grid.s_min)
    out = []
    for _ in range(count):
        k = int(rng.integers(1, 5))
        mu = mid + rng.uniform(-0.3, 0.3, k) * half
        sigma = rng.uniform(0.3, 1.0, k)
        amp = rng.normal(size=k) + 1j * rng.normal(size=k)
        vals = (amp * np.exp(-((grid.s[:, None] - mu) ** 2) / (2 * sigma ** 2))).sum(axis=1)
        out.append(RadialProfile(grid, vals))
    return out


# ---------------------------------------------------------------------------
# parametrized families for search


@dataclass(frozen=True)
class TrialFamily:
    """A box of parameters and a generator into ScalarFields.

    ``log_scale`` marks coordinates searched in log space.  ``fixed`` holds
    extra descriptor parameters that are not searched.
    """

    id: str
    builder: str
    names: tuple
    lower: tuple
    upper: tuple
    context: dict = field(default_factory=dict)
    log_scale: tuple = ()
    fixed: dict = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if not (len(self.names) == len(self.lower) == len(self.upper)):
            raise ValueError("names and bounds differ in length")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("empty parameter box")

    @property
    def dimension(self) -> int:
        return len(self.names)

    @property
    def single_point(self) -> bool:
        return all(lo == hi for lo, hi in zip(self.lower, self.upper))

    def project(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def descriptor(self, x) -> dict:
        x = self.project(x)
        params = dict(self.fixed)
        params.update({k: float(v) for k, v in zip(self.names, x)})
        return {"family": self.builder, "params": params, "context": dict(self.context)}

    def generate(self, x) -> ScalarField:
        return build_trial(self.descriptor(x))

    # normalized coordinates u in [0, 1]^d, log-spaced where requested
    def to_unit(self, x) -> np.ndarray:
        u = []
        for name, v, lo, hi in zip(self.names, x, self.lower, self.upper):
            if hi == lo:
                u.append(0.5)
            elif name in self.log_scale:
                u.append((math.log(v) - math.log(lo)) / (math.log(hi) - math.log(lo)))
            else:
                u.append((v - lo) / (hi - lo))
        return np.asarray(u)

    def from_unit(self, u) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=float), 0, 1)
        x = []
        for name, v, lo, hi in zip(self.names, u, self.lower, self.upper):
            if name in self.log_scale and hi > lo:
                x.append(math.exp(math.log(lo) + v * (math.log(hi) - math.log(lo))))
            else:
                x.append(lo + v * (hi - lo))
        return self.project(x)


def log_gaussian_family(n: int, p: float = 2.0, sigma=(0.5, 50.0), mu=(-2.0, 2.0), **ctx) -> TrialFamily:
    return TrialFamily("log_gaussian", "log_gaussian", ("sigma", "mu"),
                       (sigma[0], mu[0]), (sigma[1], mu[1]), dict(ctx, n=n, p=p), ("sigma",),
                       description="r^{-n/p} exp(-(ln r - mu)^2 / 2 sigma^2)")


def annulus_bump_family(n: int, half: float, width=None, center=None, **ctx) -> TrialFamily:
    """Bumps inside [-half, half]; the defaults search center and width."""
    width = width or (0.05 * half, half)
    center = center or (-half, half)
    return TrialFamily("annulus_bump", "annulus_bump", ("center", "width"),
                       (center[0], width[0]), (center[1], width[1]), dict(ctx, n=n, half=half),
                       description="exp(-1/(1 - ((ln r - c)/w)^2)), width clipped to the window")


def sobolev_bubble_family(n: int, lam=(0.1, 10.0), **ctx) -> TrialFamily:
    return TrialFamily("sobolev_bubble", "sobolev_bubble", ("lam",), (lam[0],), (lam[1],),
                       dict(ctx, n=n), ("lam",), description="(1 + lam^2 r^2)^{-(n-2)/2}")


def perturbed_radial_family(n: int, sigma=(0.5, 5.0), eps=(0.0, 0.9), **ctx) -> TrialFamily:
    return TrialFamily("perturbed_radial", "perturbed_radial", ("sigma", "eps"),
                       (sigma[0], eps[0]), (sigma[1], eps[1]), dict(ctx, n=n), ("sigma",),
                       fixed={"mu": 0.0}, description="log-Gaussian times (1 + eps cos theta)")
