"""Registry of the inequalities and identities, and a certifier that
evaluates both sides on a sampled field.

Every entry splits its bounding side as ``constant * rhs_free``.  For entries
whose constant is not given explicitly the certifier reports the ratio
lhs / rhs_free, an empirical lower bound for the best constant, and never a
violation.

Margins are sign-normalized: ``margin >= 0`` means the inequality holds.
For "<=" entries margin = rhs - lhs, for ">=" entries margin = lhs - rhs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .core_fields import (
    FieldError,
    RadialProfile,
    ScalarField,
    angular_gradient_sq,
    apply_L,
    s_derivative,
    sphere_area,
)
from .norms import (
    besov_norm,
    l2star_radial,
    lq_norm_line,
    rn_integral,
    weak_lq,
)
from .semigroup import SemigroupQuery, evolve, smoothed_derivative

__all__ = [
    "NullFunctionError",
    "ParameterDomainError",
    "SupportError",
    "Tolerances",
    "InequalityDefinition",
    "CertificateRecord",
    "stubbe_constant",
    "registry",
    "get",
    "default_params",
    "evaluate_sides",
    "certify",
    "certify_suite",
    "records_to_json",
    "records_to_csv",
    "change_of_variables_defect",
]

log = logging.getLogger(__name__)

VERDICTS = ("holds", "violated", "identity-ok", "identity-fail", "reported", "anomaly")


class NullFunctionError(FieldError):
    pass


class ParameterDomainError(ValueError):
    pass


class SupportError(FieldError):
    pass


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-10
    inequality: float = 1e-9
    support: float = 1e-13


# ---------------------------------------------------------------------------
# shared pieces of one field


class _Pieces:
    """Lazily computed quantities of a field, shared across entries."""

    def __init__(self, f: ScalarField):
        self.f = f
        self.n = f.dimension
        self.k = f.kappa

    @cached_property
    def Lf(self):
        return apply_L(self.f).data

    @cached_property
    def ang(self):
        return angular_gradient_sq(self.f)

    @cached_property
    def grad_mag(self):
        # weighted r|grad f|
        return np.sqrt(np.abs(self.Lf) ** 2 + self.ang)

    @cached_property
    def g_shift(self):
        return self.n / 2 - self.k

    @cached_property
    def g(self):
        vals = np.exp(self.g_shift * self.f.grid.s)[:, None] * self.f.data
        if not np.all(np.isfinite(vals)):
            raise FieldError("Phi f overflows on this grid")
        return vals

    @cached_property
    def dg(self):
        # d/ds of Phi f, weighted by exp(-g_shift s)
        return self.Lf + (self.n / 2) * self.f.data

    @cached_property
    def G(self):
        return RadialProfile(self.f.grid, self.f.sphere.integrate(self.g) / self.f.sphere.area,
                             self.f.scheme)

    @cached_property
    def F_weighted(self):
        # exp(kappa s) * spherical mean of f
        return RadialProfile(self.f.grid, self.f.sphere.integrate(self.f.data) / self.f.sphere.area)

    def rn(self, data, p, extra=0.0):
        """int |f-like quantity|^p |x|^extra dx for weighted data."""
        return rn_integral(data, p, self.n - p * self.k + extra, self.f)

    def cyl(self, data, p):
        """||Phi(.)||_{L^p(R x S)}^p for weighted data."""
        return rn_integral(data, p, p * self.g_shift, self.f)

    @cached_property
    def f2(self):
        return self.rn(self.f.data, 2)

    @cached_property
    def hardy2(self):
        return self.rn(self.f.data, 2, -2)

    @cached_property
    def grad2(self):
        return self.rn(self.grad_mag, 2, -2)

    @cached_property
    def L2(self):
        return self.rn(self.Lf, 2)

    @cached_property
    def A2(self):
        # ||A f||^2 = ||d/ds Phi f||^2 = ||L f||^2 - n^2/4 ||f||^2
        return self.cyl(self.dg, 2)

    def l2star_sq(self, pre):
        return l2star_radial(self.F_weighted, self.n, pre, kappa=self.k) ** 2


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class InequalityDefinition:
    id: str
    statement: str
    kind: str  # "inequality" or "identity"
    direction: str  # "<=" or ">="
    parameters: tuple
    anchor: str
    constant_text: str
    constant: Callable | None = field(default=None, repr=False)
    sides: Callable | None = field(default=None, repr=False)
    domain: Callable | None = field(default=None, repr=False)
    min_dimension: int = 1
    anomaly_only: bool = False
    support: str | None = None  # "annulus" or "compact"
    note: str = ""

    @property
    def explicit(self) -> bool:
        return self.kind == "inequality" and self.constant is not None

    def constant_value(self, n, params) -> float | None:
        return None if self.constant is None else float(self.constant(n, params))

    def check_domain(self, n, params):
        if n < self.min_dimension:
            raise ParameterDomainError(f"{self.id} needs n >= {self.min_dimension}, got {n}")
        missing = [k for k in self.parameters if k not in params]
        if missing:
            raise ParameterDomainError(f"{self.id} is missing parameters {missing}")
        for k in self.parameters:
            v = params[k]
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ParameterDomainError(f"{self.id}: parameter {k} must be a finite number")
        if self.domain is not None:
            msg = self.domain(n, params)
            if msg:
                raise ParameterDomainError(f"{self.id}: {msg}")


def _conj(p):
    return math.inf if p == 1 else p / (p - 1)


def stubbe_constant(n: int) -> float:
    """K(n) = [pi n (n-2)]^{-1} (Gamma(n)/Gamma(n/2))^{2/n} [(n-2)^2/4]^{(n-1)/n}."""
    if n < 3:
        raise ValueError("K(n) needs n >= 3")
    return (1 / (math.pi * n * (n - 2)) * math.exp(2 / n * (math.lgamma(n) - math.lgamma(n / 2)))
            * ((n - 2) ** 2 / 4) ** ((n - 1) / n))


def _theta_alpha(params):
    th = params["p"] / params["q"]
    return th, th / (th - 1)


# each side function returns (lhs, rhs_free, scale) with scale used only by identities

def _hardy_classical(P, prm):
    p = prm["p"]
    return P.rn(P.grad_mag, p, -p), P.rn(P.f.data, p, -p), None


def _hardy_dilation(P, prm):
    p = prm["p"]
    return P.rn(P.Lf, p), P.rn(P.f.data, p), None


def _hardy_chain(P, prm):
    p = prm["p"]
    mag = np.sqrt(np.abs(P.f.data + P.Lf) ** 2 + P.ang)
    return P.rn(mag, p) ** (1 / p), P.rn(P.f.data, p) ** (1 / p), None


def _ibp(P, prm):
    w = np.exp((P.n - 2 * P.k) * P.f.grid.s)[:, None]
    val = np.sum((np.conj(P.f.data) * P.Lf * w) @ P.f.sphere.weights) * P.f.grid.spacing
    lhs = 2 * float(np.real(val))
    return lhs, -P.n * P.f2, P.f2


def _grad_identity(P, prm):
    mag = np.sqrt(np.abs(P.f.data + P.Lf) ** 2 + P.ang)
    lhs = P.rn(mag, 2)
    r_grad = P.rn(P.grad_mag, 2)
    rhs = r_grad - (P.n - 1) * P.f2
    return lhs, rhs, max(abs(lhs), abs(rhs))


def _smoothing_linf(P, prm):
    p, t = prm["p"], prm["t"]
    out = evolve(P.G, SemigroupQuery(t, "fast-convolution"))
    return float(np.abs(out.values).max()), t ** (-1 / (2 * p)) * lq_norm_line(P.G, p), None


def _smoothing_deriv(P, prm):
    p, t = prm["p"], prm["t"]
    d = smoothed_derivative(P.G, t)
    return lq_norm_line(d, p), lq_norm_line(P.G, p), None


def _pseudo_poincare(P, prm):
    p, t = prm["p"], prm["t"]
    from .core_fields import LogField

    g = LogField(P.f.grid, P.f.sphere, P.g, P.f.radial, P.f.scheme)
    diff = evolve(g, SemigroupQuery(t, "fast-convolution")).values - P.g
    lhs = float(np.sum((np.abs(diff) ** p) @ P.f.sphere.weights) * P.f.grid.spacing) ** (1 / p)
    return lhs, math.sqrt(t) * P.cyl(P.dg, p) ** (1 / p), None


def _besov_rhs(P, prm):
    th, alpha = _theta_alpha(prm)
    grad = P.cyl(P.dg, prm["p"]) ** (1 / prm["p"])
    return grad ** th * besov_norm(P.G, alpha) ** (1 - th)


def _main_weak(P, prm):
    return weak_lq(P.G, prm["q"]), _besov_rhs(P, prm), None


def _main_strong(P, prm):
    return lq_norm_line(P.G, prm["q"]), _besov_rhs(P, prm), None


def _pstar(n, p):
    return n * p / (n - p)


def _sobolev_mean(P, prm):
    p, n = prm["p"], P.n
    grad = P.cyl(P.dg, p) ** (1 / p)
    gp = P.cyl(P.f.data, p) ** (1 / p)
    return lq_norm_line(P.G, _pstar(n, p)), grad ** (1 / n) * gp ** ((n - 1) / n), None


def _sobolev_mean_q(P, prm):
    p = prm["p"]
    grad = P.cyl(P.dg, p) ** (1 / p)
    gp = P.cyl(P.f.data, p) ** (1 / p)
    return lq_norm_line(P.G, p * (p + 1)), grad ** (1 / (p + 1)) * gp ** (p / (p + 1)), None


def _sobolev_compact(P, prm):
    p, n, lam = prm["p"], P.n, prm["Lam"]
    grad = P.cyl(P.dg, p) ** (1 / p)
    return lq_norm_line(P.G, _pstar(n, p)), lam ** ((n - 1) / n) * grad, None


def _gagliardo_nirenberg(P, prm):
    p, q = prm["p"], prm["q"]
    m = q / p - 1
    grad = P.cyl(P.dg, p) ** (1 / p)
    gm = P.cyl(P.f.data, m) ** (1 / m)
    return lq_norm_line(P.G, q), grad ** (p / q) * gm ** (1 - p / q), None


def _main_p2(P, prm):
    n = P.n
    return P.l2star_sq("r"), P.A2 ** (1 / n) * P.f2 ** (1 - 1 / n), None


def _hs_bracket(P, c):
    return P.grad2 - c * P.hardy2


def _hardy_sobolev(P, prm):
    n = P.n
    e = _hs_bracket(P, ((n - 2) / 2) ** 2)
    return P.l2star_sq(1), max(e, 0.0) ** (1 / n) * P.hardy2 ** (1 - 1 / n), None


def _hardy_sobolev_eps(P, prm):
    n, eps = P.n, prm["eps"]
    return eps ** (1 - 1 / n) * P.l2star_sq(1), _hs_bracket(P, ((n - 2) / 2) ** 2 - eps), None


def _stubbe_factor(n, delta):
    return ((n - 2) ** 2 / 4 - delta) ** (-(n - 1) / n)


def _stubbe_pre(P, prm):
    n, d = P.n, prm["delta"]
    return P.l2star_sq(1), _stubbe_factor(n, d) * _hs_bracket(P, d), None


def _stubbe(P, prm):
    n, d = P.n, prm["delta"]
    q = 2 * n / (n - 2)
    lhs = P.rn(P.f.data, q) ** (2 / q)
    return lhs, _stubbe_factor(n, d) * _hs_bracket(P, d), None


def _annulus_L(P, prm):
    n, R = P.n, prm["R"]
    return P.l2star_sq("r"), math.log(R) ** (2 * (n - 1) / n) * P.A2, None


def _annulus_grad(P, prm):
    n, R = P.n, prm["R"]
    return P.l2star_sq(1), math.log(R) ** (2 * (n - 1) / n) * _hs_bracket(P, (n - 2) ** 2 / 4), None


def _weighted_gn(P, prm):
    n, q = P.n, prm["q"]
    m = q / 2 - 1
    # int_0^inf |F(r)|^q r^{nq/2 - 1} dr, i.e. ||G||_q^q
    lhs = lq_norm_line(P.G, q) ** q
    rhs = P.A2 * P.rn(P.f.data, m, n * m / 2 - n) ** 2
    return lhs, rhs, None


def _mod_hardy(P, prm):
    mag = np.sqrt(np.abs(P.f.data + P.Lf) ** 2 + P.ang)
    return P.rn(mag, 2), P.L2 - (P.n - 1) * P.f2, None


def _dom_p_le_n(n, prm):
    if not 1 <= prm["p"] <= n:
        return f"need 1 <= p <= n, got p = {prm['p']}, n = {n}"


def _dom_p(n, prm):
    if not prm["p"] >= 1:
        return f"need p >= 1, got {prm['p']}"


def _dom_pt(n, prm):
    if not prm["p"] >= 1:
        return f"need p >= 1, got {prm['p']}"
    if not 1e-4 <= prm["t"] <= 1e4:
        return f"need t in [1e-4, 1e4], got {prm['t']}"


def _dom_besov(n, prm):
    p, q = prm["p"], prm["q"]
    if not 1 <= p < q:
        return f"need 1 <= p < q, got p = {p}, q = {q}"
    if not q > 2 * p:
        return "the B^{theta/(theta-1)} norm is infinite unless q > 2p"


def _dom_sob(n, prm):
    if not 1 <= prm["p"] < n:
        return f"need 1 <= p < n, got p = {prm['p']}, n = {n}"


def _dom_sob_compact(n, prm):
    return _dom_sob(n, prm) or (None if prm["Lam"] > 0 else "need Lambda > 0")


def _dom_gn(n, prm):
    p, q = prm["p"], prm["q"]
    if not 1 <= p < q:
        return f"need 1 <= p < q, got p = {p}, q = {q}"
    if q / p - 1 < 1:
        return "need m = q/p - 1 >= 1 for ||g||_m to be a norm"


def _dom_eps(n, prm):
    if not prm["eps"] > 0:
        return "need eps > 0"


def _dom_delta(n, prm):
    d = prm["delta"]
    if not 0 <= d < (n - 2) ** 2 / 4:
        return f"need 0 <= delta < (n-2)^2/4 = {(n - 2) ** 2 / 4}, got {d}"


def _dom_R(n, prm):
    if not prm["R"] > 1:
        return "need R > 1"


def _dom_wgn(n, prm):
    if not prm["q"] >= 4:
        return "need q >= 4 so that m = q/2 - 1 >= 1"


def _weak_constant(n, prm):
    th, _ = _theta_alpha(prm)
    return 2 ** (th + 1) * math.pi ** (-th / 2) / sphere_area(n)


def _weak_constant_derived(n, prm):
    th, _ = _theta_alpha(prm)
    return 2 ** (th + 1) * math.pi ** (-th / 2) * sphere_area(n) ** (-1 / prm["q"])


def _linf_constant(n, prm):
    p = prm["p"]
    pc = _conj(p)
    tail = 1.0 if math.isinf(pc) else pc ** (-1 / (2 * pc))
    return (4 * math.pi) ** (-1 / (2 * p)) * tail


_ENTRIES = [
    InequalityDefinition(
        "hardy_classical", "int |grad f|^p >= ((n-p)/p)^p int |f|^p/|x|^p, 1 <= p <= n",
        "inequality", ">=", ("p",), "classical Hardy inequality with its best constant",
        "((n-p)/p)^p", lambda n, q: ((n - q["p"]) / q["p"]) ** q["p"], _hardy_classical, _dom_p_le_n),
    InequalityDefinition(
        "hardy_dilation", "int |(x.grad) f|^p >= (n/p)^p int |f|^p",
        "inequality", ">=", ("p",), "Hardy bound for the dilation generator, sharp constant (n/p)^p",
        "(n/p)^p", lambda n, q: (n / q["p"]) ** q["p"], _hardy_dilation, _dom_p),
    InequalityDefinition(
        "hardy_chain", "||grad(|x| f)||_p >= ((n-p)/p) ||f||_p",
        "inequality", ">=", ("p",), "classical Hardy bound derived from the dilation bound applied to f/|x|",
        "(n-p)/p", lambda n, q: (n - q["p"]) / q["p"], _hardy_chain, _dom_p_le_n),
    InequalityDefinition(
        "ibp_identity", "2 Re int conj(f) (x.grad) f = -n int |f|^2",
        "identity", "==", (), "integration by parts in the radial variable", "1", lambda n, q: 1.0, _ibp),
    InequalityDefinition(
        "grad_identity", "int |grad(|x| f)|^2 = int (|x| |grad f|)^2 - (n-1) int |f|^2",
        "identity", "==", (), "gradient of |x| f in polar form", "1",
        lambda n, q: 1.0, _grad_identity),
    InequalityDefinition(
        "smoothing_linf", "||P_t G||_inf <= (4 pi)^{-1/2p} (p')^{-1/2p'} t^{-1/2p} ||G||_p",
        "inequality", "<=", ("p", "t"), "L^p to L^inf smoothing of the log-radial heat semigroup",
        "(4 pi)^{-1/2p} (p')^{-1/2p'}", _linf_constant, _smoothing_linf, _dom_pt),
    InequalityDefinition(
        "smoothing_deriv", "||d/dr P_t G||_p <= (pi t)^{-1/2} ||G||_p",
        "inequality", "<=", ("p", "t"), "derivative smoothing via Young's inequality for convolutions",
        "(pi t)^{-1/2}", lambda n, q: (math.pi * q["t"]) ** -0.5, _smoothing_deriv, _dom_pt),
    InequalityDefinition(
        "pseudo_poincare", "||P_t g - g||_p <= 2 pi^{-1/2} t^{1/2} ||A g||_p",
        "inequality", "<=", ("p", "t"), "pseudo-Poincare inequality for the log-radial semigroup",
        "2 pi^{-1/2}", lambda n, q: 2 / math.sqrt(math.pi), _pseudo_poincare, _dom_pt),
    InequalityDefinition(
        "main_weak",
        "||G||_{q,inf} <= 2^{theta+1} pi^{-theta/2} |S^{n-1}|^{-1} ||d_r g||_p^theta ||g||_B^{1-theta}",
        "inequality", "<=", ("p", "q"), "weak-type intermediate bound with an explicit constant",
        "2^{theta+1} pi^{-theta/2} |S^{n-1}|^{-1}", _weak_constant, _main_weak, _dom_besov,
        anomaly_only=True,
        note="violations are flagged as anomalies; the derivable constant "
             "2^{theta+1} pi^{-theta/2} |S^{n-1}|^{-1/q} is reported alongside"),
    InequalityDefinition(
        "main_strong", "||G||_q <= C ||d_r g||_p^theta ||g||_B^{1-theta}",
        "inequality", "<=", ("p", "q"), "strong-type Sobolev bound against a Besov norm of negative order",
        "unspecified C", None, _main_strong, _dom_besov),
    InequalityDefinition(
        "sobolev_mean", "||G||_{p*} <= C ||d_r g||_p^{1/n} ||g||_p^{(n-1)/n}",
        "inequality", "<=", ("p",), "Sobolev inequality for spherical means",
        "unspecified C", None, _sobolev_mean, _dom_sob, min_dimension=2),
    InequalityDefinition(
        "sobolev_mean_q", "||G||_{p(p+1)} <= C ||d_r g||_p^{1/(p+1)} ||g||_p^{p/(p+1)}",
        "inequality", "<=", ("p",), "Sobolev bound with theta = p/q, q = p(p+1)",
        "unspecified C", None, _sobolev_mean_q, _dom_p),
    InequalityDefinition(
        "sobolev_compact", "||G||_{p*} <= C Lambda^{(n-1)/n} ||d_r g||_p, supp G in [-Lambda, Lambda]",
        "inequality", "<=", ("p", "Lam"), "Sobolev bound for means supported in a bounded s-interval",
        "unspecified C", None, _sobolev_compact, _dom_sob_compact, min_dimension=2, support="compact"),
    InequalityDefinition(
        "gagliardo_nirenberg", "||G||_q <= C ||d_r g||_p^{p/q} ||g||_m^{1-p/q}, m = q/p - 1",
        "inequality", "<=", ("p", "q"), "Gagliardo-Nirenberg bound on the line, m = q/p - 1",
        "unspecified C", None, _gagliardo_nirenberg, _dom_gn),
    InequalityDefinition(
        "main_p2", "||r F||^2_{L^{2*}(dmu)} <= C {||Lf||^2 - n^2/4 ||f||^2}^{1/n} ||f||^{2(1-1/n)}",
        "inequality", "<=", (), "p = 2 Hardy-Sobolev bound with the remainder ||Lf||^2 - n^2/4 ||f||^2",
        "unspecified C", None, _main_p2, min_dimension=3),
    InequalityDefinition(
        "hardy_sobolev",
        "||M(h)||^2_{L^{2*}} <= C {||grad h||^2 - ((n-2)/2)^2 ||h/|x|||^2}^{1/n} {||h/|x|||^2}^{1-1/n}",
        "inequality", "<=", (), "Hardy-Sobolev bound with the Hardy remainder of the gradient",
        "unspecified C", None, _hardy_sobolev, min_dimension=3),
    InequalityDefinition(
        "hardy_sobolev_eps",
        "eps^{1-1/n} ||M(h)||^2_{L^{2*}} <= C {||grad h||^2 - [((n-2)/2)^2 - eps] ||h/|x|||^2}",
        "inequality", "<=", ("eps",), "epsilon form of the Hardy-Sobolev bound",
        "unspecified C", None, _hardy_sobolev_eps, _dom_eps, min_dimension=3),
    InequalityDefinition(
        "stubbe_pre",
        "||F||^2_{L^{2*}} <= C [(n-2)^2/4 - delta]^{-(n-1)/n} {||grad f||^2 - delta ||f/|x|||^2}",
        "inequality", "<=", ("delta",), "Hardy remainder bound with an unspecified constant",
        "unspecified C", None, _stubbe_pre, _dom_delta, min_dimension=3),
    InequalityDefinition(
        "stubbe",
        "||f||^2_{L^{2*}(R^n)} <= K(n) [(n-2)^2/4 - delta]^{-(n-1)/n} {||grad f||^2 - delta ||f/|x|||^2}",
        "inequality", "<=", ("delta",), "Sobolev inequality with Hardy remainder and optimal constant K(n)",
        "K(n)", lambda n, q: stubbe_constant(n), _stubbe, _dom_delta, min_dimension=3),
    InequalityDefinition(
        "annulus_L",
        "||r F||^2_{L^{2*}} <= C (ln R)^{2(n-1)/n} {||Lf||^2 - n^2/4 ||f||^2}, supp f in A(1/R, R)",
        "inequality", "<=", ("R",), "bound for functions supported in the annulus A(1/R, R)",
        "unspecified C", None, _annulus_L, _dom_R, min_dimension=3, support="annulus"),
    InequalityDefinition(
        "annulus_grad",
        "||M(h)||^2_{L^{2*}} <= C (ln R)^{2(n-1)/n} {||grad h||^2 - (n-2)^2/4 ||h/|x|||^2}",
        "inequality", "<=", ("R",), "gradient form of the annulus bound",
        "unspecified C", None, _annulus_grad, _dom_R, min_dimension=3, support="annulus"),
    InequalityDefinition(
        "weighted_gn",
        "int |F(r)|^q r^{nq/2-1} dr <= C {||Lf||^2 - n^2/4 ||f||^2} "
        "{int int |f|^m r^{nm/2-1} dr domega}^2, m = q/2 - 1",
        "inequality", "<=", ("q",), "weighted p = 2 Gagliardo-Nirenberg bound",
        "unspecified C", None, _weighted_gn, _dom_wgn,
        note="certified in spherical-mean form with dilation-consistent weights"),
    InequalityDefinition(
        "mod_hardy_L_bound", "int |grad(|x| f)|^2 >= int |Lf|^2 - (n-1) int |f|^2",
        "inequality", ">=", (), "lower bound for the gradient of |x| f",
        "1", lambda n, q: 1.0, _mod_hardy),
]

_BY_ID = {e.id: e for e in _ENTRIES}


def registry() -> list[InequalityDefinition]:
    return list(_ENTRIES)


def get(id: str) -> InequalityDefinition:
    try:
        return _BY_ID[id]
    except KeyError:
        raise KeyError(f"unknown inequality id {id!r}") from None


def default_params(id: str, n: int) -> dict:
    """A representative in-domain parameter set for dimension n."""
    e = get(id)
    base = {"p": 2.0, "q": 5.0, "t": 0.5, "delta": 0.1 * (n - 2) ** 2 / 4 if n > 2 else 0.0,
            "eps": 0.1, "R": math.exp(4), "Lam": 4.0}
    if id in ("hardy_classical", "hardy_chain", "sobolev_mean", "sobolev_compact"):
        base["p"] = min(2.0, n - 1.0) if n > 1 else 1.0
    if id in ("main_weak", "main_strong"):
        base["p"], base["q"] = 1.0, 3.0
    if id == "gagliardo_nirenberg":
        base["p"], base["q"] = 2.0, 4.0
    if id == "weighted_gn":
        base["q"] = 4.0
    return {k: base[k] for k in e.parameters}


# ---------------------------------------------------------------------------
# certification


@dataclass
class CertificateRecord:
    id: str
    params: dict
    trial: dict
    lhs: float
    rhs: float
    ratio: float | None
    margin: float
    verdict: str
    tolerance: float

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def failed(self) -> bool:
        return self.verdict in ("violated", "identity-fail")


def _check_support(e, P, prm, tol):
    if e.support is None:
        return
    half = math.log(prm["R"]) if e.support == "annulus" else prm["Lam"]
    data = np.abs(P.f.data) if e.support == "annulus" else np.abs(P.G.values)[:, None]
    peak = data.max()
    outside = np.abs(P.f.grid.s) > half
    if peak > 0 and data[outside].max(initial=0.0) > tol * peak:
        raise SupportError(f"{e.id}: samples outside [-{half:.4g}, {half:.4g}] exceed "
                           f"{tol:.0e} of the peak")


def evaluate_sides(id: str, f: ScalarField, params: dict | None = None, *, _pieces=None):
    """Return (lhs, rhs_free, identity_scale, params) after domain checks."""
    e = get(id)
    prm = dict(default_params(id, f.dimension))
    if params:
        prm.update({k: v for k, v in params.items() if k in e.parameters})
    e.check_domain(f.dimension, prm)
    if not np.any(f.data):
        raise NullFunctionError(f"{id}: the trial field is identically zero")
    P = _pieces or _Pieces(f)
    _check_support(e, P, prm, Tolerances.support)
    lhs, rhs_free, scale = e.sides(P, prm)
    return float(lhs), float(rhs_free), scale, prm


def _ratio(lhs, rhs):
    if rhs == 0:
        return None if lhs == 0 else math.inf
    return lhs / rhs


def certify(id: str, f: ScalarField, params: dict | None = None, *, trial: dict | None = None,
            tolerances: Tolerances | None = None, _pieces=None) -> CertificateRecord:
    """Evaluate one inequality or identity on one field."""
    tol = tolerances or Tolerances()
    e = get(id)
    lhs, rhs_free, scale, prm = evaluate_sides(id, f, params, _pieces=_pieces)
    trial = dict(trial or {})
    if e.kind == "identity":
        margin = abs(lhs - rhs_free)
        ok = margin <= tol.identity * scale
        return CertificateRecord(id, prm, trial, lhs, rhs_free, _ratio(lhs, rhs_free), margin,
                                 "identity-ok" if ok else "identity-fail", tol.identity)
    C = e.constant_value(f.dimension, prm)
    rhs = rhs_free if C is None else C * rhs_free
    margin = rhs - lhs if e.direction == "<=" else lhs - rhs
    ratio = _ratio(lhs, rhs)
    if C is None:
        return CertificateRecord(id, prm, trial, lhs, rhs, ratio, margin, "reported", 0.0)
    holds = margin >= -tol.inequality * max(abs(lhs), abs(rhs))
    verdict = "holds" if holds else ("anomaly" if e.anomaly_only else "violated")
    if id == "main_weak":
        alt = _weak_constant_derived(f.dimension, prm) * rhs_free
        prm = dict(prm, derived_constant=alt / rhs_free if rhs_free else None,
                   derived_margin=alt - lhs)
    return CertificateRecord(id, prm, trial, lhs, rhs, ratio, margin, verdict, tol.inequality)


def certify_suite(ids, trials, params_grid: dict | None = None, *,
                  tolerances: Tolerances | None = None) -> list[CertificateRecord]:
    """Certify every id on every trial.

    ``trials`` holds objects with ``descriptor`` (a JSON-ready dict) and
    ``build()`` returning a ScalarField, or plain ScalarFields.
    ``params_grid`` maps an id to a list of parameter dicts (ids not in it
    get one representative set; an empty list skips the id).  Domain mismatches and trial errors are
    logged and skipped; records are ordered by (id, trial, params).
    """
    ids = list(ids)
    for i in ids:
        get(i)
    built = []
    for k, t in enumerate(trials):
        if isinstance(t, ScalarField):
            built.append(({"index": k}, t))
        else:
            built.append((dict(t.descriptor, index=k), t.build()))
    pieces = [_Pieces(f) for _, f in built]
    records = []
    for i in ids:
        for (desc, f), P in zip(built, pieces):
            if params_grid and i in params_grid:
                grid = params_grid[i]
            else:
                grid = [default_params(i, f.dimension)]
            for prm in grid:
                try:
                    records.append(certify(i, f, prm, trial=desc, tolerances=tolerances, _pieces=P))
                except (ParameterDomainError, FieldError) as exc:
                    log.info("skipped %s on trial %s: %s", i, desc.get("index"), exc)
    return records


def change_of_variables_defect(f: ScalarField) -> float:
    """Relative gap between ||G||_{L^{2*}(R)}, G the spherical mean of Phi f,
    and ||r F||_{L^{2*}(dmu)}, F the spherical mean of f (n >= 3)."""
    n = f.dimension
    P = _Pieces(f)
    a = lq_norm_line(P.G, 2 * n / (n - 2))
    b = l2star_radial(P.F_weighted, n, "r", kappa=P.k)
    return abs(a - b) / max(abs(a), abs(b)) if a or b else 0.0


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def records_to_json(records, **kw) -> str:
    return json.dumps([_clean(r.to_dict()) for r in records], **kw)


def records_to_csv(records, path) -> None:
    import csv

    cols = ["id", "params", "trial", "lhs", "rhs", "ratio", "margin", "verdict", "tolerance"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            d = _clean(r.to_dict())
            w.writerow([json.dumps(d[c], sort_keys=True) if isinstance(d[c], dict) else d[c]
                        for c in cols])
