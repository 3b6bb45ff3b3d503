"""Derivative-free ratio optimization over trial families.

Ratios are the certificate ratios: lhs / (C * rhs_free) for explicit
constants, so 1 is sharp, and lhs / rhs_free for unspecified constants.  The
search runs Nelder-Mead in normalized coordinates with box projection and
three seeded restarts.  Any certified violation of an explicit constant met
during a search raises :class:`CounterexampleError`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core_fields import FieldError, ScalarField
from .inequalities import (
    NullFunctionError,
    ParameterDomainError,
    Tolerances,
    certify,
    get,
)
from .trials import TrialFamily

__all__ = [
    "SearchError",
    "CounterexampleError",
    "SearchResult",
    "ratio",
    "optimize",
    "estimate_constant",
]

log = logging.getLogger(__name__)

RESTARTS = 3
MIN_BUDGET = 50


class SearchError(RuntimeError):
    pass


class CounterexampleError(RuntimeError):
    """A search met a certified violation of an explicit constant."""

    def __init__(self, record):
        super().__init__(f"{record.id} violated on trial {record.trial}: margin {record.margin:.3e}")
        self.record = record


@dataclass
class SearchResult:
    inequality_id: str
    family_id: str
    direction: str
    best_params: dict
    best_ratio: float
    evaluations: int
    converged: bool
    history: list = field(default_factory=list)
    seed: int = 0
    params: dict = field(default_factory=dict)
    trial: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def ratio(id: str, f: ScalarField, params: dict | None = None) -> float:
    """Constant-stripped lhs / rhs; ``inf`` when rhs = 0 < lhs."""
    rec = certify(id, f, params)
    if rec.ratio is None:
        raise NullFunctionError(f"{id}: both sides vanish")
    return rec.ratio


def optimize(id: str, family: TrialFamily, direction: str = "minimize", budget: int = 200,
             params: dict | None = None, seed: int = 0,
             tolerances: Tolerances | None = None) -> SearchResult:
    """Search the family box for the extreme ratio of entry ``id``."""
    if direction not in ("minimize", "maximize"):
        raise ValueError("direction must be 'minimize' or 'maximize'")
    entry = get(id)
    if entry.kind == "identity":
        raise ValueError(f"{id} is an identity; there is nothing to optimize")
    if budget < 1 or (budget < MIN_BUDGET and not family.single_point):
        raise ValueError(f"budget must be at least {MIN_BUDGET}")
    sign = 1.0 if direction == "minimize" else -1.0
    cache: dict = {}
    history: list = []
    state = {"best": math.inf, "x": None, "rec": None}

    def evaluate(u):
        x = family.from_unit(u)
        key = tuple(np.round(x, 14))
        if key in cache:
            return cache[key]
        if len(cache) >= budget:
            raise _BudgetSpent
        desc = family.descriptor(x)
        try:
            rec = certify(id, family.generate(x), params, trial=desc, tolerances=tolerances)
        except (ParameterDomainError, FieldError, ValueError) as exc:
            log.info("evaluation failed at %s: %s", desc["params"], exc)
            val = math.inf
            rec = None
        else:
            if rec.verdict == "violated":
                raise CounterexampleError(rec)
            val = math.inf if rec.ratio is None or math.isnan(rec.ratio) else sign * rec.ratio
        cache[key] = val
        if val < state["best"]:
            state.update(best=val, x=x, rec=rec)
        history.append(sign * state["best"] if math.isfinite(state["best"]) else None)
        return val

    rng = np.random.default_rng(seed)
    d = family.dimension
    starts = [np.full(d, 0.5)] + [rng.uniform(0, 1, d) for _ in range(RESTARTS - 1)]
    converged = False
    if family.single_point:
        evaluate(np.full(d, 0.5))
        converged = True
    else:
        for start in starts:
            step = 0.25
            simplex = [start] + [np.clip(start + step * e, 0, 1) if start[i] + step <= 1
                                 else np.clip(start - step * e, 0, 1)
                                 for i, e in enumerate(np.eye(d))]
            try:
                res = minimize(evaluate, start, method="Nelder-Mead",
                               options={"initial_simplex": np.array(simplex), "xatol": 1e-8,
                                        "fatol": 1e-6 * max(1.0, abs(state["best"]))
                                        if math.isfinite(state["best"]) else 1e-6,
                                        "maxfev": budget})
                converged = converged or bool(res.success)
            except _BudgetSpent:
                break
    if state["rec"] is None:
        raise SearchError(f"every evaluation of {id} on family {family.id} failed")
    # re-certify the best point
    best_x = state["x"]
    again = certify(id, family.generate(best_x), params, tolerances=tolerances)
    if abs(again.ratio - state["rec"].ratio) > 1e-12 * abs(state["rec"].ratio):
        raise SearchError("best ratio is not reproduced on re-evaluation")
    return SearchResult(id, family.id, direction,
                        {k: float(v) for k, v in zip(family.names, best_x)},
                        float(state["rec"].ratio), len(cache), converged, history, int(seed),
                        dict(state["rec"].params), family.descriptor(best_x))


class _BudgetSpent(Exception):
    pass


def estimate_constant(id: str, families, budget: int = 200, params: dict | None = None,
                      seed: int = 0) -> tuple[float, list[SearchResult]]:
    """Empirical lower bound sup lhs / rhs_free for an unspecified constant."""
    entry = get(id)
    if entry.kind != "inequality" or entry.constant is not None:
        raise ValueError(f"{id} has an explicit constant; use optimize for sharpness probes")
    families = list(families)
    if not families:
        raise ValueError("no trial families given")
    results = [optimize(id, fam, "maximize", budget, params, seed) for fam in families]
    return max(r.best_ratio for r in results), results
