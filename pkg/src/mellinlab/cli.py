"""Command line front end.

    mellinlab verify   [--config cfg.json] [--seed N] [--out DIR] [--ids a,b]
    mellinlab evolve   [--config cfg.json] [--method M] [--out DIR]
    mellinlab spectrum [--config cfg.json] [--out DIR]
    mellinlab search   [--config cfg.json] [--seed N] [--ids ID] [--out DIR]

Exit codes: 0 success, 1 mathematical violation, 2 usage or config error.
The config is one JSON document; command line flags override its keys.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import itertools
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .core_fields import (
    LogRadialGrid,
    RadialProfile,
    dump_profile_csv,
    grid_to_json,
    sample_log_field,
)
from .inequalities import (
    ParameterDomainError,
    Tolerances,
    certify_suite,
    default_params,
    get,
    records_to_csv,
    registry,
    _clean,
)
from .semigroup import METHODS, SemigroupQuery, evolve

log = logging.getLogger("mellinlab")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "seed": 0,
    "out": "mellinlab-out",
    "ids": None,
    "method": "fast-convolution",
    "grid": {"s_min": -12.0, "s_max": 12.0, "count": 2048},
    "quadrature": {"order": 4},
    "tolerances": {"identity": 1e-10, "inequality": 1e-9},
    "trials": {"family": "bump_mixture", "count": 10, "n": 3},
    "params": {},
    "evolve": {"profile": "gaussian", "times": [0.01, 0.1, 1.0], "operator": "P", "n": 3},
    "spectrum": {"field": "gaussian", "n": 3, "t": 0.5, "band_fraction": 0.5},
    "search": {"family": "log_gaussian", "n": 3, "p": 2.0, "direction": None, "budget": 500,
               "params": {}},
}

PARAM_KEYS = ("p", "q", "t", "delta", "eps", "R", "Lam")
RANDOM_FAMILIES = ("bump_mixture", "log_gaussian_mixture")
SEARCH_FAMILIES = ("log_gaussian", "annulus_bump", "sobolev_bubble", "perturbed_radial")


def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict) and k != "params":
            if not isinstance(v, dict):
                raise ConfigError(f"config key {path + k!r} must be an object")
            out[k] = _merge(base[k], v, path + k + ".")
        else:
            out[k] = v
    return out


def _num(x, name, lo=None, hi=None, integer=False, strict_lo=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{name} must be a finite number, got {x!r}")
    if integer and int(x) != x:
        raise ConfigError(f"{name} must be an integer, got {x!r}")
    if lo is not None and (x <= lo if strict_lo else x < lo):
        raise ConfigError(f"{name} = {x} is below {lo}")
    if hi is not None and x > hi:
        raise ConfigError(f"{name} = {x} is above {hi}")
    return x


_PARAM_RULES = {
    "p": dict(lo=1), "q": dict(lo=1, strict_lo=True), "t": dict(lo=1e-4, hi=1e4),
    "delta": dict(lo=0), "eps": dict(lo=0, strict_lo=True), "R": dict(lo=1, strict_lo=True),
    "Lam": dict(lo=0, strict_lo=True),
}


def validate(cfg: dict) -> dict:
    """Check ids, grids and parameter domains before any computation."""
    _num(cfg["seed"], "seed", lo=0, integer=True)
    if cfg["ids"] is not None:
        ids = cfg["ids"]
        if isinstance(ids, str):
            ids = [i for i in ids.split(",") if i]
        if not isinstance(ids, list) or not ids:
            raise ConfigError("ids must be a non-empty list")
        for i in ids:
            try:
                get(i)
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
        cfg["ids"] = ids
    if cfg["method"] not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    g = cfg["grid"]
    _num(g["count"], "grid.count", lo=16, integer=True)
    if not _num(g["s_min"], "grid.s_min") < _num(g["s_max"], "grid.s_max"):
        raise ConfigError("grid.s_min must be below grid.s_max")
    _num(cfg["quadrature"]["order"], "quadrature.order", lo=1, integer=True)
    for k, v in cfg["tolerances"].items():
        _num(v, f"tolerances.{k}", lo=0)
    tr = cfg["trials"]
    if tr["family"] not in RANDOM_FAMILIES:
        raise ConfigError(f"trials.family must be one of {RANDOM_FAMILIES}")
    _num(tr["count"], "trials.count", lo=0, integer=True)
    _num(tr["n"], "trials.n", lo=1, integer=True)
    prm = cfg["params"]
    if not isinstance(prm, dict):
        raise ConfigError("params must map parameter names to lists of values")
    for k, vals in prm.items():
        if k not in PARAM_KEYS:
            raise ConfigError(f"unknown parameter {k!r}; expected one of {PARAM_KEYS}")
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"params.{k} must be a non-empty list")
        for v in vals:
            _num(v, f"params.{k}", **_PARAM_RULES[k])
    ev = cfg["evolve"]
    if ev["profile"] not in ("gaussian", "constant", "random"):
        raise ConfigError("evolve.profile must be gaussian, constant or random")
    if ev["operator"] not in ("P", "LstarL"):
        raise ConfigError("evolve.operator must be P or LstarL")
    if not isinstance(ev["times"], list) or not ev["times"]:
        raise ConfigError("evolve.times must be a non-empty list")
    for t in ev["times"]:
        _num(t, "evolve.times", lo=1e-4, hi=1e4)
    _num(ev["n"], "evolve.n", lo=1, integer=True)
    sp = cfg["spectrum"]
    if sp["field"] not in ("gaussian", "zero", "perturbed"):
        raise ConfigError("spectrum.field must be gaussian, zero or perturbed")
    _num(sp["n"], "spectrum.n", lo=1, integer=True)
    _num(sp["t"], "spectrum.t", lo=1e-4, hi=1e4)
    _num(sp["band_fraction"], "spectrum.band_fraction", lo=0, hi=1, strict_lo=True)
    se = cfg["search"]
    if se["family"] not in SEARCH_FAMILIES:
        raise ConfigError(f"search.family must be one of {SEARCH_FAMILIES}")
    if se["direction"] not in (None, "minimize", "maximize"):
        raise ConfigError("search.direction must be minimize or maximize")
    _num(se["budget"], "search.budget", lo=1, integer=True)
    _num(se["n"], "search.n", lo=1, integer=True)
    _num(se["p"], "search.p", lo=1)
    for k, v in se["params"].items():
        if k not in PARAM_KEYS:
            raise ConfigError(f"unknown search parameter {k!r}")
        _num(v, f"search.params.{k}", **_PARAM_RULES[k])
    return cfg


def load_config(path: str | None, overrides: dict) -> dict:
    user = {}
    if path:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
    cfg = _merge(DEFAULTS, user)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return validate(cfg)


def config_hash(cfg: dict) -> str:
    """Hash of the effective config; the output location is not part of it."""
    body = {k: v for k, v in cfg.items() if k != "out"}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _meta(cfg, grids):
    return {"version": __version__, "config_hash": config_hash(cfg), "seed": cfg["seed"],
            "grids": grids}


# ---------------------------------------------------------------------------
# commands


def _param_grid(ids, n, prm):
    out = {}
    for i in ids:
        e = get(i)
        base = default_params(i, n)
        keys = [k for k in e.parameters if k in prm]
        if not keys:
            continue
        combos = []
        for vals in itertools.product(*(prm[k] for k in keys)):
            combos.append(dict(base, **dict(zip(keys, map(float, vals)))))
        out[i] = combos
    return out


def cmd_verify(cfg) -> int:
    from .trials import random_trials

    ids = cfg["ids"] or [e.id for e in registry()]
    tr = cfg["trials"]
    n = int(tr["n"])
    trials = random_trials(tr["family"], int(tr["count"]), int(cfg["seed"]), n=n,
                           order=int(cfg["quadrature"]["order"]), count=int(cfg["grid"]["count"]))
    tol = Tolerances(identity=cfg["tolerances"]["identity"],
                     inequality=cfg["tolerances"]["inequality"])
    pgrid = _param_grid(ids, n, cfg["params"])
    if pgrid:
        # drop combinations outside an entry's domain up front, with a log line
        for i, combos in pgrid.items():
            kept = []
            for c in combos:
                try:
                    get(i).check_domain(n, c)
                    kept.append(c)
                except ParameterDomainError as exc:
                    log.info("skipped parameters %s: %s", c, exc)
            pgrid[i] = kept
    records = certify_suite(ids, trials, pgrid, tolerances=tol)
    coverage = {}
    for i in ids:
        counts = {}
        for r in records:
            if r.id == i:
                counts[r.verdict] = counts.get(r.verdict, 0) + 1
        coverage[i] = counts
    grids = sorted({json.dumps(json.loads(grid_to_json(f.grid, f.sphere)), sort_keys=True)
                    for f in (t.build() for t in trials[:1])})
    os.makedirs(cfg["out"], exist_ok=True)
    dicts = [r.to_dict() for r in records]
    _write_json(os.path.join(cfg["out"], "certificates.json"), dicts)
    records_to_csv(records, os.path.join(cfg["out"], "certificates.csv"))
    report = {"meta": _meta(cfg, [json.loads(g) for g in grids]),
              "coverage": coverage, "records": dicts}
    _write_json(os.path.join(cfg["out"], "report.json"), report)
    failed = [r for r in records if r.failed]
    covered = sum(1 for v in coverage.values() if v)
    print(f"verify: {len(records)} records, {covered}/{len(ids)} entries covered, "
          f"{len(failed)} failures")
    for r in failed:
        print(f"  {r.verdict}: {r.id} trial {r.trial.get('index')} margin {r.margin:.3e}")
    return EXIT_VIOLATION if failed else EXIT_OK


def _evolve_profile(cfg):
    g = cfg["grid"]
    grid = LogRadialGrid(float(g["s_min"]), float(g["s_max"]), int(g["count"]))
    kind = cfg["evolve"]["profile"]
    if kind == "gaussian":
        return RadialProfile(grid, np.exp(-grid.s ** 2 / 2) + 0j)
    if kind == "constant":
        return RadialProfile(grid, np.ones(grid.count, dtype=complex))
    from .trials import random_profiles

    return random_profiles(grid, 1, int(cfg["seed"]))[0]


def cmd_evolve(cfg) -> int:
    ev = cfg["evolve"]
    G = _evolve_profile(cfg)
    os.makedirs(cfg["out"], exist_ok=True)
    damp = 1.0
    rows = []
    for t in ev["times"]:
        if ev["operator"] == "LstarL":
            damp = math.exp(-t * int(ev["n"]) ** 2 / 4)
        outs = {m: evolve(G, SemigroupQuery(float(t), m)).values * damp for m in METHODS}
        main = outs[cfg["method"]]
        disc = np.max([np.abs(outs[a] - outs[b]) for a, b in itertools.combinations(METHODS, 2)],
                      axis=0)
        path = os.path.join(cfg["out"], f"evolve_t{t:g}.csv")
        with open(path, "w") as fh:
            fh.write("s,re,im,discrepancy\n")
            for s, v, d in zip(G.grid.s, main, disc):
                fh.write(f"{float(s)!r},{float(v.real)!r},{float(v.imag)!r},{float(d)!r}\n")
        rows.append((t, cfg["method"], float(disc.max())))
    with open(os.path.join(cfg["out"], "evolve_summary.csv"), "w") as fh:
        fh.write("t,method,max_discrepancy\n")
        for t, m, d in rows:
            fh.write(f"{t!r},{m},{d!r}\n")
    for t, m, d in rows:
        print(f"evolve: t = {t:g} ({m}), three-way discrepancy {d:.2e}")
    return EXIT_OK


def cmd_spectrum(cfg) -> int:
    from .mellin import (
        check_dilation_shift,
        check_generator,
        check_generator_squared,
        check_semigroup,
        dump_spectrum_csv,
        mellin_forward,
        parseval_defect,
    )

    sp = cfg["spectrum"]
    g = cfg["grid"]
    grid = LogRadialGrid(float(g["s_min"]), float(g["s_max"]), int(g["count"]))
    n = int(sp["n"])
    kind = sp["field"]
    radial = kind != "perturbed" or n == 1
    order = 1 if radial else int(cfg["quadrature"]["order"])
    from .core_fields import make_spherical_quadrature

    sphere = make_spherical_quadrature(n, order)
    if kind == "zero":
        f = sample_log_field(lambda s, w: 0 * s + 0 * w[..., 0], grid, sphere, radial=True)
    elif kind == "gaussian":
        f = sample_log_field(lambda s, w: np.exp(-s ** 2 / 2) + 0 * w[..., 0], grid, sphere,
                             radial=True)
    else:
        f = sample_log_field(lambda s, w: np.exp(-s ** 2 / 2) * (1 + 0.5 * w[..., -1]), grid,
                             sphere, radial=radial)
    frac, t = float(sp["band_fraction"]), float(sp["t"])
    devs = {
        "dilation_shift": check_dilation_shift(f, t, frac),
        "generator": check_generator(f, frac),
        "semigroup": check_semigroup(f, t, cfg["method"], frac),
        "generator_squared": check_generator_squared(f, frac),
    }
    out = {k: {"in_band": d.in_band, "out_of_band": d.out_of_band, "scale": d.scale,
               "relative": d.relative} for k, d in devs.items()}
    out["parseval_defect"] = parseval_defect(f) if np.any(f.data) else 0.0
    os.makedirs(cfg["out"], exist_ok=True)
    dump_spectrum_csv(mellin_forward(f), os.path.join(cfg["out"], "spectrum.csv"))
    _write_json(os.path.join(cfg["out"], "deviations.json"),
                {"meta": _meta(cfg, [json.loads(grid_to_json(grid, sphere))]), "deviations": out})
    for k, d in devs.items():
        print(f"spectrum: {k} deviation {d.relative:.2e} (relative, in band)")
    return EXIT_OK


def _search_family(se, params):
    from . import trials as T

    n, p = int(se["n"]), float(se["p"])
    fam = se["family"]
    if fam == "log_gaussian":
        return T.log_gaussian_family(n, p)
    if fam == "sobolev_bubble":
        return T.sobolev_bubble_family(n)
    if fam == "perturbed_radial":
        return T.perturbed_radial_family(n)
    half = math.log(params["R"]) if "R" in params else params.get("Lam", 4.0)
    return T.annulus_bump_family(n, half)


def cmd_search(cfg) -> int:
    from .extremal import CounterexampleError, SearchError, optimize

    se = cfg["search"]
    ids = cfg["ids"] or ["hardy_dilation"]
    os.makedirs(cfg["out"], exist_ok=True)
    results = []
    for i in ids:
        e = get(i)
        if e.kind == "identity":
            raise ConfigError(f"{i} is an identity; nothing to search")
        params = dict(default_params(i, int(se["n"])))
        if "p" in e.parameters:
            params["p"] = float(se["p"])
        params.update(se["params"])
        params = {k: v for k, v in params.items() if k in e.parameters}
        try:
            e.check_domain(int(se["n"]), params)
        except ParameterDomainError as exc:
            raise ConfigError(str(exc)) from None
        direction = se["direction"] or ("minimize" if e.explicit else "maximize")
        fam = _search_family(se, params)
        try:
            res = optimize(i, fam, direction, int(se["budget"]), params, int(cfg["seed"]))
        except CounterexampleError as exc:
            _write_json(os.path.join(cfg["out"], "counterexample.json"), exc.record.to_dict())
            print(f"search: counterexample for {i}: {exc}")
            return EXIT_VIOLATION
        except SearchError as exc:
            raise ConfigError(str(exc)) from None
        results.append(res.to_dict())
        print(f"search: {i} on {fam.id}, {direction} ratio {res.best_ratio:.6g} "
              f"after {res.evaluations} evaluations")
    _write_json(os.path.join(cfg["out"], "search.json"),
                {"meta": _meta(cfg, []), "results": results})
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "evolve": cmd_evolve, "spectrum": cmd_spectrum,
            "search": cmd_search}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mellinlab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--ids", help="comma separated inequality ids")
        sp.add_argument("--method", choices=METHODS)
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config, {"seed": args.seed, "out": args.out, "ids": args.ids,
                                        "method": args.method})
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
