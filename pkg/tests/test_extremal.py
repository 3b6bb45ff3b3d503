import dataclasses
import math

import numpy as np
import pytest

from mellinlab import inequalities
from mellinlab.core_fields import FieldError
from mellinlab.extremal import (
    CounterexampleError,
    SearchError,
    estimate_constant,
    optimize,
    ratio,
)
from mellinlab.trials import (
    TrialFamily,
    annulus_bump_family,
    build_trial,
    log_gaussian_family,
    sobolev_bubble_family,
)


def test_ratio_gaussian(gauss3):
    assert ratio("hardy_dilation", gauss3, {"p": 2}) == pytest.approx(5 / 3, rel=1e-10)


def test_ratio_deterministic(gauss3):
    f = build_trial({"family": "bump_mixture", "params": {"seed": 1, "index": 4}, "context": {"n": 3}})
    g = f.with_data(f.data + 0.0)
    assert ratio("main_p2", f) == ratio("main_p2", g)


def test_ratio_null(gauss3):
    with pytest.raises(inequalities.NullFunctionError):
        ratio("hardy_dilation", gauss3.with_data(0 * gauss3.data))


def test_stubbe_bubble_ratio():
    # (1 + r^2)^{-1/2} is the n = 3 Sobolev extremizer, so delta = 0 is sharp
    for count in (4096, 8192):
        f = build_trial({"family": "sobolev_bubble", "params": {"lam": 1.0},
                         "context": {"n": 3, "count": count}})
        r = ratio("stubbe", f, {"delta": 0.0})
        assert 0.99 <= r <= 1 + 1e-9


def test_log_gaussian_analytic_ratio():
    # hardy_dilation at p = 2 on r^{-n/2} exp(-(ln r)^2 / 2 sigma^2): 1 + 2 / (n^2 sigma^2)
    for n in (1, 3, 5):
        for sigma in (0.7, 3.0, 20.0):
            f = build_trial({"family": "log_gaussian", "params": {"sigma": sigma},
                             "context": {"n": n, "p": 2}})
            assert ratio("hardy_dilation", f, {"p": 2}) == pytest.approx(
                1 + 2 / (n * sigma) ** 2, rel=1e-10)


def test_sharpness_search():
    res = optimize("hardy_dilation", log_gaussian_family(3, 2.0), "minimize", 200, {"p": 2})
    assert res.best_ratio <= 1.02
    assert res.best_params["sigma"] >= 20
    assert res.evaluations <= 200
    # the ratio decreases in sigma
    fam = log_gaussian_family(3, 2.0)
    vals = [ratio("hardy_dilation", fam.generate([s, 0.0]), {"p": 2}) for s in (1, 5, 20, 50)]
    assert np.all(np.diff(vals) < 0)


def test_best_ratio_is_certified():
    res = optimize("hardy_dilation", log_gaussian_family(2, 1.5), "minimize", 100, {"p": 1.5})
    rec = inequalities.certify("hardy_dilation", build_trial(res.trial), {"p": 1.5})
    assert rec.ratio == pytest.approx(res.best_ratio, rel=1e-12)
    assert rec.verdict == "holds"
    assert res.history == sorted(res.history, reverse=True)


def test_single_point_family():
    fam = log_gaussian_family(3, 2.0, sigma=(2.0, 2.0), mu=(0.5, 0.5))
    res = optimize("hardy_dilation", fam, "minimize", 1, {"p": 2})
    assert res.evaluations == 1
    assert res.best_params == {"sigma": 2.0, "mu": 0.5}
    assert res.best_ratio == pytest.approx(1 + 2 / 36, rel=1e-10)


def test_budget_too_small():
    with pytest.raises(ValueError):
        optimize("hardy_dilation", log_gaussian_family(3), "minimize", 10)
    with pytest.raises(ValueError):
        optimize("hardy_dilation", log_gaussian_family(3), "sideways")
    with pytest.raises(ValueError):
        optimize("ibp_identity", log_gaussian_family(3), "minimize")


def test_same_seed_same_result():
    fam = log_gaussian_family(4, 3.0)
    a = optimize("hardy_dilation", fam, "minimize", 60, {"p": 3}, seed=11)
    b = optimize("hardy_dilation", fam, "minimize", 60, {"p": 3}, seed=11)
    assert a.to_dict() == b.to_dict()
    assert a.seed == 11


def test_all_evaluations_fail():
    fam = log_gaussian_family(2, 2.0, sigma=(1.0, 1.0), mu=(0.0, 0.0))
    # stubbe needs n >= 3, so every evaluation is out of domain
    with pytest.raises(SearchError):
        optimize("stubbe", fam, "minimize", 1, {"delta": 0.0})


def test_estimate_constant_errors():
    with pytest.raises(ValueError):
        estimate_constant("main_p2", [])
    with pytest.raises(ValueError):
        estimate_constant("hardy_dilation", [log_gaussian_family(3)])


def test_main_p2_constant_stable():
    vals = []
    for count in (2048, 4096):
        v, res = estimate_constant("main_p2", [log_gaussian_family(3, 2.0, count=count)], budget=100)
        assert 0 < v < math.inf
        vals.append(v)
    assert f"{vals[0]:.3g}" == f"{vals[1]:.3g}"


def test_sobolev_compact_absorbs_support():
    vals = [estimate_constant("sobolev_compact", [annulus_bump_family(3, lam)], budget=100,
                              params={"p": 2, "Lam": lam})[0] for lam in (1, 2, 4)]
    assert max(vals) / min(vals) <= 1.02


def test_counterexample_raises(monkeypatch):
    # shrink the constant of hardy_dilation so that every trial violates it
    entry = inequalities.get("hardy_dilation")
    broken = dataclasses.replace(entry, constant=lambda n, prm: 10.0 * (n / prm["p"]) ** prm["p"])
    monkeypatch.setitem(inequalities._BY_ID, "hardy_dilation", broken)
    with pytest.raises(CounterexampleError) as info:
        optimize("hardy_dilation", log_gaussian_family(3), "minimize", 50, {"p": 2})
    assert info.value.record.verdict == "violated"
    assert info.value.record.trial["family"] == "log_gaussian"


def test_maximize_bubble():
    res = optimize("stubbe", sobolev_bubble_family(3), "maximize", 50, {"delta": 0.0})
    assert 0.99 <= res.best_ratio <= 1 + 1e-9
