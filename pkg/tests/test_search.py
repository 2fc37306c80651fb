import json

import numpy as np
import pytest

from macfb.binary_mac import EPSILON_P10, REFERENCE_OPTIMUM, asymptotic_sum_rate
from macfb.errors import InfeasibleError, MacfbError
from macfb.search import (
    SearchSpec,
    awgn_feasible,
    binary_feasible,
    default_awgn_spec,
    grid_search,
    local_refine,
    maximize_awgn_equal_rate,
    maximize_binary_sum_coefficient,
    n_jobs_from_env,
)
from macfb.awgn import awgn_equal_rate, cl_equal_rate


def bowl(p):
    return -((p["x"] - 0.3) ** 2) - (p["y"] - 0.7) ** 2


def test_spec_validation_and_json():
    with pytest.raises(MacfbError):
        SearchSpec({"x": (0, 1)}, grid_resolution=2)
    with pytest.raises(MacfbError):
        SearchSpec({"x": (1, 0)})
    s = default_awgn_spec(grid_resolution=7)
    assert SearchSpec.from_json(s.to_json()) == s
    with pytest.raises(MacfbError):
        SearchSpec.from_dict({"bounds": {}, "bogus": 1})


def test_local_refine_improves_and_never_regresses():
    spec = SearchSpec({"x": (0, 1), "y": (0, 1)})
    res = local_refine(bowl, {"x": 0.9, "y": 0.1}, spec)
    assert res.best_value > bowl({"x": 0.9, "y": 0.1})
    assert res.best_params == pytest.approx({"x": 0.3, "y": 0.7}, abs=1e-4)
    at_opt = local_refine(bowl, {"x": 0.3, "y": 0.7}, spec)
    assert at_opt.best_value >= 0.0 - 1e-12


def test_infeasible_points_are_never_evaluated():
    seen = []

    def obj(p):
        seen.append(p)
        return p["x"] + p["y"]

    feas = lambda p: p["x"] + p["y"] <= 1.0  # noqa: E731
    res = grid_search(obj, SearchSpec({"x": (0, 1), "y": (0, 1)}, grid_resolution=5), feas)
    assert all(feas(p) for p in seen)
    assert res.best_value == pytest.approx(1.0)
    with pytest.raises(InfeasibleError):
        local_refine(obj, {"x": 1.0, "y": 1.0}, SearchSpec({"x": (0, 1), "y": (0, 1)}), feas)


def test_tie_break_is_lexicographic():
    res = grid_search(lambda p: 1.0, SearchSpec({"x": (0, 1)}, grid_resolution=3, refine_iterations=0))
    assert res.best_params == {"x": 0.0}


def test_determinism_and_parallel_agreement():
    spec = default_awgn_spec(grid_resolution=9)
    a = maximize_awgn_equal_rate(5.0, spec)
    b = maximize_awgn_equal_rate(5.0, spec)
    c = maximize_awgn_equal_rate(5.0, spec.with_overrides(n_jobs=2))
    assert a.best_value == b.best_value == c.best_value
    assert a.best_params == b.best_params == c.best_params


def test_awgn_result_is_reproducible_and_feasible():
    res = maximize_awgn_equal_rate(1.0)
    p = res.best_params
    assert awgn_feasible(1.0, p)
    assert awgn_equal_rate(1.0, p["alpha"], p["beta"], p["lambda"]) == pytest.approx(res.best_value, abs=1e-12)
    assert res.best_value >= cl_equal_rate(1.0)


def test_binary_singleton_domain():
    bounds = {k: (v, v) for k, v in REFERENCE_OPTIMUM.items()}
    res = maximize_binary_sum_coefficient(SearchSpec(bounds, grid_resolution=3))
    assert res.best_value == asymptotic_sum_rate(**REFERENCE_OPTIMUM, cross_check=False).coefficient
    assert res.evaluations == 2


def test_binary_small_search_is_feasible():
    bounds = {"p0": (0.0, 0.01), "p00": (0.7, 0.9), "p10": (EPSILON_P10, EPSILON_P10),
              "p01": (0.8, 0.9), "p11": (0.99, 1.0)}
    res = maximize_binary_sum_coefficient(SearchSpec(bounds, grid_resolution=3, refine_iterations=30, top_k=1))
    assert binary_feasible(res.best_params) and res.best_params["p10"] == EPSILON_P10
    assert res.best_value >= 0.5


def test_thread_env(monkeypatch):
    monkeypatch.delenv("MACFB_THREADS", raising=False)
    assert n_jobs_from_env() == 1
    monkeypatch.setenv("MACFB_THREADS", "0")
    assert n_jobs_from_env() == -1
    monkeypatch.setenv("MACFB_THREADS", "3")
    assert n_jobs_from_env() == 3
    monkeypatch.setenv("MACFB_THREADS", "x")
    with pytest.raises(MacfbError):
        n_jobs_from_env()


def test_trace_records_evaluations():
    res = grid_search(bowl, SearchSpec({"x": (0, 1), "y": (0, 1)}, grid_resolution=3, top_k=1), record_trace=True)
    assert len(res.trace) == res.evaluations
    json.dumps(res.to_dict())
