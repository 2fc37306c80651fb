"""Deterministic grid-then-simplex maximisation of the two rate objectives.

A search evaluates a full product grid, keeps the best ``top_k`` cells and
polishes each with a bounded Nelder-Mead run.  Constraint predicates are
checked before every objective call, so an infeasible point is never
evaluated.  Ties are broken toward the lexicographically smallest parameter
tuple, which makes parallel and sequential grid evaluation agree.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize

from macfb.consistency import lambda_limit, solve_binary_xy
from macfb.errors import InfeasibleError, MacfbError, SingularSystemError

THREADS_ENV = "MACFB_THREADS"


@dataclass(frozen=True)
class SearchSpec:
    """Box bounds plus grid and refinement settings.

    ``bounds`` maps parameter names to closed intervals; a degenerate
    interval pins the parameter.  ``seed`` is carried for reproducibility
    records; the current search uses no randomness.
    """

    bounds: dict
    grid_resolution: int = 15
    refine_iterations: int = 200
    top_k: int = 8
    seed: int = 0
    xatol: float = 1e-9
    fatol: float = 1e-9
    n_jobs: int | None = None

    def __post_init__(self):
        if self.grid_resolution < 3:
            raise MacfbError(f"grid_resolution must be at least 3, got {self.grid_resolution}")
        if self.refine_iterations < 0 or self.top_k < 1:
            raise MacfbError("refine_iterations must be >= 0 and top_k >= 1")
        clean = {}
        for name, (lo, hi) in self.bounds.items():
            lo, hi = float(lo), float(hi)
            if not lo <= hi:
                raise MacfbError(f"empty interval for {name}: [{lo}, {hi}]")
            clean[name] = (lo, hi)
        object.__setattr__(self, "bounds", clean)

    @property
    def names(self):
        return tuple(self.bounds)

    def grid_axes(self):
        return [np.unique(np.linspace(lo, hi, self.grid_resolution)) if hi > lo
                else np.array([lo]) for lo, hi in self.bounds.values()]

    def with_overrides(self, **kw):
        d = asdict(self)
        d.update({k: v for k, v in kw.items() if v is not None})
        return SearchSpec(**d)

    def to_dict(self):
        d = asdict(self)
        d["bounds"] = {k: list(v) for k, v in self.bounds.items()}
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "bounds" not in d:
            raise MacfbError("search spec needs a 'bounds' object")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise MacfbError(f"unknown search spec fields: {sorted(unknown)}")
        d["bounds"] = {k: tuple(v) for k, v in d["bounds"].items()}
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class SearchResult:
    best_value: float
    best_params: dict
    evaluations: int
    trace: list | None = field(default=None, repr=False)

    def to_dict(self):
        d = {"best_value": self.best_value, "best_params": self.best_params,
             "evaluations": self.evaluations}
        if self.trace is not None:
            d["trace"] = [{"params": p, "value": v} for p, v in self.trace]
        return d


def n_jobs_from_env(default=1):
    """Worker count from ``MACFB_THREADS``: unset gives ``default``, 0 means all cores."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise MacfbError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise MacfbError(f"{THREADS_ENV} must be nonnegative, got {n}")
    return -1 if n == 0 else n


def _better(a, b):
    """True when ``(value, params)`` pair ``a`` beats ``b``."""
    if a[0] != b[0]:
        return a[0] > b[0]
    return tuple(a[1].values()) < tuple(b[1].values())


def _rank_key(item):
    value, params = item
    return (-value, tuple(params.values()))


def _safe_eval(objective, feasible, params):
    if feasible is not None and not feasible(params):
        return None
    return float(objective(params))


def local_refine(objective, start_params, spec: SearchSpec, feasible=None, trace=None) -> SearchResult:
    """Bounded Nelder-Mead ascent from ``start_params``.

    Parameters pinned by a degenerate interval, or missing from
    ``spec.bounds``, stay fixed.  Infeasible proposals score ``-inf`` without
    calling ``objective``.  The returned value is never below the start
    value.
    """
    if feasible is not None and not feasible(start_params):
        raise InfeasibleError(f"start point {start_params} is infeasible")
    start_value = float(objective(start_params))
    evals = 1
    if trace is not None:
        trace.append((dict(start_params), start_value))
    free = [n for n in start_params if n in spec.bounds and spec.bounds[n][1] > spec.bounds[n][0]]
    best = (start_value, dict(start_params))
    if not free or spec.refine_iterations == 0:
        return SearchResult(start_value, dict(start_params), evals, trace)

    lo = np.array([spec.bounds[n][0] for n in free])
    hi = np.array([spec.bounds[n][1] for n in free])
    x0 = np.array([start_params[n] for n in free], float)

    def unpack(z):
        p = dict(start_params)
        p.update({n: float(v) for n, v in zip(free, np.clip(z, lo, hi))})
        return p

    def neg(z):
        nonlocal evals, best
        p = unpack(z)
        if feasible is not None and not feasible(p):
            return np.inf
        v = float(objective(p))
        evals += 1
        if trace is not None:
            trace.append((p, v))
        if _better((v, p), best):
            best = (v, p)
        return -v

    # simplex edges of 5% of the box width, pointing into the box
    step = 0.05 * (hi - lo)
    simplex = [x0]
    for i in range(len(free)):
        v = x0.copy()
        v[i] = x0[i] + step[i] if x0[i] + step[i] <= hi[i] else x0[i] - step[i]
        simplex.append(v)
    minimize(neg, x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
             options={"maxiter": spec.refine_iterations, "xatol": spec.xatol,
                      "fatol": spec.fatol, "initial_simplex": np.array(simplex)})
    return SearchResult(best[0], best[1], evals, trace)


def grid_search(objective, spec: SearchSpec, feasible=None, record_trace=False) -> SearchResult:
    """Grid evaluation followed by :func:`local_refine` on the ``top_k`` cells."""
    names = spec.names
    cells = [dict(zip(names, map(float, c))) for c in itertools.product(*spec.grid_axes())]
    n_jobs = spec.n_jobs if spec.n_jobs is not None else n_jobs_from_env()
    run = partial(_safe_eval, objective, feasible)
    if n_jobs == 1:
        values = [run(c) for c in cells]
    else:
        values = Parallel(n_jobs=n_jobs)(delayed(run)(c) for c in cells)
    scored = [(v, c) for v, c in zip(values, cells) if v is not None]
    if not scored:
        raise InfeasibleError("no feasible grid cell")
    evals = len(scored)
    trace = [(c, v) for v, c in scored] if record_trace else None
    scored.sort(key=_rank_key)
    best = scored[0]
    for v, c in scored[: spec.top_k]:
        res = local_refine(objective, c, spec, feasible, trace)
        evals += res.evaluations
        if _better((res.best_value, res.best_params), best):
            best = (res.best_value, res.best_params)
    return SearchResult(best[0], best[1], evals, trace)


# AWGN ---------------------------------------------------------------------

def default_awgn_spec(**overrides) -> SearchSpec:
    return SearchSpec({"alpha": (1e-3, 1.0), "beta": (0.0, 1.0), "lambda": (0.0, 1.0)},
                      grid_resolution=31).with_overrides(**overrides)


def awgn_feasible(snr, p):
    a, b, lam = p["alpha"], p["beta"], p["lambda"]
    return a > 0 and b >= 0 and a + b <= 1 and 0 <= lam <= lambda_limit(a, snr)


def _awgn_objective(snr, p):
    from macfb.awgn import awgn_equal_rate

    return awgn_equal_rate(snr, p["alpha"], p["beta"], p["lambda"])


def maximize_awgn_equal_rate(snr, spec: SearchSpec | None = None, record_trace=False) -> SearchResult:
    """Maximise the Gaussian equal-rate point over ``(alpha, beta, lambda)``, in bits."""
    if not snr > 0:
        raise MacfbError(f"snr must be positive, got {snr}")
    spec = spec or default_awgn_spec()
    missing = {"alpha", "beta", "lambda"} - set(spec.bounds)
    if missing:
        raise MacfbError(f"AWGN search needs bounds for {sorted(missing)}")
    return grid_search(partial(_awgn_objective, snr), spec, partial(awgn_feasible, snr), record_trace)


# binary MAC ---------------------------------------------------------------

def default_binary_spec(restrict="theorem1", **overrides) -> SearchSpec:
    if restrict == "theorem1":
        from macfb.binary_mac import EPSILON_P10

        bounds = {"p0": (0.0, 1.0), "p00": (0.0, 1.0), "p10": (EPSILON_P10, EPSILON_P10),
                  "p01": (0.0, 1.0), "p11": (0.0, 1.0)}
        spec = SearchSpec(bounds, grid_resolution=9)
    elif restrict == "cover-leung":
        spec = SearchSpec({"p0": (0.0, 1.0), "c0": (0.0, 1.0), "c1": (0.0, 1.0)}, grid_resolution=15)
    else:
        raise MacfbError(f"restrict must be 'theorem1' or 'cover-leung', got {restrict!r}")
    return spec.with_overrides(**overrides)


def binary_feasible(p):
    try:
        sol = solve_binary_xy(p["p0"], p["p00"], p["p10"], p["p01"], p["p11"])
    except (SingularSystemError, MacfbError):
        return False
    return sol.valid


def _binary_objective(q_grid, history, p):
    from macfb.binary_mac import asymptotic_sum_rate

    return asymptotic_sum_rate(p["p0"], p["p00"], p["p10"], p["p01"], p["p11"],
                               q_grid=q_grid, history=history, cross_check=False).coefficient


def _cl_objective(q_grid, p):
    from macfb.binary_mac import asymptotic_cl_sum_rate

    return asymptotic_cl_sum_rate(p["p0"], p["c0"], p["c1"], q_grid=q_grid).coefficient


def maximize_binary_sum_coefficient(spec: SearchSpec | None = None, *, restrict="theorem1",
                                    q_grid=None, history=None, record_trace=False) -> SearchResult:
    """Maximise the small-q sum-rate coefficient of the binary MAC, in nats.

    ``restrict="cover-leung"`` searches the Cover-Leung specialisation over
    ``(p0, c0, c1)`` with ``c_u = P(X = 1 | U = u)``.
    """
    from macfb.binary_mac import DEFAULT_Q_GRID
    from macfb.regions import OUTPUT_HISTORY

    q_grid = tuple(q_grid or DEFAULT_Q_GRID)
    spec = spec or default_binary_spec(restrict)
    if restrict == "cover-leung":
        return grid_search(partial(_cl_objective, q_grid), spec, None, record_trace)
    if restrict != "theorem1":
        raise MacfbError(f"restrict must be 'theorem1' or 'cover-leung', got {restrict!r}")
    missing = {"p0", "p00", "p10", "p01", "p11"} - set(spec.bounds)
    if missing:
        raise MacfbError(f"binary search needs bounds for {sorted(missing)}")
    obj = partial(_binary_objective, q_grid, tuple(history or OUTPUT_HISTORY))
    return grid_search(obj, spec, binary_feasible, record_trace)
