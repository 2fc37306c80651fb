"""Binary MAC with output law ``P(Y=1 | x1, x2) = q (x1 + x2)``.

Rates of this channel scale linearly in ``q`` as ``q -> 0``; the functions
here evaluate the symmetric sum rate exactly on finite-``q`` tables and
extract the coefficient of ``q`` (in nats) by a least-squares fit over a
grid of small ``q``.

The auxiliaries are generated from the previous block by
``A = 1{X1~ != Y~}`` and ``B = 1{X2~ != Y~}``, and their law is fixed by the
``q -> 0`` consistency equations, so the induced auxiliary law matches the
designed one only up to ``O(q)``.  That deviation is reported, never
repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from macfb.consistency import FeedbackLaw, check_consistency, solve_binary_xy
from macfb.errors import InfeasibleError, MacfbError
from macfb.prob import (
    PREVIOUS_STATE,
    CondTable,
    InputLaw,
    JointTable,
    binary_entropy as h,
    build_single_block,
    build_two_block,
    cond_entropy,
    deterministic_cond,
    marginalize,
)
from macfb.regions import (
    OUTPUT_HISTORY,
    cover_leung_region,
    equal_rate_point,
    theorem1_region_5form,
)

#: Stand-in for the "very close to 0" probability P(X1=1 | U=1, A=0).
EPSILON_P10 = 1e-6

#: Known good operating point of the two-block region.
REFERENCE_OPTIMUM = {"p0": 0.0024, "p00": 0.791, "p10": EPSILON_P10, "p01": 0.861, "p11": 0.996}

#: Best Cover-Leung point found by :func:`macfb.search.maximize_binary_sum_coefficient`
#: with its default settings; ``c_u = P(X = 1 | U = u)``.
CL_OPTIMUM = {"p0": 0.0894188, "c0": 1.0, "c1": 0.225338}

DEFAULT_Q_GRID = (1e-3, 3e-4, 1e-4, 3e-5, 1e-5)

#: Closed-form and exact evaluations must agree this closely at each q (nats).
CLOSED_FORM_TOL = 1e-6

_COEFF_NAMES = ("p0", "p00", "p10", "p01", "p11")


def build_binary_channel(q: float) -> CondTable:
    """``P(Y=1|01) = P(Y=1|10) = q``, ``P(Y=1|11) = 2q``, ``P(Y=1|00) = 0``."""
    if not 0 < q < 0.5:
        raise MacfbError(f"q must lie in (0, 0.5), got {q}")
    p = np.zeros((2, 2, 2))
    for x1 in (0, 1):
        for x2 in (0, 1):
            one = q * (x1 + x2)
            p[x1, x2] = (1.0 - one, one)
    return CondTable([("X1", 2), ("X2", 2)], [("Y", 2)], p)


@dataclass(frozen=True)
class BinaryMacParams:
    """Channel parameter and input-law parameters of the binary example.

    ``p_ua = P(X1 = 1 | U = u, A = a) = P(X2 = 1 | U = u, B = a)``;
    ``x = P_AB(0,1) = P_AB(1,0)`` and ``y = P_AB(1,1)``.  Use
    :meth:`solve` to derive ``(x, y)`` from the consistency equations.
    """

    q: float
    p0: float
    p00: float
    p10: float
    p01: float
    p11: float
    x: float
    y: float

    def __post_init__(self):
        if not 0 < self.q < 0.5:
            raise MacfbError(f"q must lie in (0, 0.5), got {self.q}")
        for name in _COEFF_NAMES:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise MacfbError(f"{name} must lie in [0, 1], got {v}")
        eps = 1e-12
        if self.x < -eps or self.y < -eps or 2 * self.x + self.y > 1 + eps:
            raise InfeasibleError(f"(x, y) = ({self.x}, {self.y}) is not a valid auxiliary law")

    @classmethod
    def solve(cls, q, p0, p00, p10, p01, p11):
        sol = solve_binary_xy(p0, p00, p10, p01, p11)
        if not sol.valid:
            raise InfeasibleError(f"(x, y) = ({sol.x}, {sol.y}) is not a valid auxiliary law")
        return cls(q, p0, p00, p10, p01, p11, sol.x, sol.y)

    @property
    def p1(self):
        return 1.0 - self.p0

    def coefficients(self):
        return {n: getattr(self, n) for n in _COEFF_NAMES}


def _pab(x, y):
    x, y = max(x, 0.0), max(y, 0.0)
    return np.array([[max(0.0, 1 - 2 * x - y), x], [x, y]])


def build_binary_feedback_law(params: BinaryMacParams):
    """Input law and deterministic feedback law of the binary example."""
    p = params
    px = np.empty((2, 2, 2))
    px[:, 0, 1] = (p.p00, p.p10)
    px[:, 1, 1] = (p.p01, p.p11)
    px[:, :, 0] = 1.0 - px[:, :, 1]
    law = InputLaw(
        JointTable([("U", 2)], [p.p0, p.p1]),
        JointTable([("A", 2), ("B", 2)], _pab(p.x, p.y)),
        CondTable([("U", 2), ("A", 2)], [("X1", 2)], px),
        CondTable([("U", 2), ("B", 2)], [("X2", 2)], px),
        build_binary_channel(p.q),
    )
    state = list(zip(PREVIOUS_STATE, (2, 2, 2, 2)))
    fb = FeedbackLaw(
        deterministic_cond(state + [("X1t", 2)], ("A", 2), lambda u, a, b, y, x1: x1 != y),
        deterministic_cond(state + [("X2t", 2)], ("B", 2), lambda u, a, b, y, x2: x2 != y),
    )
    return law, fb


def build_cl_dist(q, p0, c0, c1) -> JointTable:
    """Law over ``(U, X1, X2, Y)`` with ``P(X_i = 1 | U = u) = c_u`` for both inputs."""
    for name, v in (("p0", p0), ("c0", c0), ("c1", c1)):
        if not 0.0 <= v <= 1.0:
            raise MacfbError(f"{name} must lie in [0, 1], got {v}")
    c = np.array([c0, c1])
    px = np.stack([1 - c, c], axis=-1)[:, None, :]
    law = InputLaw(
        JointTable([("U", 2)], [p0, 1 - p0]),
        JointTable([("A", 1), ("B", 1)], [[1.0]]),
        CondTable([("U", 2), ("A", 1)], [("X1", 2)], px),
        CondTable([("U", 2), ("B", 1)], [("X2", 2)], px),
        build_binary_channel(q),
    )
    return marginalize(build_single_block(law), ("U", "X1", "X2", "Y"))


def symmetric_sum_rate(params: BinaryMacParams, history=OUTPUT_HISTORY):
    """Sum rate at the equal-rate point of the two-block region (nats).

    Returns ``(rate, consistency_deviation)``.  The consistency check is
    reported rather than enforced because it only holds as ``q -> 0``.
    """
    law, fb = build_binary_feedback_law(params)
    joint = build_two_block(law, fb)
    region = theorem1_region_5form(law, fb, "nats", history=history, joint=joint)
    return 2.0 * equal_rate_point(region), check_consistency(law, fb).max_deviation


def cl_symmetric_sum_rate(q, p0, c0, c1):
    """Sum rate at the equal-rate point of the Cover-Leung region (nats)."""
    return 2.0 * equal_rate_point(cover_leung_region(build_cl_dist(q, p0, c0, c1)))


def leading_order_entropy_forms(params: BinaryMacParams) -> dict:
    """Leading-order entropy expressions of the binary example, in nats.

    ``o(q)`` remainders are dropped.  Keys name the conditional entropy;
    ``t`` marks previous-block variables.
    """
    p = params
    q, x, y = p.q, p.x, p.y
    pu = np.array([p.p0, p.p1])
    a0 = np.array([p.p00, p.p10])
    a1 = np.array([p.p01, p.p11])
    z = 1 - 2 * x - y
    w1, w0 = x + y, 1 - x - y
    # P(X1 = 1 | B = b, U = u) under P_AB; zero-weight rows never contribute
    m1 = (x * a0 + y * a1) / w1 if w1 > 0 else np.zeros(2)
    m0 = (z * a0 + x * a1) / w0 if w0 > 0 else np.zeros(2)

    def hh(v):
        return h(np.clip(v, 0.0, 1.0))

    forms = {
        "H(Y)": h(2 * q * (x + y)),
        "H(Y|U)": float(np.sum(pu * hh(2 * q * ((x + y) * a1 + (1 - x - y) * a0)))),
        "H(Y|X1X2)": 2 * x * h(q) + y * h(2 * q),
        "H(Y|ABU)": float(np.sum(pu * (2 * x * hh(q * (a1 + a0)) + y * hh(2 * q * a1)
                                       + z * hh(2 * q * a0)))),
        "H(Y|X2ABU)": float(
            x * np.sum(pu * ((1 - a0) * hh(q * a1) + a0 * hh(q * (1 + a1))
                             + (1 - a1) * hh(q * a0) + a1 * hh(q * (1 + a0))))
            + y * np.sum(pu * ((1 - a1) * hh(q * a1) + a1 * hh(q * (1 + a1))))
            + z * np.sum(pu * ((1 - a0) * hh(q * a0) + a0 * hh(q * (1 + a0))))
        ),
    }
    forms["H(Y|YtU)"] = forms["H(Y|U)"]
    forms["H(Y|UBYtX2t)"] = float(np.sum(pu * (w1 * hh(q * (a1 + m1)) + w0 * hh(q * (a0 + m0)))))
    forms["H(Y|UBX2YtX2t)"] = float(
        np.sum(pu * w1 * (a1 * hh(q * (1 + m1)) + (1 - a1) * hh(q * m1)))
        + np.sum(pu * w0 * (a0 * hh(q * (1 + m0)) + (1 - a0) * hh(q * m0)))
    )
    return {k: float(v) for k, v in forms.items()}


#: Conditioning sets matching each key of :func:`leading_order_entropy_forms`.
ENTROPY_FORM_CONDITIONING = {
    "H(Y)": (),
    "H(Y|U)": ("U",),
    "H(Y|X1X2)": ("X1", "X2"),
    "H(Y|ABU)": ("A", "B", "U"),
    "H(Y|X2ABU)": ("X2", "A", "B", "U"),
    "H(Y|YtU)": ("Yt", "U"),
    "H(Y|UBYtX2t)": ("U", "B", "Yt", "X2t"),
    "H(Y|UBX2YtX2t)": ("U", "B", "X2", "Yt", "X2t"),
}


def exact_entropy_forms(params: BinaryMacParams, joint=None) -> dict:
    """The same conditional entropies evaluated on the exact two-block table."""
    if joint is None:
        joint = build_two_block(*build_binary_feedback_law(params))
    return {k: cond_entropy(joint, "Y", z) for k, z in ENTROPY_FORM_CONDITIONING.items()}


def closed_form_sum_rate(params: BinaryMacParams) -> float:
    """Symmetric sum rate assembled from :func:`leading_order_entropy_forms`.

    The previous-block state is the fed-back output only, and
    ``I(U; Y | U~ Y~)`` is taken as ``H(Y) - H(Y | Y~ U)``.
    """
    f = leading_order_entropy_forms(params)
    common = f["H(Y)"] - f["H(Y|YtU)"]
    r1a = (f["H(Y|X2ABU)"] - f["H(Y|X1X2)"]) + (f["H(Y|UBYtX2t)"] - f["H(Y|ABU)"]) + common
    r1b = f["H(Y|UBX2YtX2t)"] - f["H(Y|X1X2)"]
    total = f["H(Y)"] - f["H(Y|X1X2)"]
    return max(0.0, min(2 * r1a, 2 * r1b, total))


@dataclass(frozen=True)
class AsymptoticRate:
    """Small-q coefficient of a sum rate, ``R(q) / q -> coefficient`` (nats).

    The fit model is ``c0 + c1 q ln(1/q) + c2 q``; ``fit_residual`` is the
    RMS misfit of ``R(q)/q`` and ``two_point_coefficient`` the ``c0`` of the
    two-term model through the two smallest ``q``.
    """

    coefficient: float
    fit_residual: float
    q_grid: tuple
    normalized_rates: tuple
    fit: tuple
    two_point_coefficient: float
    consistency_deviation: tuple = ()
    closed_form_gap: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.fit_residual < max(1e-3 * abs(self.coefficient), 1e-12)

    @property
    def closed_form_agrees(self) -> bool | None:
        if self.closed_form_gap is None:
            return None
        return self.closed_form_gap <= CLOSED_FORM_TOL


def extrapolate_small_q(q_grid, rates):
    """Fit ``rates / q`` and return ``(c0, residual, fit, two_point_c0)``."""
    q = np.asarray(q_grid, float)
    r = np.asarray(rates, float) / q
    if q.size < 3 or np.any(q <= 0):
        raise MacfbError("need at least three positive q values")
    design = np.column_stack([np.ones_like(q), q * np.log(1 / q), q])
    coef, *_ = np.linalg.lstsq(design, r, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - r) ** 2)))
    order = np.argsort(q)[:2]
    two, *_ = np.linalg.lstsq(design[order, :2], r[order], rcond=None)
    return float(coef[0]), resid, tuple(float(c) for c in coef), float(two[0])


def asymptotic_sum_rate(p0, p00, p10, p01, p11, *, q_grid=DEFAULT_Q_GRID, history=OUTPUT_HISTORY,
                        cross_check=True) -> AsymptoticRate:
    """Coefficient of ``q`` in the symmetric sum rate of the two-block region.

    Parameters
    ----------
    p0, p00, p10, p01, p11 : float
        Input-law parameters; ``(x, y)`` is solved from them.
    q_grid : sequence of float
    history : sequence of str
        Previous-block state used in the region, see
        :func:`macfb.regions.theorem1_region_5form`.
    cross_check : bool
        Also evaluate the leading-order closed forms and record the largest
        gap to the exact rates.  Only meaningful with the output-only state.

    Raises
    ------
    InfeasibleError
        If the consistency equations give no valid auxiliary law.
    """
    rates, devs, gap = [], [], 0.0
    for q in q_grid:
        params = BinaryMacParams.solve(q, p0, p00, p10, p01, p11)
        rate, dev = symmetric_sum_rate(params, history)
        rates.append(rate)
        devs.append(dev)
        if cross_check:
            gap = max(gap, abs(closed_form_sum_rate(params) - rate))
    c0, resid, fit, two = extrapolate_small_q(q_grid, rates)
    return AsymptoticRate(
        c0, resid, tuple(q_grid), tuple(r / q for r, q in zip(rates, q_grid)), fit, two,
        tuple(devs), gap if cross_check else None,
        dict(zip(_COEFF_NAMES, (p0, p00, p10, p01, p11))),
    )


def asymptotic_cl_sum_rate(p0, c0, c1, *, q_grid=DEFAULT_Q_GRID) -> AsymptoticRate:
    """Coefficient of ``q`` in the Cover-Leung symmetric sum rate."""
    rates = [cl_symmetric_sum_rate(q, p0, c0, c1) for q in q_grid]
    coef, resid, fit, two = extrapolate_small_q(q_grid, rates)
    return AsymptoticRate(coef, resid, tuple(q_grid), tuple(r / q for r, q in zip(rates, q_grid)),
                          fit, two, params={"p0": p0, "c0": c0, "c1": c1})
