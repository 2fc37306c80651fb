"""Stationarity conditions for the feedback-generated auxiliaries.

Verification of the one- and two-pair consistency conditions, plus the two
closed-form solves that make the worked examples consistent: the gain pair
of the Gaussian feedback maps and the ``(x, y)`` parameterisation of the
binary auxiliary law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from macfb.errors import DimensionError, MacfbError, SingularSystemError
from macfb.prob import (
    PREVIOUS_STATE,
    CondTable,
    ExtendedInputLaw,
    InputLaw,
    build_single_block,
    build_single_block_extended,
)

#: Determinant magnitude below which the binary consistency system is singular.
SINGULAR_DET = 1e-12


@dataclass(frozen=True, eq=False)
class FeedbackLaw:
    """Feedback kernels ``Q(A | Ut, At, Bt, Yt, X1t)`` and ``Q(B | Ut, At, Bt, Yt, X2t)``."""

    q_a: CondTable
    q_b: CondTable

    @classmethod
    def from_arrays(cls, q_a, q_b):
        """Wrap arrays of shape ``(|U|, |A|, |B|, |Y|, |X1|, |A|)`` and ``(..., |X2|, |B|)``."""
        q_a = np.asarray(q_a, float)
        q_b = np.asarray(q_b, float)
        if q_a.ndim != 6 or q_b.ndim != 6:
            raise DimensionError("feedback kernels must have six axes")
        given_a = list(zip(PREVIOUS_STATE + ("X1t",), q_a.shape[:5]))
        given_b = list(zip(PREVIOUS_STATE + ("X2t",), q_b.shape[:5]))
        return cls(
            CondTable(given_a, [("A", q_a.shape[5])], q_a),
            CondTable(given_b, [("B", q_b.shape[5])], q_b),
        )

    def to_dict(self):
        return {"q_a": self.q_a.to_dict(), "q_b": self.q_b.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(CondTable.from_dict(data["q_a"]), CondTable.from_dict(data["q_b"]))


@dataclass(frozen=True, eq=False)
class ExtendedFeedbackLaw:
    """Factored feedback kernels for the two-pair scheme.

    ``Q(A'A | S~, A'~, X1~) = Q(A | S~, A'~) Q(A' | A, X1~, S~, A'~)``, with
    ``S~ = (Ut, At, Bt, Yt)``; the B side mirrors it.
    """

    q_a_given: CondTable
    q_ap_given: CondTable
    q_b_given: CondTable
    q_bp_given: CondTable

    @classmethod
    def from_arrays(cls, q_a, q_ap, q_b, q_bp):
        q_a, q_ap, q_b, q_bp = (np.asarray(t, float) for t in (q_a, q_ap, q_b, q_bp))
        if q_a.ndim != 6 or q_b.ndim != 6 or q_ap.ndim != 8 or q_bp.ndim != 8:
            raise DimensionError("extended feedback kernels have 6 and 8 axes")
        return cls(
            CondTable(list(zip(PREVIOUS_STATE + ("Apt",), q_a.shape[:5])), [("A", q_a.shape[5])], q_a),
            CondTable(list(zip(("A", "X1t") + PREVIOUS_STATE + ("Apt",), q_ap.shape[:7])),
                      [("Ap", q_ap.shape[7])], q_ap),
            CondTable(list(zip(PREVIOUS_STATE + ("Bpt",), q_b.shape[:5])), [("B", q_b.shape[5])], q_b),
            CondTable(list(zip(("B", "X2t") + PREVIOUS_STATE + ("Bpt",), q_bp.shape[:7])),
                      [("Bp", q_bp.shape[7])], q_bp),
        )

    def to_dict(self):
        return {
            "q_a_given": self.q_a_given.to_dict(),
            "q_ap_given": self.q_ap_given.to_dict(),
            "q_b_given": self.q_b_given.to_dict(),
            "q_bp_given": self.q_bp_given.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(*(CondTable.from_dict(data[k])
                     for k in ("q_a_given", "q_ap_given", "q_b_given", "q_bp_given")))


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of a consistency check.

    ``max_deviation`` is the largest absolute gap between the induced and
    the designed auxiliary law, reached at index ``cell``.
    """

    max_deviation: float
    cell: tuple
    induced: np.ndarray
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tol

    def __float__(self):
        return self.max_deviation


def induced_pab(law: InputLaw, fb: FeedbackLaw) -> np.ndarray:
    """Law of ``(A, B)`` produced by the feedback kernels from one stationary block."""
    s = law.sizes
    state = (s["U"], s["A"], s["B"], s["Y"])
    if fb.q_a.given_sizes != state + (s["X1"],) or fb.q_a.target_sizes != (s["A"],):
        raise DimensionError(f"q_a: sizes {fb.q_a.given_sizes}->{fb.q_a.target_sizes} do not match the law")
    if fb.q_b.given_sizes != state + (s["X2"],) or fb.q_b.target_sizes != (s["B"],):
        raise DimensionError(f"q_b: sizes {fb.q_b.given_sizes}->{fb.q_b.target_sizes} do not match the law")
    single = build_single_block(law).p  # u a b x1 x2 y
    return np.einsum("uabcdy,uabyce,uabydf->ef", single, fb.q_a.p, fb.q_b.p, optimize=True)


def check_consistency(law: InputLaw, fb: FeedbackLaw, tol=1e-8) -> ConsistencyReport:
    """Compare the induced auxiliary law against ``law.p_ab``."""
    induced = induced_pab(law, fb)
    gap = np.abs(induced - law.p_ab.p)
    cell = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return ConsistencyReport(float(gap[cell]), tuple(int(i) for i in cell), induced, tol)


def induced_paux_extended(law: ExtendedInputLaw, fb: ExtendedFeedbackLaw) -> np.ndarray:
    """Law of ``(A', B', A, B)`` induced by the factored feedback kernels."""
    s = law.sizes
    state = (s["U"], s["A"], s["B"], s["Y"])
    checks = [
        (fb.q_a_given, "q_a_given", state + (s["Ap"],), (s["A"],)),
        (fb.q_ap_given, "q_ap_given", (s["A"], s["X1"]) + state + (s["Ap"],), (s["Ap"],)),
        (fb.q_b_given, "q_b_given", state + (s["Bp"],), (s["B"],)),
        (fb.q_bp_given, "q_bp_given", (s["B"], s["X2"]) + state + (s["Bp"],), (s["Bp"],)),
    ]
    for table, label, given, target in checks:
        if table.given_sizes != given or table.target_sizes != target:
            raise DimensionError(f"{label}: sizes {table.given_sizes}->{table.target_sizes} do not match the law")
    single = build_single_block_extended(law).p  # u P Q a b c d y  (P=A'~, Q=B'~)
    return np.einsum(
        "uPQabcdy,uabyPe,ecuabyPf,uabyQg,gduabyQh->fheg",
        single, fb.q_a_given.p, fb.q_ap_given.p, fb.q_b_given.p, fb.q_bp_given.p,
        optimize=True,
    )


def check_consistency_extended(law: ExtendedInputLaw, fb: ExtendedFeedbackLaw, tol=1e-8) -> ConsistencyReport:
    """Compare the induced ``(A', B', A, B)`` law against ``law.p_apbpab``."""
    induced = induced_paux_extended(law, fb)
    gap = np.abs(induced - law.p_apbpab.p)
    cell = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return ConsistencyReport(float(gap[cell]), tuple(int(i) for i in cell), induced, tol)


@dataclass(frozen=True)
class GaussianGains:
    """Gains of the Gaussian feedback maps.

    ``root_choice`` is ``(sign of k1, sign in front of the square root)``.
    """

    k1: float
    k2: float
    root_choice: tuple


def _check_awgn_args(alpha, beta, lam, snr):
    if not alpha > 0:
        raise MacfbError(f"alpha must be positive, got {alpha}")
    if beta < 0:
        raise MacfbError(f"beta must be nonnegative, got {beta}")
    if alpha + beta > 1 + 1e-12:
        raise MacfbError(f"alpha + beta must not exceed 1, got {alpha + beta}")
    if abs(lam) > 1:
        raise MacfbError(f"|lambda| must not exceed 1, got {lam}")
    if not snr > 0:
        raise MacfbError(f"snr must be positive, got {snr}")


def fresh_correlation(alpha, snr):
    """``sqrt(alpha P / (2 alpha P + sigma^2))``, the correlation of the fresh input with f."""
    return math.sqrt(alpha * snr / (2 * alpha * snr + 1))


def lambda_limit(alpha, snr):
    """Largest correlation for which real gains exist: ``alpha P / (alpha P + sigma^2)``."""
    return alpha * snr / (alpha * snr + 1)


def gaussian_gain_roots(alpha, beta, lam, snr, disc_tol=1e-12):
    """All real gain pairs solving the unit-power and correlation equations.

    With ``k1**2 = 1 + lam`` the unit-power equation becomes
    ``k2**2 + 2 c k1 k2 + lam = 0``.  Returns an empty list when the
    discriminant is negative.
    """
    _check_awgn_args(alpha, beta, lam, snr)
    c = fresh_correlation(alpha, snr)
    roots = []
    for sign in (1, -1):
        k1 = sign * math.sqrt(1 + lam)
        disc = k1 * k1 * c * c - lam
        if disc < -disc_tol:
            return []
        r = math.sqrt(max(disc, 0.0))
        for branch in (1, -1):
            roots.append(GaussianGains(k1, -k1 * c + branch * r, (sign, branch)))
    return roots


def solve_gaussian_gains(alpha, beta, lam, snr):
    """Gains ``(k1, k2)`` making the Gaussian feedback maps consistent.

    Returns None when no real solution exists, which happens exactly when
    ``lam > alpha snr / (alpha snr + 1)``.  The equal-rate objective does
    not depend on which root is used, so the choice is fixed by preferring
    ``k1 > 0`` and then the larger ``k2``.

    Raises
    ------
    MacfbError
        If the arguments violate their preconditions.
    """
    roots = gaussian_gain_roots(alpha, beta, lam, snr)
    if not roots:
        return None
    return max(roots, key=lambda g: (g.k1 > 0, g.k2))


def gain_residuals(gains: GaussianGains, alpha, lam, snr):
    """Residuals of ``E[A^2] = 1`` and ``E[AB] = lam`` at the given gains."""
    c = fresh_correlation(alpha, snr)
    k1, k2 = gains.k1, gains.k2
    power = k1 * k1 + k2 * k2 + 2 * k1 * k2 * c
    corr = -k2 * k2 - 2 * k1 * k2 * c
    return power - 1.0, corr - lam


@dataclass(frozen=True)
class BinaryXY:
    """Solution of the binary consistency system.

    ``x = P_AB(0,1) = P_AB(1,0)`` and ``y = P_AB(1,1)``; ``valid`` is False
    when the pair does not describe a distribution.
    """

    x: float
    y: float
    valid: bool
    residual: float


def _binary_terms(p0, p00, p10, p01, p11):
    pu = np.array([p0, 1.0 - p0])
    a0 = np.array([p00, p10])
    a1 = np.array([p01, p11])
    return pu, a0, a1


def binary_fixed_point_map(x, y, p0, p00, p10, p01, p11):
    """Right-hand sides of the two limiting consistency equations."""
    pu, a0, a1 = _binary_terms(p0, p00, p10, p01, p11)
    z = 1 - 2 * x - y
    new_y = np.sum(pu * (y * a1**2 + 2 * x * a0 * a1 + z * a0**2))
    new_x = np.sum(pu * (y * (1 - a1) * a1 + x * (1 - a1) * a0 + x * (1 - a0) * a1 + z * (1 - a0) * a0))
    return float(new_x), float(new_y)


def solve_binary_xy(p0, p00, p10, p01, p11) -> BinaryXY:
    """Solve the 2x2 linear system fixing ``(x, y)`` in the small-q limit.

    Raises
    ------
    SingularSystemError
        If the determinant magnitude is below :data:`SINGULAR_DET`.
    """
    for name, v in (("p0", p0), ("p00", p00), ("p10", p10), ("p01", p01), ("p11", p11)):
        if not 0.0 <= v <= 1.0:
            raise MacfbError(f"{name} must lie in [0, 1], got {v}")
    pu, a0, a1 = _binary_terms(p0, p00, p10, p01, p11)
    m = np.array([
        [1 - np.sum(pu * (a1 - a0) * (1 - 2 * a0)), np.sum(pu * (a0 * (1 - a0) - a1 * (1 - a1)))],
        [2 * np.sum(pu * a0 * (a0 - a1)), 1 - np.sum(pu * (a1**2 - a0**2))],
    ])
    rhs = np.array([np.sum(pu * a0 * (1 - a0)), np.sum(pu * a0**2)])
    det = float(np.linalg.det(m))
    if abs(det) < SINGULAR_DET:
        raise SingularSystemError(f"binary consistency system is singular (det={det:.3e})")
    x, y = (float(v) for v in np.linalg.solve(m, rhs))
    fx, fy = binary_fixed_point_map(x, y, p0, p00, p10, p01, p11)
    residual = max(abs(fx - x), abs(fy - y))
    eps = 1e-12
    valid = x >= -eps and y >= -eps and 2 * x + y <= 1 + eps
    return BinaryXY(x, y, valid, residual)
