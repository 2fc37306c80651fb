"""Two-dimensional rate regions given as intersections of half-planes.

Every region here is a list of constraints ``a1 R1 + a2 R2 <= bound`` with
``(a1, a2)`` in ``{(1, 0), (0, 1), (1, 1)}``.  Strict inequalities are
taken as closed half-planes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from macfb.consistency import (
    ExtendedFeedbackLaw,
    FeedbackLaw,
    check_consistency,
    check_consistency_extended,
)
from macfb.errors import ConsistencyError, MacfbError
from macfb.prob import (
    PREVIOUS_STATE,
    ExtendedInputLaw,
    InputLaw,
    JointTable,
    build_two_block,
    build_two_block_extended,
    cond_mutual_info,
)

#: Previous-block state as defined for the two-block scheme.
FULL_HISTORY = PREVIOUS_STATE
#: Previous-block state reduced to the fed-back output only.
OUTPUT_HISTORY = ("Yt",)

#: Tolerance on independence checks for the single-block regions.
INDEPENDENCE_TOL = 1e-9


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float

    def __post_init__(self):
        if self.r1 < 0 or self.r2 < 0:
            raise MacfbError(f"rates must be nonnegative, got ({self.r1}, {self.r2})")


@dataclass(frozen=True)
class RateConstraintSet:
    """Half-plane description of a rate region.

    Attributes
    ----------
    constraints : tuple of (a1, a2, bound)
    unit : {'bits', 'nats'}
    labels : tuple of str
        Optional human-readable name per constraint.
    """

    constraints: tuple
    unit: str = "nats"
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        cons = tuple((float(a1), float(a2), float(b)) for a1, a2, b in self.constraints)
        object.__setattr__(self, "constraints", cons)
        if self.unit not in ("bits", "nats"):
            raise MacfbError(f"unknown unit {self.unit!r}")
        if self.labels and len(self.labels) != len(cons):
            raise MacfbError("labels must match constraints one to one")

    def _tightest(self, a1, a2):
        bounds = [b for c1, c2, b in self.constraints if (c1, c2) == (a1, a2)]
        return min(bounds) if bounds else math.inf

    @property
    def r1_bound(self):
        return self._tightest(1.0, 0.0)

    @property
    def r2_bound(self):
        return self._tightest(0.0, 1.0)

    @property
    def sum_bound(self):
        return self._tightest(1.0, 1.0)

    def to_dict(self):
        out = {
            "unit": self.unit,
            "constraints": [{"a1": a1, "a2": a2, "bound": b} for a1, a2, b in self.constraints],
        }
        if self.labels:
            for entry, label in zip(out["constraints"], self.labels):
                entry["label"] = label
        return out

    @classmethod
    def from_dict(cls, data):
        cons = [(c["a1"], c["a2"], c["bound"]) for c in data["constraints"]]
        labels = tuple(c["label"] for c in data["constraints"]) if all(
            "label" in c for c in data["constraints"]) and data["constraints"] else ()
        return cls(tuple(cons), data.get("unit", "nats"), labels)


def _mi(joint, x, y, z, unit):
    return cond_mutual_info(joint, x, y, z, unit=unit)


def cover_leung_region(dist: JointTable, unit="nats") -> RateConstraintSet:
    """Cover-Leung region of a law over ``(U, X1, X2, Y)``.

    Raises
    ------
    MacfbError
        If the inputs are not conditionally independent given ``U``.
    """
    dep = _mi(dist, "X1", "X2", "U", "nats")
    if dep > INDEPENDENCE_TOL:
        raise MacfbError(f"X1 and X2 are not independent given U (I = {dep:.3e} nats)")
    return RateConstraintSet(
        (
            (1, 0, _mi(dist, "X1", "Y", ("X2", "U"), unit)),
            (0, 1, _mi(dist, "X2", "Y", ("X1", "U"), unit)),
            (1, 1, _mi(dist, ("X1", "X2"), "Y", (), unit)),
        ),
        unit,
        ("I(X1;Y|X2U)", "I(X2;Y|X1U)", "I(X1X2;Y)"),
    )


def nofeedback_pentagon(dist: JointTable, unit="nats") -> RateConstraintSet:
    """Pentagon of a law over ``(X1, X2, Y)`` with independent inputs."""
    dep = _mi(dist, "X1", "X2", (), "nats")
    if dep > INDEPENDENCE_TOL:
        raise MacfbError(f"X1 and X2 are dependent (I = {dep:.3e} nats)")
    return RateConstraintSet(
        (
            (1, 0, _mi(dist, "X1", "Y", "X2", unit)),
            (0, 1, _mi(dist, "X2", "Y", "X1", unit)),
            (1, 1, _mi(dist, ("X1", "X2"), "Y", (), unit)),
        ),
        unit,
        ("I(X1;Y|X2)", "I(X2;Y|X1)", "I(X1X2;Y)"),
    )


def _checked_two_block(law, fb, tol):
    report = check_consistency(law, fb, tol)
    if not report.ok:
        raise ConsistencyError(
            f"feedback law is inconsistent: deviation {report.max_deviation:.3e} at (a, b) = {report.cell}",
            report.max_deviation,
            report.cell,
        )
    return build_two_block(law, fb)


def theorem1_region_5form(law: InputLaw, fb: FeedbackLaw, unit="nats", *, history=FULL_HISTORY,
                          tol=1e-8, joint=None) -> RateConstraintSet:
    """Five-constraint form of the two-block feedback region.

    Parameters
    ----------
    law, fb
        Input law and a feedback law consistent with it to within `tol`.
    history : sequence of str
        Previous-block variables standing for the shared state ``S~``.
        Defaults to ``(Ut, At, Bt, Yt)``; :data:`OUTPUT_HISTORY` keeps only
        the fed-back output.
    joint : JointTable, optional
        A precomputed ``build_two_block(law, fb)``; skips the consistency
        check.
    """
    j = _checked_two_block(law, fb, tol) if joint is None else joint
    s = tuple(history)
    common = _mi(j, "U", "Y", ("Ut", "Yt"), unit)
    return RateConstraintSet(
        (
            (1, 0, _mi(j, "X1", "Y", ("U", "A", "B", "X2"), unit)
             + _mi(j, "A", "Y", ("U", "B") + s + ("X2t",), unit) + common),
            (0, 1, _mi(j, "X2", "Y", ("U", "A", "B", "X1"), unit)
             + _mi(j, "B", "Y", ("U", "A") + s + ("X1t",), unit) + common),
            (1, 0, _mi(j, "X1", "Y", ("U", "B", "X2") + s + ("X2t",), unit)),
            (0, 1, _mi(j, "X2", "Y", ("U", "A", "X1") + s + ("X1t",), unit)),
            (1, 1, _mi(j, ("X1", "X2"), "Y", ("A", "B", "U"), unit)
             + _mi(j, ("A", "B"), "Y", ("U",) + s, unit) + common),
        ),
        unit,
        (
            "I(X1;Y|UABX2)+I(A;Y|UBS~X2~)+I(U;Y|U~Y~)",
            "I(X2;Y|UABX1)+I(B;Y|UAS~X1~)+I(U;Y|U~Y~)",
            "I(X1;Y|UBX2S~X2~)",
            "I(X2;Y|UAX1S~X1~)",
            "I(X1X2;Y|ABU)+I(AB;Y|US~)+I(U;Y|U~Y~)",
        ),
    )


def theorem1_region_3form(law: InputLaw, fb: FeedbackLaw, unit="nats", *, history=FULL_HISTORY,
                          tol=1e-8, joint=None) -> RateConstraintSet:
    """Three-constraint form of the two-block feedback region, with ``(.)^+`` penalties."""
    j = _checked_two_block(law, fb, tol) if joint is None else joint
    s = tuple(history)
    common = _mi(j, "U", "Y", ("Ut", "Yt"), unit)
    pen1 = _mi(j, "A", "X2", ("Y", "B", "U") + s + ("X2t",), unit) - common
    pen2 = _mi(j, "B", "X1", ("Y", "A", "U") + s + ("X1t",), unit) - common
    return RateConstraintSet(
        (
            (1, 0, _mi(j, "X1", "Y", ("X2", "B", "U") + s + ("X2t",), unit) - max(0.0, pen1)),
            (0, 1, _mi(j, "X2", "Y", ("X1", "A", "U") + s + ("X1t",), unit) - max(0.0, pen2)),
            (1, 1, _mi(j, ("X1", "X2"), "Y", ("U",) + s, unit) + common),
        ),
        unit,
        (
            "I(X1;Y|X2BUS~X2~)-(I(A;X2|YBUS~X2~)-I(U;Y|U~Y~))+",
            "I(X2;Y|X1AUS~X1~)-(I(B;X1|YAUS~X1~)-I(U;Y|U~Y~))+",
            "I(X1X2;Y|US~)+I(U;Y|U~Y~)",
        ),
    )


def theorem2_region(law: ExtendedInputLaw, fb: ExtendedFeedbackLaw, unit="nats", *, tol=1e-8,
                    joint=None) -> RateConstraintSet:
    """Five-constraint region of the two-pair extension."""
    if joint is None:
        report = check_consistency_extended(law, fb, tol)
        if not report.ok:
            raise ConsistencyError(
                f"extended feedback law is inconsistent: deviation {report.max_deviation:.3e} "
                f"at (a', b', a, b) = {report.cell}",
                report.max_deviation,
                report.cell,
            )
        joint = build_two_block_extended(law, fb)
    j = joint
    s = PREVIOUS_STATE
    common = _mi(j, "U", "Y", (), unit)
    return RateConstraintSet(
        (
            (1, 0, _mi(j, "X1", "Y", ("X2", "Bp", "B") + s + ("U",), unit)),
            (1, 0, _mi(j, "X1", "Y", ("X2", "Ap", "Bp", "A", "B") + s + ("U",), unit)
             + _mi(j, "Ap", "Y", ("Bp", "A", "B") + s + ("U",), unit)
             + _mi(j, "A", "Y", ("B",) + s + ("U",), unit) + common),
            (0, 1, _mi(j, "X2", "Y", ("X1", "Ap", "A") + s + ("U",), unit)),
            (0, 1, _mi(j, "X2", "Y", ("X1", "Ap", "Bp", "A", "B") + s + ("U",), unit)
             + _mi(j, "Bp", "Y", ("Ap", "A", "B") + s + ("U",), unit)
             + _mi(j, "B", "Y", ("A",) + s + ("U",), unit) + common),
            (1, 1, _mi(j, ("X1", "X2"), "Y", ("U",) + s, unit) + common),
        ),
        unit,
        (
            "I(X1;Y|X2B'BS~U)",
            "I(X1;Y|X2A'B'ABS~U)+I(A';Y|B'ABS~U)+I(A;Y|BS~U)+I(U;Y)",
            "I(X2;Y|X1A'AS~U)",
            "I(X2;Y|X1A'B'ABS~U)+I(B';Y|A'ABS~U)+I(B;Y|AS~U)+I(U;Y)",
            "I(X1X2;Y|US~)+I(U;Y)",
        ),
    )


def equal_rate_point(region: RateConstraintSet) -> float:
    """Largest ``r >= 0`` with ``(r, r)`` inside the region."""
    best = math.inf
    for a1, a2, b in region.constraints:
        w = a1 + a2
        if w > 0:
            best = min(best, b / w)
        elif b < 0:
            return 0.0
    if not region.constraints:
        return 0.0
    return max(0.0, best)


def contains(region: RateConstraintSet, p: RatePoint, slack=0.0) -> bool:
    """True when every constraint holds at `p` up to `slack`."""
    r1, r2 = (p.r1, p.r2) if isinstance(p, RatePoint) else p
    return all(a1 * r1 + a2 * r2 <= b + slack for a1, a2, b in region.constraints)


def boundary_trace(region: RateConstraintSet, n_points: int) -> list[RatePoint]:
    """Farthest region points along ``n_points`` rays spread over ``[0, pi/2]``.

    Rays along which the region is unbounded are returned as infinite
    coordinates on the axis of that ray.
    """
    if n_points < 2:
        raise MacfbError("n_points must be at least 2")
    points = []
    for theta in np.linspace(0.0, math.pi / 2, n_points):
        d1, d2 = math.cos(theta), math.sin(theta)
        # snap the endpoint rays so that cos(pi/2) does not leak 6e-17
        if theta == math.pi / 2:
            d1 = 0.0
        t = math.inf
        for a1, a2, b in region.constraints:
            proj = a1 * d1 + a2 * d2
            if proj > 0:
                t = min(t, b / proj)
            elif b < 0:
                t = 0.0
        t = max(0.0, t)
        points.append(RatePoint(t * d1 if d1 else 0.0, t * d2 if d2 else 0.0))
    return points
