"""Closed-form Gaussian specialisation.

Inputs are built as ``X1 = sqrt(aP) I1 + sqrt(bP) A + sqrt((1-a-b)P) U`` (and
symmetrically for ``X2``), with ``(A, B)`` unit-variance Gaussians of
correlation ``lam``.  Everything depends on ``P`` and ``sigma^2`` only through
``snr = P / sigma^2``.  Rates are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from macfb.consistency import GaussianGains, lambda_limit, solve_gaussian_gains
from macfb.errors import InfeasibleError, MacfbError
from macfb.regions import RateConstraintSet, equal_rate_point

#: Equal-rate points of the Gaussian feedback capacity region (reference values, bits).
FBCAP_REFERENCE = {0.5: 0.2834, 1.0: 0.4642, 5.0: 1.0241, 10.0: 1.2847, 100.0: 2.1439}

_FEASIBILITY_TOL = 1e-12


def cl_equal_rate(snr: float) -> float:
    """Equal-rate point of the Cover-Leung region, ``0.5 log2(2 sqrt(1 + snr) - 1)``."""
    if snr < 0:
        raise MacfbError(f"snr must be nonnegative, got {snr}")
    return 0.5 * math.log2(2 * math.sqrt(1 + snr) - 1)


@dataclass(frozen=True)
class AwgnConfig:
    """Power split ``(alpha, beta)`` and auxiliary correlation ``lam`` at a given snr."""

    snr: float
    alpha: float
    beta: float
    lam: float
    gains: GaussianGains = field(default=None, compare=False)

    def __post_init__(self):
        if not self.snr > 0:
            raise MacfbError(f"snr must be positive, got {self.snr}")
        if not self.alpha > 0 or self.beta < 0 or self.alpha + self.beta > 1 + _FEASIBILITY_TOL:
            raise MacfbError(
                f"need alpha > 0, beta >= 0, alpha + beta <= 1; got ({self.alpha}, {self.beta})")
        if self.lam < 0:
            raise MacfbError(f"lam must be nonnegative, got {self.lam}")
        if self.lam > lambda_limit(self.alpha, self.snr) + _FEASIBILITY_TOL:
            raise InfeasibleError(
                f"lam = {self.lam} exceeds alpha snr / (alpha snr + 1) = "
                f"{lambda_limit(self.alpha, self.snr)}; solve_gaussian_gains has no real root")
        if self.gains is None:
            object.__setattr__(self, "gains",
                               solve_gaussian_gains(self.alpha, self.beta, self.lam, self.snr))

    @property
    def common(self):
        """Power fraction ``1 - alpha - beta`` carried by the resolution layer."""
        return max(0.0, 1.0 - self.alpha - self.beta)


def rate_terms(cfg: AwgnConfig):
    """The three quantities ``(G, H, sum)`` of the Gaussian region, in bits.

    ``H`` is kept as its three separate log terms.
    """
    s, a, b, lam = cfg.snr, cfg.alpha, cfg.beta, cfg.lam
    c = cfg.common
    g = 0.5 * math.log2(1 + a * s + b * s * (1 + lam) / (a * s + 1))
    h = (
        0.5 * math.log2(1 + a * s)
        + 0.5 * math.log2(1 + 4 * c * s / (2 * (a + b + b * lam) * s + 1))
        + 0.5 * math.log2(1 + b * (1 + lam) * s / ((1 + 2 * a * s) * (1 + a * s)))
    )
    total = 0.5 * math.log2(1 + 2 * s * (1 + c + lam * b))
    return g, h, total


def theorem1_awgn_region(cfg: AwgnConfig) -> RateConstraintSet:
    """Symmetric Gaussian region: ``R1, R2 <= min(G, H)`` and the sum constraint."""
    g, h, total = rate_terms(cfg)
    single = min(g, h)
    return RateConstraintSet(
        ((1, 0, single), (0, 1, single), (1, 1, total)),
        "bits",
        ("min(G,H)", "min(G,H)", "sum"),
    )


def awgn_equal_rate(snr, alpha, beta, lam) -> float:
    """Equal-rate point of :func:`theorem1_awgn_region` at one parameter point."""
    return equal_rate_point(theorem1_awgn_region(AwgnConfig(snr, alpha, beta, lam)))


@dataclass(frozen=True)
class Table2Row:
    snr: float
    r_cl: float
    r_star: float
    r_fbcap_ref: float | None
    alpha: float
    beta: float
    lam: float


def table2_row(snr, spec=None) -> Table2Row:
    """Compare the Cover-Leung point, the optimised point, and the reference capacity point."""
    from macfb.search import maximize_awgn_equal_rate

    res = maximize_awgn_equal_rate(snr, spec)
    ref = FBCAP_REFERENCE.get(float(snr))
    p = res.best_params
    return Table2Row(float(snr), cl_equal_rate(snr), res.best_value, ref,
                     p["alpha"], p["beta"], p["lambda"])
