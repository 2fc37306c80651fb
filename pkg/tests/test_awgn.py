import math

import pytest

from macfb.awgn import (
    FBCAP_REFERENCE,
    AwgnConfig,
    awgn_equal_rate,
    cl_equal_rate,
    rate_terms,
    theorem1_awgn_region,
)
from macfb.errors import InfeasibleError, MacfbError
from macfb.search import maximize_awgn_equal_rate


@pytest.mark.parametrize("snr,expected", [(0.5, 0.2678), (1, 0.4353), (5, 0.9815), (10, 1.2470),
                                          (100, 2.1277)])
def test_cover_leung_values(snr, expected):
    assert cl_equal_rate(snr) == pytest.approx(expected, abs=1e-4)


def test_corner_sum_bound():
    for snr in (0.5, 3.0, 40.0):
        r = theorem1_awgn_region(AwgnConfig(snr, 1.0, 0.0, 0.0))
        assert r.sum_bound == pytest.approx(0.5 * math.log2(1 + 2 * snr), abs=1e-14)
        # a common layer adds coherent power to the sum
        r = theorem1_awgn_region(AwgnConfig(snr, 0.4, 0.0, 0.0))
        assert r.sum_bound == pytest.approx(0.5 * math.log2(1 + 2 * snr * 1.6), abs=1e-14)


def test_cover_leung_is_reached_at_corner():
    # with beta = lambda = 0 the region is the Cover-Leung one; its optimum over alpha is R_CL
    snr = 5.0
    best = max(awgn_equal_rate(snr, a / 1000, 0.0, 0.0) for a in range(1, 1001))
    assert best == pytest.approx(cl_equal_rate(snr), abs=1e-4)


def test_infeasible_lambda():
    with pytest.raises(InfeasibleError, match="solve_gaussian_gains"):
        AwgnConfig(1.0, 0.1, 0.3, 0.5)
    with pytest.raises(MacfbError):
        AwgnConfig(1.0, 0.8, 0.3, 0.0)


def test_rates_nonnegative():
    for a, b, lam in ((0.2, 0.5, 0.1), (1.0, 0.0, 0.0), (0.05, 0.9, 0.3)):
        assert all(v >= 0 for v in rate_terms(AwgnConfig(10.0, a, b, lam)))


def test_optimised_point_monotone_in_snr():
    vals = [maximize_awgn_equal_rate(s).best_value for s in (0.5, 1, 5, 10)]
    assert vals == sorted(vals)
    assert all(v <= FBCAP_REFERENCE[s] for v, s in zip(vals, (0.5, 1.0, 5.0, 10.0)))
