import numpy as np
import pytest

from macfb.binary_mac import (
    CL_OPTIMUM,
    REFERENCE_OPTIMUM,
    BinaryMacParams,
    leading_order_entropy_forms,
    asymptotic_cl_sum_rate,
    asymptotic_sum_rate,
    build_binary_channel,
    closed_form_sum_rate,
    exact_entropy_forms,
    extrapolate_small_q,
    symmetric_sum_rate,
)
from macfb.errors import InfeasibleError, MacfbError
from macfb.regions import FULL_HISTORY


def test_channel_law():
    ch = build_binary_channel(0.1)
    assert ch.p[0, 0, 1] == 0 and ch.p[1, 0, 1] == 0.1 and ch.p[1, 1, 1] == pytest.approx(0.2)
    with pytest.raises(MacfbError):
        build_binary_channel(0.6)


def test_reference_point_coefficient():
    r = asymptotic_sum_rate(**REFERENCE_OPTIMUM)
    assert r.coefficient == pytest.approx(0.5132, abs=2e-3)
    assert r.accepted
    assert abs(r.two_point_coefficient - r.coefficient) < 1e-3
    assert r.closed_form_agrees


def test_cover_leung_point_coefficient():
    assert asymptotic_cl_sum_rate(**CL_OPTIMUM).coefficient == pytest.approx(0.4994, abs=2e-3)


def test_closed_forms_at_small_q():
    p = BinaryMacParams.solve(1e-4, **REFERENCE_OPTIMUM)
    closed, exact = leading_order_entropy_forms(p), exact_entropy_forms(p)
    assert closed.keys() == exact.keys()
    for k in closed:
        assert closed[k] == pytest.approx(exact[k], abs=1e-6), k
    rate, _ = symmetric_sum_rate(p)
    assert closed_form_sum_rate(p) == pytest.approx(rate, abs=1e-6)


def test_full_history_conditioning_collapses_the_rate():
    p = BinaryMacParams.solve(1e-4, **REFERENCE_OPTIMUM)
    full, _ = symmetric_sum_rate(p, FULL_HISTORY)
    out, _ = symmetric_sum_rate(p)
    assert full < 0.1 * out


def test_extrapolation_recovers_known_model():
    q = np.array([1e-3, 3e-4, 1e-4, 3e-5, 1e-5])
    rates = q * (0.42 + 0.3 * q * np.log(1 / q) - 2.0 * q)
    c0, resid, fit, two = extrapolate_small_q(q, rates)
    assert c0 == pytest.approx(0.42, abs=1e-10) and resid < 1e-10
    assert two == pytest.approx(0.42, abs=1e-4)


def test_invalid_parameters():
    with pytest.raises(MacfbError):
        BinaryMacParams.solve(1e-3, 1.2, 0.5, 0.5, 0.5, 0.5)
    with pytest.raises(InfeasibleError):
        BinaryMacParams(1e-3, 0.5, 0.5, 0.5, 0.5, 0.5, 0.6, 0.1)
