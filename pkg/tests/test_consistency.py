import math

import numpy as np
import pytest

from macfb.binary_mac import REFERENCE_OPTIMUM, BinaryMacParams, build_binary_feedback_law
from macfb.consistency import (
    binary_fixed_point_map,
    check_consistency,
    gain_residuals,
    gaussian_gain_roots,
    induced_pab,
    lambda_limit,
    solve_binary_xy,
    solve_gaussian_gains,
)
from macfb.errors import MacfbError, SingularSystemError
from macfb.prob import InputLaw, JointTable, build_two_block, marginalize
from conftest import random_consistent_instance


def test_random_instances_are_consistent(rng):
    for _ in range(10):
        law, fb = random_consistent_instance(rng)
        rep = check_consistency(law, fb)
        assert rep.ok and rep.max_deviation < 1e-12
        ab = marginalize(build_two_block(law, fb), ("A", "B"))
        assert np.allclose(ab.p, law.p_ab.p, atol=1e-12)


def test_perturbation_is_reported(rng):
    law, fb = random_consistent_instance(rng)
    delta = 1e-3
    pab = law.p_ab.p.copy()
    pab[0, 0] += delta
    pab[1, 1] -= delta
    bent = InputLaw(law.p_u, JointTable(law.p_ab.variables, pab), law.p_x1_given_ua,
                    law.p_x2_given_ub, law.channel)
    rep = check_consistency(bent, fb)
    assert not rep.ok
    # deviation is the perturbation plus its image through the kernel, so same order
    assert 0.1 * delta < rep.max_deviation < 3 * delta
    assert rep.cell in {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_gain_roots_solve_both_equations():
    for alpha in np.linspace(0.05, 1, 10):
        for snr in np.logspace(-1, 2, 10):
            for lam in np.linspace(0, 1, 10):
                roots = gaussian_gain_roots(alpha, 0.0, lam, snr)
                assert bool(roots) == (lam <= lambda_limit(alpha, snr))
                for g in roots:
                    assert max(map(abs, gain_residuals(g, alpha, lam, snr))) < 1e-12


def test_root_choice_prefers_positive_k1():
    g = solve_gaussian_gains(0.3, 0.3, 0.2, 5.0)
    assert g.k1 > 0
    assert g.k2 == max(r.k2 for r in gaussian_gain_roots(0.3, 0.3, 0.2, 5.0) if r.k1 > 0)
    assert solve_gaussian_gains(0.1, 0.3, 0.99, 1.0) is None


def test_gain_argument_checks():
    with pytest.raises(MacfbError):
        solve_gaussian_gains(0.0, 0.1, 0.1, 1.0)
    with pytest.raises(MacfbError):
        solve_gaussian_gains(0.7, 0.5, 0.1, 1.0)


def test_binary_solution_is_a_fixed_point():
    sol = solve_binary_xy(**REFERENCE_OPTIMUM)
    assert sol.valid and sol.residual < 1e-12
    fx, fy = binary_fixed_point_map(sol.x, sol.y, **REFERENCE_OPTIMUM)
    assert (fx, fy) == pytest.approx((sol.x, sol.y), abs=1e-12)


def test_binary_singular_system():
    with pytest.raises(SingularSystemError):
        solve_binary_xy(0.5, 0.0, 1.0, 1.0, 0.0)


def test_binary_consistency_holds_to_first_order():
    devs = []
    for q in (1e-3, 1e-4):
        law, fb = build_binary_feedback_law(BinaryMacParams.solve(q, **REFERENCE_OPTIMUM))
        devs.append(check_consistency(law, fb, tol=1.0).max_deviation)
    assert devs[1] == pytest.approx(devs[0] / 10, rel=1e-3)


def test_induced_law_is_a_distribution(rng):
    law, fb = random_consistent_instance(rng, na=3, nb=2)
    ind = induced_pab(law, fb)
    assert ind.shape == (3, 2) and ind.sum() == pytest.approx(1.0)
