"""Shared generators of random laws for the test suite."""

import numpy as np
import pytest

from macfb.consistency import ExtendedFeedbackLaw, FeedbackLaw, induced_pab
from macfb.prob import ExtendedInputLaw, InputLaw


def random_kernel(rng, shape, floor=0.02):
    """Conditional law with the last axis as target, every entry at least ``floor``-ish."""
    p = rng.dirichlet(np.ones(shape[-1]), size=shape[:-1]) + floor
    return p / p.sum(axis=-1, keepdims=True)


def stationary_pab(p_u, px1, px2, ch, q_a, q_b):
    """The P_AB reproduced by the feedback kernels.

    The induced auxiliary law is linear in P_AB, so we assemble its 4x4
    transition matrix from point masses and take the stationary vector.
    """
    na, nb = px1.shape[1], px2.shape[1]
    m = np.empty((na * nb, na * nb))
    for k in range(na * nb):
        e = np.zeros(na * nb)
        e[k] = 1.0
        law = InputLaw.from_arrays(p_u, e.reshape(na, nb), px1, px2, ch)
        m[k] = induced_pab(law, FeedbackLaw.from_arrays(q_a, q_b)).ravel()
    w, v = np.linalg.eig(m.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    pi = np.clip(pi / pi.sum(), 0.0, None)
    return (pi / pi.sum()).reshape(na, nb)


def random_consistent_instance(rng, nu=2, na=2, nb=2, nx=2, ny=2):
    """A random (law, fb) pair whose feedback law is exactly consistent."""
    p_u = rng.dirichlet(np.ones(nu))
    px1 = random_kernel(rng, (nu, na, nx))
    px2 = random_kernel(rng, (nu, nb, nx))
    ch = random_kernel(rng, (nx, nx, ny))
    q_a = random_kernel(rng, (nu, na, nb, ny, nx, na))
    q_b = random_kernel(rng, (nu, na, nb, ny, nx, nb))
    pab = stationary_pab(p_u, px1, px2, ch, q_a, q_b)
    return InputLaw.from_arrays(p_u, pab, px1, px2, ch), FeedbackLaw.from_arrays(q_a, q_b)


def random_cl_instance(rng, nu=2, nx=2, ny=2):
    """A law with trivial auxiliaries, so that the feedback law is vacuous."""
    p_u = rng.dirichlet(np.ones(nu))
    px1 = random_kernel(rng, (nu, 1, nx))
    px2 = random_kernel(rng, (nu, 1, nx))
    ch = random_kernel(rng, (nx, nx, ny))
    law = InputLaw.from_arrays(p_u, [[1.0]], px1, px2, ch)
    one = np.ones((nu, 1, 1, ny, nx, 1))
    return law, FeedbackLaw.from_arrays(one, one)


def degenerate_extended_instance(rng, nx=2, ny=2):
    """Two-pair law with U, A', B', A, B all constant."""
    px1 = random_kernel(rng, (1, 1, 1, nx))
    px2 = random_kernel(rng, (1, 1, 1, nx))
    ch = random_kernel(rng, (nx, nx, ny))
    law = ExtendedInputLaw.from_arrays([1.0], np.ones((1, 1, 1, 1)), px1, px2, ch)
    fb = ExtendedFeedbackLaw.from_arrays(
        np.ones((1, 1, 1, ny, 1, 1)), np.ones((1, nx, 1, 1, 1, ny, 1, 1)),
        np.ones((1, 1, 1, ny, 1, 1)), np.ones((1, nx, 1, 1, 1, ny, 1, 1)))
    return law, fb


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
