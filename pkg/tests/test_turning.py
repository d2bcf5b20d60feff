import math

import numpy as np
import pytest

import zswkb as z
from zswkb.errors import Collision

from conftest import rng

ATANH_HALF = math.atanh(0.5)


def test_monotone_real_roots(tanh_problem):
    pair = z.find_turning_points(tanh_problem, 1.0)
    assert pair.alpha == pytest.approx(-ATANH_HALF, abs=1e-10)
    assert pair.beta == pytest.approx(ATANH_HALF, abs=1e-10)
    assert pair.residual_alpha < 1e-12 * max(1.0, abs(pair.lam) ** 2)
    assert pair.residual_beta < 1e-12 * max(1.0, abs(pair.lam) ** 2)


def test_well_bottom_collision(well_problem):
    # lambda equals the well floor min A = 1: the pair merges at the origin
    with pytest.raises(Collision):
        z.find_turning_points(well_problem, 1.0)


def test_perturbed_pair_is_conjugate_reflected(well_problem):
    p = well_problem.with_(eps=0.05)
    pair = z.find_turning_points(p, 1.5)
    assert abs(pair.beta + pair.alpha.conjugate()) < 1e-10
    assert pair.residual_alpha < 1e-12 * max(1.0, abs(pair.lam) ** 2)
    assert pair.residual_beta < 1e-12 * max(1.0, abs(pair.lam) ** 2)
    assert pair.alpha.real < pair.beta.real


def test_real_lambda_keeps_real_roots(tanh_problem):
    pair = z.find_turning_points(tanh_problem, 1.15)
    assert abs(pair.alpha.imag) < 1e-12
    assert abs(pair.beta.imag) < 1e-12


def test_continuation_idempotent(tanh_problem):
    a, b = z.continue_in_window(tanh_problem, [1.0, 1.0])
    assert a.alpha == pytest.approx(b.alpha, abs=1e-12)
    assert a.beta == pytest.approx(b.beta, abs=1e-12)


def test_continuation_monotone_path(tanh_problem):
    lams = np.linspace(1.2, 1.8, 25)
    prob = tanh_problem.with_(delta=0.9)  # widen the window admission
    pairs = z.continue_in_window(prob, lams)
    alphas = np.array([p.alpha.real for p in pairs])
    betas = np.array([p.beta.real for p in pairs])
    assert np.all(np.diff(alphas) < 0)
    assert np.all(np.diff(betas) > 0)
    # closed form: -atanh(lam/2) and +atanh(lam/2)
    for lam, p in zip(lams, pairs):
        assert p.alpha == pytest.approx(-math.atanh(lam / 2.0), abs=1e-10)


def test_continuation_small_circle_returns(well_problem):
    lam0 = 1.5
    angles = np.linspace(0.0, 2 * np.pi, 41)
    path = [lam0 + 0.05 * np.exp(1j * a) for a in angles]
    pairs = z.continue_in_window(well_problem, path)
    assert abs(pairs[0].alpha - pairs[-1].alpha) < 1e-10
    assert abs(pairs[0].beta - pairs[-1].beta) < 1e-10


def test_continuation_rejects_coarse_path(well_problem):
    with pytest.raises(ValueError):
        z.continue_in_window(well_problem, [1.4, 1.7])


def test_schwarz_pair_property(well_problem):
    # alpha_eps(conj lam) = -conj(beta_eps(lam)) under A even / B odd
    p = well_problem.with_(eps=0.05)
    r = rng(3)
    for _ in range(5):
        lam = complex(r.uniform(1.4, 1.6), r.uniform(-0.05, 0.05))
        pair = z.find_turning_points(p, lam)
        pair_c = z.find_turning_points(p, lam.conjugate())
        assert abs(pair_c.alpha + pair.beta.conjugate()) < 1e-10
        assert abs(pair_c.beta + pair.alpha.conjugate()) < 1e-10


def test_eps_to_zero_linear_rate(well_problem):
    lam = 1.55
    base = z.find_turning_points(well_problem, lam)
    eps_values = [1e-2, 1e-3, 1e-4]
    dists = []
    for eps in eps_values:
        p= well_problem.with_(eps=eps)
        pair = z.find_turning_points(p, lam)
        dists.append(abs(pair.alpha - base.alpha))
    slope = np.polyfit(np.log(eps_values), np.log(dists), 1)[0]
    assert slope >= 0.9
