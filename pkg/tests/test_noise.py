import math

import numpy as np
import pytest

from spinqip.decoupling import benchmark, build_sequence, cpmg, free, udd
from spinqip.noise import NoiseModel, dephasing_trajectories, gaussian_phase_variance, phase_variance


def test_noiseless_coherence_is_one():
    curve = dephasing_trajectories(udd(4, 1.0), NoiseModel(sigma=0.0), 10)
    assert np.allclose(curve.W, 1.0)


def test_seeded_determinism():
    noise = NoiseModel("ornstein-uhlenbeck", 5.0, 0.3, seed=11)
    a = dephasing_trajectories(cpmg(4, 1.0), noise, 200, [0.5, 1.0])
    b = dephasing_trajectories(cpmg(4, 1.0), noise, 200, [0.5, 1.0])
    assert np.array_equal(a.W, b.W) and np.array_equal(a.stderr, b.stderr)
    c = dephasing_trajectories(cpmg(4, 1.0), NoiseModel("ornstein-uhlenbeck", 5.0, 0.3, seed=12), 200, [1.0])
    assert c.W[0] != a.W[1]


def test_quasi_static_free_decay_is_gaussian():
    # tau_c >> T: W(t) = exp(-sigma^2 t^2 / 2)
    sigma = 2.0
    noise = NoiseModel("ornstein-uhlenbeck", sigma, 1e6, seed=3)
    t = np.array([0.25, 0.5, 1.0])
    curve = dephasing_trajectories(free(1.0), noise, 4000, t)
    assert np.all(np.abs(curve.W - np.exp(-0.5 * sigma**2 * t**2)) <= 4 * curve.stderr + 1e-3)


def test_exact_variance_agrees_with_grid_quadrature():
    # the midpoint rule converges to the closed form, at first order across the sign jumps
    noise = NoiseModel("ornstein-uhlenbeck", 3.0, 0.5)
    for seq in (free(1.0), cpmg(3, 1.0), udd(2, 1.0)):
        exact = gaussian_phase_variance(seq, noise)
        coarse = phase_variance(seq, noise.correlation, n_grid=1000)
        fine = phase_variance(seq, noise.correlation, n_grid=4000)
        assert fine == pytest.approx(exact, rel=1e-3)
        assert abs(fine - exact) <= abs(coarse - exact) + 1e-12


def test_hard_cutoff_variance_high_precision():
    # 50-digit evaluation of the same double integrals (mpmath), frozen
    noise = NoiseModel("hard-cutoff", 3.0, 0.5)
    assert gaussian_phase_variance(udd(6, 1.0), noise) == pytest.approx(3.0883420412573415e-10, rel=1e-3)
    assert gaussian_phase_variance(free(1.0), noise) == pytest.approx(8.076056, rel=1e-6)


@pytest.mark.parametrize("kind,sigma,tau_c", [("ornstein-uhlenbeck", 3.0, 0.5), ("hard-cutoff", 3.0, 0.5)])
def test_monte_carlo_matches_gaussian_prediction(kind, sigma, tau_c):
    noise = NoiseModel(kind, sigma, tau_c, seed=5, grid_steps=512, n_modes=256)
    for seq in (free(1.0), cpmg(4, 1.0), udd(4, 1.0)):
        curve = dephasing_trajectories(seq, noise, 3000)
        W = math.exp(-0.5 * gaussian_phase_variance(seq, noise))
        assert abs(curve.W[0] - W) <= 4 * curve.stderr[0] + 2e-3


def test_cpmg_best_for_low_frequency_noise():
    noise = NoiseModel("ornstein-uhlenbeck", 12.0, 100.0, seed=7)
    seqs = [build_sequence(n, 6, 1.0) for n in ("free", "cpmg", "udd")]
    table = benchmark(seqs, noise, [1.0], n_traj=2000)
    W = {n: table.curve(n)[0] for n in table.names}
    assert W["cpmg6"] > W["udd6"] > W["free"]


def test_udd_advantage_grows_with_cutoff_sharpness():
    seqs = [cpmg(6, 1.0), udd(6, 1.0)]
    adv = {}
    for kind in ("ornstein-uhlenbeck", "hard-cutoff"):
        noise = NoiseModel(kind, 3.0, 0.5, seed=7, grid_steps=512, n_modes=64)
        table = benchmark(seqs, noise, [1.0], n_traj=2000)
        W_c, W_u = table.curve("cpmg6")[0], table.curve("udd6")[0]
        adv[kind] = math.log(W_c) / math.log(W_u)
    assert adv["hard-cutoff"] > 10 * adv["ornstein-uhlenbeck"]
    assert adv["hard-cutoff"] > 1.0


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel("pink")
    with pytest.raises(ValueError):
        NoiseModel(sigma=-1.0)
