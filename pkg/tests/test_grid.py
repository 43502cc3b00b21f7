import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from spinqip.grid import GridRegister, apply_qft, apply_qft_dagger, dense_hamiltonian, multi_dof_evolve, qft


def test_qft_matrix_is_unitary_dft():
    m = 4
    F = qft(m)
    N = 2**m
    k = np.arange(N)
    ref = np.exp(2j * np.pi * np.outer(k, k) / N) / math.sqrt(N)
    assert np.allclose(F, ref)
    assert np.allclose(F.conj().T @ F, np.eye(N))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 7))
def test_fft_path_matches_qft_matrix(seed, m):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2**m) + 1j * rng.normal(size=2**m)
    assert np.allclose(apply_qft(psi), qft(m) @ psi, atol=1e-12)
    assert np.allclose(apply_qft_dagger(apply_qft(psi)), psi, atol=1e-12)


def harmonic(x):
    return 0.5 * x**2


def test_harmonic_oscillator_mean_position():
    reg = GridRegister.gaussian(8, -10.0, 10.0, [1.0], [1.0])
    dt, chunk = 1e-3, 100
    worst = 0.0
    for k in range(1, 64):
        reg = multi_dof_evolve(reg, harmonic, 1.0, dt, chunk)
        t = k * chunk * dt
        worst = max(worst, abs(reg.mean_position() - math.cos(t)))
    assert worst <= 1e-3


def test_norm_drift_per_step():
    reg = GridRegister.gaussian(8, -10.0, 10.0, [1.0], [1.0])
    steps = 1000
    out = multi_dof_evolve(reg, harmonic, 1.0, 1e-3, steps)
    assert abs(np.linalg.norm(out.amplitudes) - 1.0) / steps <= 1e-12


def test_two_dof_coupled_matches_dense_propagator():
    def V(x1, x2):
        return 0.5 * x1**2 + 0.5 * x2**2 + 0.3 * x1 * x2

    reg = GridRegister.gaussian(4, -6.0, 6.0, [1.0, -0.5], [1.0, 1.0])
    t, dt = 0.05, 1e-5
    split = multi_dof_evolve(reg, V, [1.0, 1.0], dt, int(round(t / dt)))
    exact = expm(-1j * dense_hamiltonian(reg, V, [1.0, 1.0]) * t) @ reg.amplitudes
    assert np.linalg.norm(split.amplitudes - exact) <= 1e-6


def test_free_particle_momentum_conserved():
    reg = GridRegister.gaussian(8, -20.0, 20.0, [0.0], [2.0], momenta=[1.5])
    out = multi_dof_evolve(reg, lambda x: 0.0 * x, 1.0, 0.01, 200)
    assert out.mean_momentum() == pytest.approx(reg.mean_momentum(), abs=1e-10)
    assert out.mean_position() == pytest.approx(reg.mean_position() + 1.5 * 2.0, abs=1e-3)


def test_register_validation():
    with pytest.raises(ValueError):
        GridRegister(3, 1, 0.0, 1.0, np.ones(8))
    with pytest.raises(ValueError):
        GridRegister(3, 1, 1.0, 0.0, np.ones(8) / math.sqrt(8))
