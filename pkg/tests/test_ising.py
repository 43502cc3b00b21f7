import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinqip.chemsim.ising import (GROUND_ENTROPY_H0, IsingParams, default_grids, ising_hamiltonian,
                                   ising_scan, ising_thermal_state, magnetization_operator)


def brute_force(J, h, T):
    """Boltzmann sums over the eight classical configurations."""
    configs = list(itertools.product((1, -1), repeat=3))
    E = np.array([J * (a * b + b * c + a * c) + h * (a + b + c) for a, b, c in configs])
    m = np.array([sum(c) for c in configs], dtype=float)
    w = np.exp(-(E - E.min()) / T)
    p = w / w.sum()
    p_nz = p[p > 0]
    return p @ m, -np.sum(p_nz * np.log(p_nz))


def test_hamiltonian_is_diagonal_in_config_order():
    H = ising_hamiltonian(1.0, 0.3)
    configs = list(itertools.product((1, -1), repeat=3))
    E = [1.0 * (a * b + b * c + a * c) + 0.3 * (a + b + c) for a, b, c in configs]
    assert np.allclose(H, np.diag(E))
    assert np.allclose(np.diag(magnetization_operator()), [sum(c) for c in configs])


def test_full_scan_matches_brute_force():
    h, T = default_grids()
    scan = ising_scan(1.0, h, T)
    worst = 0.0
    for i, hv in enumerate(h):
        for k, Tv in enumerate(T):
            M, S = brute_force(1.0, hv, Tv)
            worst = max(worst, abs(scan.magnetization[i, k] - M), abs(scan.entropy[i, k] - S))
    assert worst <= 1e-10


def test_frustrated_ground_entropy():
    scan = ising_scan(1.0, [0.0], [1e-3])
    assert abs(scan.entropy[0, 0] - math.log(6)) <= 1e-6
    assert GROUND_ENTROPY_H0 == math.log(6)


def test_entropy_peaks_at_zero_field_at_low_temperature():
    h = np.linspace(-4, 4, 81)
    T = np.array([0.05, 0.1, 0.2])
    scan = ising_scan(1.0, h, T)
    for k in range(len(T)):
        assert h[np.argmax(scan.entropy[:, k])] == 0.0


@settings(max_examples=40, deadline=None)
@given(h=st.floats(-4, 4), T=st.floats(0.05, 5.0))
def test_magnetization_odd_in_field(h, T):
    a = ising_scan(1.0, [h, -h], [T])
    assert a.magnetization[0, 0] == pytest.approx(-a.magnetization[1, 0], abs=1e-12)
    assert a.entropy[0, 0] == pytest.approx(a.entropy[1, 0], abs=1e-12)


def test_thermal_state_is_normalised_coherent_state():
    psi = ising_thermal_state(IsingParams(1.0, 0.5, 0.7)).data
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        IsingParams(T=-0.1)
    with pytest.raises(ValueError):
        IsingParams(J=-1.0)
