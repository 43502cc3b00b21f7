import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from spinqip.chemsim.adiabatic import adiabatic_evolve, random_ising_problem, transverse_field
from spinqip.chemsim.cooling import NEAR_GROUND, cooling_bound
from spinqip.core import pauli


def continuous_oracle(H_A, H_P, tau):
    psi0 = np.linalg.eigh(H_A)[1][:, 0].astype(complex)
    sol = solve_ivp(lambda t, y: -1j * (((1 - t / tau) * H_A + (t / tau) * H_P) @ y), (0, tau), psi0,
                    method="DOP853", rtol=1e-11, atol=1e-13)
    return sol.y[:, -1]


@pytest.mark.parametrize("tau", [0.5, 3.0, 10.0])
def test_matches_continuous_time_solution(tau):
    rng = np.random.default_rng(2)
    H_A, H_P = transverse_field(3), random_ising_problem(3, rng)
    res = adiabatic_evolve(H_A, H_P, tau, 2000)
    psi = continuous_oracle(H_A, H_P, tau)
    ground = np.argmin(np.diag(H_P).real)
    assert res.overlap == pytest.approx(abs(psi[ground]) ** 2, abs=1e-5)


def test_landau_zener_limits():
    H_A, H_P = -pauli("X"), -pauli("Z")
    assert adiabatic_evolve(H_A, H_P, 0.0, 10).overlap == pytest.approx(0.5)
    slow = [adiabatic_evolve(H_A, H_P, tau, max(200, int(20 * tau))).overlap for tau in (1, 3, 10, 30, 100)]
    assert all(b >= a for a, b in zip(slow, slow[1:]))
    assert slow[-1] > 0.9999
    assert adiabatic_evolve(H_A, H_P, 1.0, 50).min_gap == pytest.approx(math.sqrt(2), rel=1e-3)


def test_degenerate_start_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        adiabatic_evolve(np.diag([0.0, 0.0, 1.0, 2.0]), np.diag([1.0, 0.0, 2.0, 3.0]), 1.0, 5)


@pytest.mark.parametrize("m", range(2, 9))
def test_cooling_bound_low_polarization(m):
    for k in range(m, m + 6):
        eps_b = 2.0**-k
        assert cooling_bound(eps_b, m) == eps_b * 2 ** (m - 2)
    assert cooling_bound(0.3 * 2.0**-m, m) == 0.3 * 2.0**-m * 2 ** (m - 2)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(2, 12), eps_b=st.floats(1e-9, 0.999))
def test_cooling_bound_regimes(m, eps_b):
    out = cooling_bound(eps_b, m)
    if eps_b <= 2.0**-m:
        assert out == eps_b * 2 ** (m - 2) and out <= 0.25
    else:
        assert out == NEAR_GROUND


def test_cooling_bound_domain():
    for bad in [(0.0, 3), (1.0, 3), (0.1, 1), (0.1, 2.5)]:
        with pytest.raises(ValueError):
            cooling_bound(*bad)
