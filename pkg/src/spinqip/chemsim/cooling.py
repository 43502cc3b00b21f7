"""Closed-form polarization bound for heat-bath algorithmic cooling."""
from __future__ import annotations

NEAR_GROUND = 1.0


def cooling_bound(eps_b: float, m: int) -> float:
    """Largest single-spin polarization reachable with ``m`` spins at bath bias ``eps_b``.

    Returns ``eps_b * 2**(m - 2)`` in the low-polarization regime ``eps_b <= 2**-m``
    and ``1.0`` above it, where the register can be cooled close to its ground state.
    """
    if not 0.0 < eps_b < 1.0:
        raise ValueError(f"eps_b must lie in (0, 1), got {eps_b}")
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m}")
    m = int(m)
    if eps_b <= 2.0**-m:
        return eps_b * 2.0 ** (m - 2)
    return NEAR_GROUND
