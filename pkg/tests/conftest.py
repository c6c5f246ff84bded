import numpy as np


def underdamped_error(t, k1: float, k2: float, e0: float, v0: float) -> np.ndarray:
    """Analytic solution of e_dd + k1 e_d + k2 e = 0 with e(0)=e0, e_d(0)=v0
    (underdamped branch, k2 > (k1/2)^2)."""
    sigma = k1 / 2.0
    omega_sq = k2 - sigma * sigma
    assert omega_sq > 0.0, "oracle only covers the underdamped case"
    omega = np.sqrt(omega_sq)
    t = np.asarray(t, dtype=float)
    return np.exp(-sigma * t) * (
        e0 * np.cos(omega * t) + (v0 + sigma * e0) / omega * np.sin(omega * t)
    )
