"""Reference phase patterns the optimised attack is compared against."""

from __future__ import annotations

import numpy as np

__all__ = ["random_pattern", "mrt_pattern", "no_ris_snr"]


def random_pattern(N: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. phases uniform on ``[0, 2 pi)``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=N))


def mrt_pattern(h_breve_2) -> np.ndarray:
    """Co-phase the surface with UE 2's reflected channel.

    Raises
    ------
    ValueError
        If any entry of ``h_breve_2`` is exactly zero (phase undefined).
    """
    h = np.asarray(h_breve_2, dtype=complex)
    mag = np.abs(h)
    if np.any(mag == 0):
        raise ValueError("MRT pattern undefined for zero channel entries")
    return h / mag


def no_ris_snr(h_s_eff, noise_power: float):
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    return np.abs(h_s_eff) ** 2 / noise_power
