"""Closed-form destructive phases for constant-magnitude reflected channels.

When every element of the reflected channel has the same magnitude ``rho``,
choosing ``angle(psi_n) = angle(h_s) + angle(h_breve_n) + (n - (N+1)/2) xi + pi``
turns the reflected sum into ``-rho D_N(xi) e^{j angle(h_s)}`` with ``D_N`` the
Dirichlet ratio, so the received magnitude is ``| |h_s| - rho D_N(xi) |``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LosInstance", "dirichlet_ratio", "lemma1_pattern", "lemma1_best", "cascaded_magnitude"]


@dataclass(frozen=True)
class LosInstance:
    h_s_mag: float
    h_s_phase: float
    rho_r: float
    element_phases: tuple[float, ...]
    noise_power: float = 1.0

    def __post_init__(self):
        if self.rho_r < 0 or self.h_s_mag < 0:
            raise ValueError("magnitudes must be nonnegative")
        object.__setattr__(self, "element_phases", tuple(float(p) for p in self.element_phases))

    @property
    def num_elements(self) -> int:
        return len(self.element_phases)

    @property
    def h_s(self) -> complex:
        return self.h_s_mag * np.exp(1j * self.h_s_phase)

    @property
    def h_breve(self) -> np.ndarray:
        return self.rho_r * np.exp(1j * np.asarray(self.element_phases))


def dirichlet_ratio(N: int, xi):
    """``sin(N xi / 2) / sin(xi / 2)``, continuous at multiples of ``2 pi``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    xi = np.asarray(xi, dtype=float)
    half = xi / 2.0
    den = np.sin(half)
    # near xi = 2 pi m the ratio tends to N cos(N pi m) / cos(pi m)
    m = np.round(xi / (2 * np.pi))
    limit = N * np.cos(N * np.pi * m) / np.cos(np.pi * m)
    small = np.abs(den) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, limit, np.sin(N * half) / np.where(small, 1.0, den))
    return float(out) if out.ndim == 0 else out


def lemma1_pattern(instance: LosInstance, xi: float) -> np.ndarray:
    N = instance.num_elements
    n = np.arange(1, N + 1)
    phases = instance.h_s_phase + np.asarray(instance.element_phases) + (n - (N + 1) / 2.0) * xi + np.pi
    return np.exp(1j * phases)


def cascaded_magnitude(instance: LosInstance, psi) -> float:
    """Direct evaluation of ``|h_s + h_breve^H psi|``."""
    return float(abs(instance.h_s + np.vdot(instance.h_breve, psi)))


def lemma1_best(instance: LosInstance, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Best Dirichlet offset ``xi`` and the resulting linear SNR.

    If ``|h_s| >= N rho`` the reflected array cannot overcome the static path and
    ``xi = 0`` (full anti-alignment) is optimal. Otherwise ``rho D_N(xi) = |h_s|``
    has a root in the first lobe ``(0, 2 pi / N)``, located by bisection, where
    the received signal vanishes.
    """
    N, rho, hs = instance.num_elements, instance.rho_r, instance.h_s_mag
    if N == 0:
        return 0.0, hs ** 2 / instance.noise_power
    if hs >= N * rho:
        return 0.0, (hs - N * rho) ** 2 / instance.noise_power

    f = lambda x: rho * dirichlet_ratio(N, x) - hs  # noqa: E731
    lo, hi = 0.0, 2 * np.pi / N
    scale = max(1.0, hs)
    xi = hi
    for _ in range(max_iter):
        xi = 0.5 * (lo + hi)
        val = f(xi)
        if abs(val) <= tol * scale:
            break
        if val > 0:
            lo = xi
        else:
            hi = xi
    mag = hs - rho * dirichlet_ratio(N, xi)
    return float(xi), float(mag ** 2 / instance.noise_power)
