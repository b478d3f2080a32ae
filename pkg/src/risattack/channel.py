"""Channel generation, precoding and SNR evaluation for the RIS-assisted MISO downlink.

All randomness flows through an explicit ``numpy.random.Generator``; functions
here hold no state, so independent trials can run concurrently on their own
streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SNR_DB_FLOOR",
    "SystemGeometry",
    "FadingConfig",
    "ChannelRealization",
    "EffectiveChannel",
    "CsiErrorModel",
    "pathloss_linear",
    "steering_vector",
    "generate_realization",
    "matched_precoders",
    "random_precoders",
    "effective_channel",
    "snr",
    "snr_db",
    "draw_static_error",
    "split_estimate",
]

SNR_DB_FLOOR = -120.0


@dataclass(frozen=True)
class SystemGeometry:
    """Node positions in metres and array sizes.

    Defaults reproduce the two-UE layout used for the SNR-vs-N curves.
    """

    bs_position: tuple[float, float] = (10.0, 0.0)
    ris_position: tuple[float, float] = (50.0, 100.0)
    ue_positions: tuple[tuple[float, float], ...] = ((300.0, 0.0), (300.0, 50.0))
    reference_distance: float = 1.0
    num_bs_antennas: int = 4
    num_ris_elements: int = 0

    def __post_init__(self):
        object.__setattr__(self, "bs_position", tuple(float(v) for v in self.bs_position))
        object.__setattr__(self, "ris_position", tuple(float(v) for v in self.ris_position))
        object.__setattr__(self, "ue_positions", tuple(tuple(float(v) for v in p) for p in self.ue_positions))
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if self.num_ues < 1:
            out.append("need at least one UE")
        if self.num_bs_antennas < 1:
            out.append("num_bs_antennas must be >= 1")
        if self.num_ris_elements < 0:
            out.append("num_ris_elements must be >= 0")
        if self.reference_distance <= 0:
            out.append("reference_distance must be > 0")
        for name, pts in (("bs_position", [self.bs_position]), ("ris_position", [self.ris_position])):
            if any(len(p) != 2 for p in pts):
                out.append(f"{name} must be 2-D")
        if any(len(p) != 2 for p in self.ue_positions):
            out.append("ue_positions must be 2-D")
        if not out:
            links = [(self.bs_position, self.ris_position)]
            links += [(self.bs_position, u) for u in self.ue_positions]
            links += [(self.ris_position, u) for u in self.ue_positions]
            if any(_dist(a, b) <= 0 for a, b in links):
                out.append("all transmitter-receiver distances must be > 0")
        return out

    @property
    def num_ues(self) -> int:
        return len(self.ue_positions)


@dataclass(frozen=True)
class FadingConfig:
    """Large- and small-scale fading parameters.

    ``bs_ris_gain`` selects how the BS-RIS line-of-sight link is scaled:
    ``"unit"`` leaves it at 0 dB, ``"pathloss"`` applies the same distance law
    as the UE links.
    """

    rician_k_factor: float = 10.0
    noise_power: float = 1e-7
    pathloss_intercept: float = -30.0
    pathloss_exponent_db_per_decade: float = 20.0
    bs_ris_gain: str = "unit"

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not self.rician_k_factor >= 0:
            out.append("rician_k_factor must be >= 0")
        if not self.noise_power > 0:
            out.append("noise_power must be > 0")
        if self.bs_ris_gain not in ("unit", "pathloss"):
            out.append("bs_ris_gain must be 'unit' or 'pathloss'")
        return out


@dataclass
class ChannelRealization:
    h_s: np.ndarray  # (K, M) static BS->UE paths
    H_t: np.ndarray  # (M, N) BS->RIS
    h_r: np.ndarray  # (K, N) RIS->UE

    @property
    def num_ues(self) -> int:
        return self.h_s.shape[0]

    @property
    def num_elements(self) -> int:
        return self.H_t.shape[1]

    def cascaded(self, k: int, psi) -> np.ndarray:
        """Full MISO channel ``h_s,k + H_t diag(h_r,k) psi`` of UE ``k``."""
        return self.h_s[k] + self.H_t @ (self.h_r[k] * np.asarray(psi))


@dataclass
class EffectiveChannel:
    h_s: np.ndarray  # (K,) precoded static scalars
    h_breve: np.ndarray  # (K, N) reflected vectors, used as h_breve[k]^H psi
    noise_power: float

    @property
    def num_ues(self) -> int:
        return self.h_s.shape[0]

    @property
    def num_elements(self) -> int:
        return self.h_breve.shape[1]

    def total(self, psi, k: int | None = None):
        """Scalar channel ``h_s,k + h_breve_k^H psi`` (all UEs if ``k`` is None)."""
        psi = np.asarray(psi, dtype=complex)
        vals = self.h_s + self.h_breve.conj() @ psi
        return vals if k is None else vals[k]

    def snr(self, psi) -> np.ndarray:
        return np.abs(self.total(psi)) ** 2 / self.noise_power


@dataclass
class CsiErrorModel:
    eta: float
    epsilons: np.ndarray = field(repr=False)

    @classmethod
    def from_channel(cls, eta: float, h_s_eff) -> CsiErrorModel:
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {eta}")
        return cls(float(eta), float(eta) * np.abs(np.asarray(h_s_eff)))


def _dist(a, b) -> float:
    return float(np.hypot(b[0] - a[0], b[1] - a[1]))


def _azimuth(src, dst) -> float:
    return float(np.arctan2(dst[1] - src[1], dst[0] - src[0]))


def pathloss_linear(d, d0: float = 1.0, intercept_db: float = -30.0, slope_db: float = 20.0):
    """Linear power gain ``10^((intercept - slope log10(d/d0)) / 10)``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0) or d0 <= 0:
        raise ValueError("distances must be positive")
    out = 10.0 ** ((intercept_db - slope_db * np.log10(d / d0)) / 10.0)
    return float(out) if out.ndim == 0 else out


def steering_vector(num: int, azimuth: float) -> np.ndarray:
    """Half-wavelength ULA response along the x-axis, unit-modulus entries."""
    return np.exp(1j * np.pi * np.arange(num) * np.cos(azimuth))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_realization(geometry: SystemGeometry, fading: FadingConfig,
                         rng: np.random.Generator) -> ChannelRealization:
    """Draw one set of channels.

    Static paths are Ricean: a line-of-sight term ``e^{j phi} a_BS(theta_k)``
    toward the UE with a uniformly random common phase ``phi`` plus a Rayleigh
    term, mixed by the K-factor. The static paths are drawn first so that,
    for a given stream, they do not depend on the RIS size. ``H_t`` is a
    rank-one line-of-sight matrix and the RIS->UE links are Rayleigh.
    """
    K, M, N = geometry.num_ues, geometry.num_bs_antennas, geometry.num_ris_elements
    d0 = geometry.reference_distance
    pl = lambda d: pathloss_linear(d, d0, fading.pathloss_intercept,  # noqa: E731
                                   fading.pathloss_exponent_db_per_decade)
    bs, ris = geometry.bs_position, geometry.ris_position

    kappa = fading.rician_k_factor
    if np.isinf(kappa):
        w_los, w_nlos = 1.0, 0.0
    else:
        w_los, w_nlos = np.sqrt(kappa / (kappa + 1.0)), np.sqrt(1.0 / (kappa + 1.0))

    h_s = np.empty((K, M), dtype=complex)
    for k, ue in enumerate(geometry.ue_positions):
        phase = rng.uniform(0.0, 2 * np.pi)
        los = np.exp(1j * phase) * steering_vector(M, _azimuth(bs, ue))
        nlos = _cn(rng, M)
        h_s[k] = np.sqrt(pl(_dist(bs, ue))) * (w_los * los + w_nlos * nlos)

    beta_t = pl(_dist(bs, ris)) if fading.bs_ris_gain == "pathloss" else 1.0
    H_t = np.sqrt(beta_t) * np.outer(steering_vector(M, _azimuth(bs, ris)),
                                     steering_vector(N, _azimuth(ris, bs)))

    h_r = np.empty((K, N), dtype=complex)
    for k, ue in enumerate(geometry.ue_positions):
        h_r[k] = np.sqrt(pl(_dist(ris, ue))) * _cn(rng, N)
    return ChannelRealization(h_s, H_t, h_r)


def matched_precoders(realization: ChannelRealization, power: float = 1.0) -> np.ndarray:
    """``p_k = sqrt(power) conj(h_s,k) / ||h_s,k||``, so ``p_k^T h_s,k`` is real positive."""
    if power <= 0:
        raise ValueError("precoder power must be positive")
    h = realization.h_s
    norms = np.linalg.norm(h, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("zero static channel; matched precoder undefined")
    return np.sqrt(power) * h.conj() / norms


def random_precoders(num_antennas: int, num_ues: int, rng: np.random.Generator,
                     power: float = 1.0) -> np.ndarray:
    """Fixed random precoders with squared norm ``power``."""
    if power <= 0:
        raise ValueError("precoder power must be positive")
    p = _cn(rng, (num_ues, num_antennas))
    return np.sqrt(power) * p / np.linalg.norm(p, axis=1, keepdims=True)


def effective_channel(realization: ChannelRealization, precoders, noise_power: float) -> EffectiveChannel:
    p = np.atleast_2d(np.asarray(precoders, dtype=complex))
    K, M = realization.h_s.shape
    if p.shape != (K, M):
        raise ValueError(f"precoders must have shape {(K, M)}, got {p.shape}")
    if realization.H_t.shape[0] != M or realization.h_r.shape != (K, realization.H_t.shape[1]):
        raise ValueError("inconsistent realization dimensions")
    h_s = np.einsum("km,km->k", p, realization.h_s)
    rows = (p @ realization.H_t) * realization.h_r  # p_k^T H_t diag(h_r,k)
    return EffectiveChannel(h_s, rows.conj(), float(noise_power))


def snr(h, noise_power: float):
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    return np.abs(h) ** 2 / noise_power


def snr_db(h, noise_power: float, floor: float = SNR_DB_FLOOR):
    """SNR in dB, clamped below at ``floor`` so zero channels stay finite."""
    lin = np.asarray(snr(h, noise_power), dtype=float)
    with np.errstate(divide="ignore"):
        out = np.maximum(10.0 * np.log10(lin), floor)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x, floor: float = SNR_DB_FLOOR):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.maximum(10.0 * np.log10(x), floor)
    return float(out) if out.ndim == 0 else out


def draw_static_error(eps: float, rng: np.random.Generator) -> complex:
    """Uniform draw from the closed complex disk of radius ``eps``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return 0j
    r = eps * np.sqrt(rng.uniform())
    theta = rng.uniform(0.0, 2 * np.pi)
    # r <= eps holds exactly; cos/sin rounding can push |.| past eps by an ulp
    delta = complex(r * np.cos(theta), r * np.sin(theta))
    if abs(delta) > eps:
        delta *= eps / abs(delta)
    return delta


def split_estimate(h_true: complex, eps: float, rng: np.random.Generator) -> tuple[complex, complex]:
    """Return ``(estimate, error)`` with ``estimate + error == h_true``."""
    delta = draw_static_error(eps, rng)
    return complex(h_true) - delta, delta
