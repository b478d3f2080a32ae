import numpy as np

from risattack.channel import FadingConfig, SystemGeometry, effective_channel, generate_realization, matched_precoders
from risattack.conic import Cone

POWER = 10 ** 1.5


def instance_from_model(N, seed, power=POWER):
    """Effective channel of one draw from the default two-UE scenario."""
    geo = SystemGeometry(num_ris_elements=N)
    fading = FadingConfig()
    real = generate_realization(geo, fading, np.random.default_rng(seed))
    return effective_channel(real, matched_precoders(real, power), fading.noise_power)


def psd2_margin(block, x):
    """``u v - |w|^2`` of a rotated-cone block, i.e. the 2x2 determinant."""
    v = block.A @ x + block.b
    return v[0] * v[1] - v[2:] @ v[2:]


def block_violation(block, x):
    """Distance-like violation of ``A x + b in cone``, relative for quadratic cones."""
    v = block.A @ x + block.b
    if block.cone is Cone.ZERO:
        return float(np.max(np.abs(v), initial=0.0))
    if block.cone is Cone.NONNEG:
        return float(max(-np.min(v, initial=0.0), 0.0))
    if block.cone is Cone.SOC:
        return float(max(np.linalg.norm(v[1:]) - v[0], 0.0))
    w2 = v[2:] @ v[2:]
    det = (w2 - v[0] * v[1]) / max(1.0, abs(v[0] * v[1]), w2)
    return float(max(-v[0], -v[1], det, 0.0))
