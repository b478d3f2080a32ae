import numpy as np
import pytest

from risattack.baselines import mrt_pattern, no_ris_snr, random_pattern
from risattack.channel import (FadingConfig, SystemGeometry, effective_channel, generate_realization,
                               matched_precoders, snr)


def test_random_unit_modulus_and_reproducible():
    a = random_pattern(30, np.random.default_rng(0))
    b = random_pattern(30, np.random.default_rng(0))
    assert np.array_equal(a, b)
    assert np.abs(a) == pytest.approx(np.ones(30), abs=1e-15)
    assert random_pattern(0, np.random.default_rng(0)).shape == (0,)
    with pytest.raises(ValueError):
        random_pattern(-1, np.random.default_rng(0))


def test_random_reflected_power():
    """Independent uniform phases make the reflected power average to ||h||^2."""
    rng = np.random.default_rng(1)
    hb = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    vals = [abs(np.vdot(hb, random_pattern(12, rng))) ** 2 for _ in range(20_000)]
    assert np.mean(vals) == pytest.approx(np.linalg.norm(hb) ** 2, rel=0.03)


def test_mrt_example():
    h2 = np.array([1 + 1j, 2.0])
    psi = mrt_pattern(h2)
    assert psi == pytest.approx([np.exp(1j * np.pi / 4), 1.0])
    assert np.vdot(h2, psi) == pytest.approx(np.sqrt(2) + 2)


def test_mrt_gain_is_l1_norm():
    rng = np.random.default_rng(2)
    h2 = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    assert np.vdot(h2, mrt_pattern(h2)) == pytest.approx(np.abs(h2).sum())


def test_mrt_zero_entry():
    with pytest.raises(ValueError):
        mrt_pattern([1.0, 0.0])


def test_no_ris():
    assert no_ris_snr(2.0, 0.5) == snr(2.0, 0.5) == 8.0
    with pytest.raises(ValueError):
        no_ris_snr(1.0, 0.0)


def _eff(N, seed, power=10 ** 1.5):
    geo = SystemGeometry(num_ris_elements=N)
    real = generate_realization(geo, FadingConfig(), np.random.default_rng(seed))
    return effective_channel(real, matched_precoders(real, power), 1e-7)


def test_no_ris_independent_of_N():
    assert no_ris_snr(_eff(2, 3).h_s[0], 1e-7) == no_ris_snr(_eff(30, 3).h_s[0], 1e-7)


def test_no_ris_level_order_of_magnitude():
    vals = [10 * np.log10(no_ris_snr(_eff(0, s).h_s[0], 1e-7)) for s in range(200)]
    assert abs(np.median(vals) - 11.3) <= 3.0


def test_mrt_above_no_ris_on_average():
    gains = []
    for s in range(200):
        eff = _eff(30, 100 + s)
        gains.append(eff.snr(mrt_pattern(eff.h_breve[1]))[0] / eff.snr(np.zeros(30))[0])
    assert np.mean(gains) > 1.0


def test_random_mean_nondecreasing_in_N():
    means = []
    for N in (2, 5, 10, 20, 30):
        vals = []
        for s in range(200):
            eff = _eff(N, 500 + s)
            vals.append(eff.snr(random_pattern(N, np.random.default_rng(s)))[0])
        means.append(np.mean(vals))
    assert all(b >= a for a, b in zip(means, means[1:]))
