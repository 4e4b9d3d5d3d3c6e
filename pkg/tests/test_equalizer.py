import warnings

import numpy as np
import pytest

from fadesim.core import DomainError, SymbolFrame
from fadesim.equalizer import LmsConfig, lms_run, wiener_solution
from fadesim.modem import PskConfig, map_bits


def _qpsk(n, seed=0):
    bits = np.random.default_rng(seed).integers(0, 2, 2 * n)
    return map_bits(bits, PskConfig(4)).symbols


def _noise(n, var, seed=1):
    r = np.random.default_rng(seed)
    return np.sqrt(var / 2) * (r.standard_normal(n) + 1j * r.standard_normal(n))


@pytest.mark.parametrize("g, expected", [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)])
def test_single_tap_converges_to_inverse(g, expected):
    s = _qpsk(500)
    mu = 0.05 / g**2
    res = lms_run(SymbolFrame(g * s, 1.0), SymbolFrame(s, 1.0), LmsConfig(1, mu, 500))
    # y = conj(w) x, so the converged tap is conj(1/g); real here.
    assert abs(res.taps[0]) == pytest.approx(expected, rel=0.01)


def test_complex_gain_fixed_point():
    g = 0.7 * np.exp(0.4j)
    s = _qpsk(2000)
    res = lms_run(SymbolFrame(g * s, 1.0), SymbolFrame(s, 1.0), LmsConfig(1, 0.05, 2000))
    assert res.taps[0] == pytest.approx(np.conj(1 / g), rel=1e-3)


def test_frozen_adaptation():
    x = _qpsk(200) + _noise(200, 0.1)
    res = lms_run(SymbolFrame(x, 1.0), SymbolFrame(_qpsk(50), 1.0), LmsConfig(5, 0.0, 50))
    assert np.array_equal(res.taps, [0, 0, 1, 0, 0])
    assert np.allclose(res.equalized.symbols, x)


def test_training_longer_than_received():
    with pytest.raises(DomainError):
        lms_run(SymbolFrame(_qpsk(10), 1.0), SymbolFrame(_qpsk(20), 1.0), LmsConfig(1, 0.01, 5))


def test_config_invariants():
    for bad in (dict(num_taps=4), dict(num_taps=0), dict(step_size=-1.0), dict(training_len=-1),
                dict(training_len=10, training_period=10)):
        with pytest.raises(DomainError):
            LmsConfig(**bad)


def test_unstable_step_is_flagged():
    s = _qpsk(100)
    with pytest.warns(RuntimeWarning):
        lms_run(SymbolFrame(s, 1.0), SymbolFrame(s, 1.0), LmsConfig(5, 0.5, 100))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lms_run(SymbolFrame(s, 1.0), SymbolFrame(s, 1.0), LmsConfig(5, 0.01, 100))


def _two_tap_channel(n, h, noise_var, seed=0):
    s = _qpsk(n, seed)
    x = np.convolve(s, h)[:n] + _noise(n, noise_var, seed + 1)
    return s, x


def test_mse_trend_on_static_channel():
    s, x = _two_tap_channel(4000, [1.0, 0.5], 0.001)
    res = lms_run(SymbolFrame(x, 1.0), SymbolFrame(s, 1.0), LmsConfig(7, 0.01, 4000))
    ma = np.convolve(res.mse_curve, np.ones(100) / 100, mode="valid")
    assert ma[-1] < 0.1 * ma[0]
    blocks = ma[::400]
    assert np.all(np.diff(blocks) < 0.005)


def test_matches_wiener_mmse():
    h = np.array([1.0, 0.5])
    nv = 10 ** (-20 / 10)
    n = 40_000
    s, x = _two_tap_channel(n, h, nv, seed=8)
    res = lms_run(SymbolFrame(x, 1.0), SymbolFrame(s, 1.0), LmsConfig(7, 0.002, n))
    _, mmse = wiener_solution(h, nv, 7)
    residual = res.mse_curve[-10_000:].mean()
    assert 10 * np.log10(residual / mmse) < 3.0


def test_wiener_against_brute_force_statistics():
    # Sample-covariance estimate of the same Wiener-Hopf system.
    h = np.array([1.0, 0.5j])
    nv = 0.05
    n = 200_000
    s, x = _two_tap_channel(n, h, nv, seed=3)
    c = 3 // 2
    idx = np.arange(5, n - 5)
    U = np.stack([x[idx + c - k] for k in range(3)], axis=1)
    R = U.T @ U.conj() / idx.size
    p = U.T @ s[idx].conj() / idx.size
    w_emp = np.linalg.solve(R, p)
    w, mmse = wiener_solution(h, nv, 3)
    assert np.allclose(w, w_emp, atol=0.01)
    e = s[idx] - U @ w.conj()
    assert np.mean(np.abs(e) ** 2) == pytest.approx(mmse, rel=0.03)


def test_decision_directed_equals_genie_when_error_free():
    s, x = _two_tap_channel(3000, [1.0, 0.2], 0.001)
    cfg_dd = LmsConfig(5, 0.01, 300)
    genie = lms_run(SymbolFrame(x, 1.0), SymbolFrame(s, 1.0), LmsConfig(5, 0.01, 3000))
    dd = lms_run(SymbolFrame(x, 1.0), SymbolFrame(s[:300], 1.0), cfg_dd)
    assert np.allclose(dd.taps, genie.taps, atol=1e-12)


def test_pilot_blocks_track_rotation():
    n = 5000
    s = _qpsk(n)
    rot = np.exp(1j * 2 * np.pi * 0.002 * np.arange(n))
    cfg = LmsConfig(1, 0.3, 10, training_period=50)
    res = lms_run(SymbolFrame(s * rot, 1.0), SymbolFrame(s, 1.0), cfg)
    decided = np.exp(1j * np.pi / 2 * np.round(np.angle(res.equalized.symbols) / (np.pi / 2)))
    assert np.mean(np.abs(decided[200:] - s[200:]) > 1e-6) == 0.0
