"""Symbol-spaced complex LMS equalizer, trained then decision-directed."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .core import DomainError, SymbolFrame, power
from .modem import PskConfig


@dataclass(frozen=True)
class LmsConfig:
    num_taps: int = 5
    step_size: float = 0.05
    training_len: int = 200
    reference_delay_symbols: int = 0
    # 0: train once at the start. >0: a block of training_len known symbols
    # opens every training_period symbols (pilot blocks).
    training_period: int = 0

    def __post_init__(self):
        if self.num_taps < 1 or self.num_taps % 2 == 0:
            raise DomainError("num_taps must be an odd integer >= 1")
        if not self.step_size >= 0:
            raise DomainError("step_size must be >= 0")
        if self.training_len < 0 or self.reference_delay_symbols < 0:
            raise DomainError("training_len and reference_delay_symbols must be >= 0")
        if self.training_period < 0 or 0 < self.training_period <= self.training_len:
            raise DomainError("training_period must be 0 or greater than training_len")

    def is_training(self, index: np.ndarray) -> np.ndarray:
        """Which reference indices are served from the training frame."""
        index = np.asarray(index)
        if self.training_period:
            return (index >= 0) & (index % self.training_period < self.training_len)
        return (index >= 0) & (index < self.training_len)

    def stable_step_bound(self, input_power: float) -> float:
        return 2.0 / (self.num_taps * input_power)


class LmsResult(NamedTuple):
    equalized: SymbolFrame
    taps: np.ndarray
    mse_curve: np.ndarray


@numba.njit(cache=True)
def _lms_kernel(x, train, train_len, period, delay, num_taps, mu, order_m, phase_offset, w):
    n = x.size
    c = num_taps // 2
    y_out = np.empty(n, dtype=np.complex128)
    mse = np.empty(n, dtype=np.float64)
    u = np.zeros(num_taps, dtype=np.complex128)
    two_pi = 2.0 * np.pi
    for i in range(n):
        # u[k] = x[i + c - k], zero outside the frame
        for k in range(num_taps):
            j = i + c - k
            u[k] = x[j] if 0 <= j < n else 0.0
        y = 0.0 + 0.0j
        for k in range(num_taps):
            y += np.conj(w[k]) * u[k]
        ref = i - delay
        in_block = (ref % period < train_len) if period > 0 else (ref < train_len)
        if 0 <= ref < train.size and in_block:
            d = train[ref]
        else:
            s = (np.angle(y) - phase_offset) * order_m / two_pi
            idx = np.floor(s + 0.5) % order_m
            d = np.exp(1j * (two_pi * idx / order_m + phase_offset))
        e = d - y
        for k in range(num_taps):
            w[k] += mu * np.conj(e) * u[k]
        y_out[i] = y
        mse[i] = e.real * e.real + e.imag * e.imag
    return y_out, mse


def lms_run(
    received: SymbolFrame,
    training: SymbolFrame,
    cfg: LmsConfig,
    psk: PskConfig | None = None,
) -> LmsResult:
    """Equalize ``received`` with ``y[n] = w^H u[n]``, ``w += mu * conj(e) * u``.

    The first ``cfg.training_len`` references (shifted by
    ``reference_delay_symbols``) come from ``training``; afterwards the
    reference is the hard decision of ``psk``. With ``training_period``
    set, every period re-opens a training block, read from ``training``
    at the same index, so ``training`` must then cover those positions.
    Taps start as a centered unit impulse.
    """
    if len(training) > len(received):
        raise DomainError("training frame is longer than the received frame")
    if cfg.training_period == 0 and cfg.training_len > len(training):
        raise DomainError(
            f"training_len={cfg.training_len} exceeds the {len(training)} training symbols supplied"
        )
    psk = psk or PskConfig(4)
    x = np.ascontiguousarray(received.symbols)
    p_in = power(x) if x.size else 0.0
    if p_in > 0 and cfg.step_size >= cfg.stable_step_bound(p_in):
        warnings.warn(
            f"step_size {cfg.step_size} exceeds the LMS stability guideline "
            f"{cfg.stable_step_bound(p_in):.4g}",
            RuntimeWarning,
            stacklevel=2,
        )
    w = np.zeros(cfg.num_taps, dtype=np.complex128)
    w[cfg.num_taps // 2] = 1.0
    y, mse = _lms_kernel(
        x,
        np.ascontiguousarray(training.symbols),
        cfg.training_len,
        cfg.training_period,
        cfg.reference_delay_symbols,
        cfg.num_taps,
        float(cfg.step_size),
        psk.order_m,
        float(psk.phase_offset_rad),
        w,
    )
    return LmsResult(SymbolFrame(y, received.symbol_rate_hz), w, mse)


def wiener_solution(channel: np.ndarray, noise_var: float, num_taps: int, delay: int = 0):
    """Optimal taps and MMSE for unit-power i.i.d. symbols through an FIR channel.

    Same regressor and ``w^H u`` convention as :func:`lms_run`; the target
    is the transmitted symbol ``delay`` positions behind the center tap.
    """
    h = np.asarray(channel, dtype=np.complex128)
    c = num_taps // 2
    # u[k] = x[n + c - k] = sum_l h[l] s[n + c - k - l] + v; express in s[n - m].
    lo = -c
    hi = num_taps - 1 - c + h.size - 1
    H = np.zeros((num_taps, hi - lo + 1), dtype=np.complex128)
    for k in range(num_taps):
        for l, hl in enumerate(h):
            H[k, k + l - c - lo] = hl
    R = H @ H.conj().T + noise_var * np.eye(num_taps)
    target = np.zeros(hi - lo + 1, dtype=np.complex128)
    target[delay - lo] = 1.0
    p = H @ target.conj()
    w = np.linalg.solve(R, p)
    mmse = 1.0 - np.real(p.conj() @ w)
    return w, float(mmse)
