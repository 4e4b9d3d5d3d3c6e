"""BER counting, Welch PSD, constellation capture and closed-form BER references."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal, special

from .core import DomainError, SymbolFrame, Waveform, db_to_linear


@dataclass(frozen=True)
class BerReport:
    bits_compared: int
    bit_errors: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_compared if self.bits_compared else 0.0

    @property
    def ci95_halfwidth(self) -> float:
        if not self.bits_compared:
            return 0.0
        p = self.ber
        return 1.96 * math.sqrt(p * (1 - p) / self.bits_compared)

    def merge(self, other: "BerReport") -> "BerReport":
        return BerReport(self.bits_compared + other.bits_compared, self.bit_errors + other.bit_errors)


def count_ber(tx_bits, rx_bits, skip_bits: int = 0) -> BerReport:
    tx = np.asarray(tx_bits, dtype=np.uint8).reshape(-1)
    rx = np.asarray(rx_bits, dtype=np.uint8).reshape(-1)
    if tx.size != rx.size:
        raise DomainError(f"bit streams differ in length: {tx.size} vs {rx.size}")
    if not 0 <= skip_bits < tx.size:
        raise DomainError(f"skip_bits={skip_bits} must be in [0, {tx.size})")
    errors = int(np.count_nonzero(tx[skip_bits:] != rx[skip_bits:]))
    return BerReport(tx.size - skip_bits, errors)


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """Two-sided PSD. ``power_db`` is absolute density, dB re 1 unit^2/Hz."""

    freq_hz: np.ndarray
    power_db: np.ndarray

    @property
    def bin_width_hz(self) -> float:
        return float(self.freq_hz[1] - self.freq_hz[0])

    @property
    def linear(self) -> np.ndarray:
        return db_to_linear(self.power_db)

    def total_power(self) -> float:
        return float(self.linear.sum() * self.bin_width_hz)

    def relative_db(self) -> np.ndarray:
        """dB relative to the peak bin, as plotted in spectrum figures."""
        return self.power_db - self.power_db.max()


def psd_welch(w: Waveform, segment_len: int = 1024, overlap_fraction: float = 0.5) -> PsdEstimate:
    if segment_len > len(w):
        raise DomainError(f"segment_len={segment_len} exceeds signal length {len(w)}")
    if not 0 <= overlap_fraction < 1:
        raise DomainError("overlap_fraction must be in [0, 1)")
    f, pxx = signal.welch(
        w.samples,
        fs=w.sample_rate_hz,
        window="hann",
        nperseg=segment_len,
        noverlap=int(segment_len * overlap_fraction),
        return_onesided=False,
        scaling="density",
        detrend=False,
    )
    f = np.fft.fftshift(f)
    pxx = np.fft.fftshift(pxx)
    tiny = np.finfo(float).tiny
    return PsdEstimate(f, 10 * np.log10(np.maximum(pxx, tiny)))


def capture_constellation(frame: SymbolFrame | np.ndarray, max_points: int) -> np.ndarray:
    """Every k-th symbol, k chosen so at most ``max_points`` remain. Shape (n, 2)."""
    if max_points < 1:
        raise DomainError("max_points must be >= 1")
    z = frame.symbols if isinstance(frame, SymbolFrame) else np.asarray(frame)
    step = max(1, math.ceil(z.size / max_points))
    z = z[::step]
    return np.column_stack([z.real, z.imag])


def qfunc(x):
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def ber_theory_mpsk_awgn(m: int, ebn0_db):
    if m < 2 or m & (m - 1):
        raise DomainError("m must be a power of two >= 2")
    g = db_to_linear(ebn0_db)
    if m == 2:
        return qfunc(np.sqrt(2 * g))
    k = math.log2(m)
    return (2.0 / k) * qfunc(np.sqrt(2 * k * g) * np.sin(np.pi / m))


def ber_theory_bpsk_rayleigh(avg_ebn0_db):
    g = db_to_linear(avg_ebn0_db)
    return 0.5 * (1 - np.sqrt(g / (1 + g)))
