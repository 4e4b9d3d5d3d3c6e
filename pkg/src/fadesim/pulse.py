"""Root-raised-cosine shaping, zero-insertion upsampling and symbol-instant downsampling.

The transmit and receive filters are the same RRC; their cascade is a
raised-cosine (Nyquist) pulse. Filtering keeps the input length and leaves
the group delay in place, so the chain adds up both filters' delays and
hands the total to :func:`downsample` as the sampling offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .core import DomainError, SymbolFrame, Waveform


@dataclass(frozen=True)
class RrcSpec:
    rolloff: float = 0.22
    span_symbols: int = 16
    samples_per_symbol: int = 8

    def __post_init__(self):
        if not 0.0 < self.rolloff <= 1.0:
            raise DomainError("rolloff must be in (0,1]")
        if self.span_symbols < 2 or self.span_symbols % 2:
            raise DomainError("span_symbols must be an even positive integer")
        if self.samples_per_symbol < 2:
            raise DomainError("samples_per_symbol must be >= 2")

    @property
    def num_taps(self) -> int:
        return self.span_symbols * self.samples_per_symbol + 1


@dataclass(frozen=True, eq=False)
class FirTaps:
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def group_delay_samples(self) -> int:
        return (self.coefficients.size - 1) // 2

    def __len__(self) -> int:
        return self.coefficients.size


def rrc_impulse(t, beta: float) -> np.ndarray:
    """Unnormalized RRC impulse response, ``t`` in symbol periods.

    The removable singularities at ``t = 0`` and ``|t| = 1/(4 beta)`` are
    replaced by their limits.
    """
    t = np.asarray(t, dtype=float)
    h = np.empty_like(t)
    at_zero = np.isclose(t, 0.0, atol=1e-12)
    at_pole = np.isclose(np.abs(4 * beta * t), 1.0, atol=1e-12)
    rest = ~(at_zero | at_pole)

    h[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    q = np.pi / (4.0 * beta)
    h[at_pole] = beta / np.sqrt(2.0) * ((1 + 2 / np.pi) * np.sin(q) + (1 - 2 / np.pi) * np.cos(q))
    tr = t[rest]
    num = np.sin(np.pi * tr * (1 - beta)) + 4 * beta * tr * np.cos(np.pi * tr * (1 + beta))
    den = np.pi * tr * (1 - (4 * beta * tr) ** 2)
    h[rest] = num / den
    return h


def design_rrc(spec: RrcSpec) -> FirTaps:
    half = spec.span_symbols * spec.samples_per_symbol // 2
    t = np.arange(-half, half + 1) / spec.samples_per_symbol
    h = rrc_impulse(t, spec.rolloff)
    return FirTaps(h / np.sqrt(np.sum(h**2)))


def upsample(frame: SymbolFrame, l: int) -> Waveform:
    if l < 1:
        raise DomainError("upsampling factor must be >= 1")
    out = np.zeros(len(frame) * l, dtype=np.complex128)
    out[::l] = frame.symbols
    return Waveform(out, frame.symbol_rate_hz * l)


def fir_filter(w: Waveform, taps: FirTaps) -> Waveform:
    """Causal convolution truncated to the input length (delay retained)."""
    x = w.samples
    h = taps.coefficients
    if h.size == 1:
        y = x * h[0]
    else:
        y = signal.oaconvolve(x, h)[: x.size] if x.size > 4 * h.size else np.convolve(x, h)[: x.size]
    return Waveform(y, w.sample_rate_hz)


def downsample(w: Waveform, l: int, offset: int = 0) -> SymbolFrame:
    if l < 1:
        raise DomainError("downsampling factor must be >= 1")
    if not 0 <= offset < len(w):
        raise DomainError(f"offset {offset} outside waveform of length {len(w)}")
    return SymbolFrame(w.samples[offset::l], w.sample_rate_hz / l)
