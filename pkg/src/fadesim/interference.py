"""Co-channel and adjacent-channel interferers, summed onto the desired signal."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DomainError, SeedSpec, Waveform, db_to_linear, derive_stream, is_disabled_db, make_rng, power
from .modem import PskConfig, map_bits
from .pulse import RrcSpec, design_rrc, fir_filter, upsample

CO_CHANNEL = "co_channel"
ADJACENT_CHANNEL = "adjacent_channel"


@dataclass(frozen=True)
class InterfererSpec:
    kind: str = CO_CHANNEL
    cir_db: float = 20.0
    freq_offset_hz: float = 0.0
    modulation: PskConfig = field(default_factory=PskConfig)
    pulse: RrcSpec = field(default_factory=RrcSpec)
    seed: SeedSpec = SeedSpec(0)

    def __post_init__(self):
        if self.kind == CO_CHANNEL:
            if self.freq_offset_hz != 0:
                raise DomainError("co_channel interferer requires freq_offset_hz = 0")
        elif self.kind == ADJACENT_CHANNEL:
            if self.freq_offset_hz == 0:
                raise DomainError("adjacent_channel interferer requires a nonzero freq_offset_hz")
        else:
            raise DomainError(f"unknown interferer kind {self.kind!r}")


def gen_interferer(
    spec: InterfererSpec, n: int, sample_rate_hz: float, reference_power: float = 1.0
) -> Waveform:
    """Random-data PSK waveform of length ``n`` at C/I ``spec.cir_db`` below ``reference_power``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if is_disabled_db(spec.cir_db):
        return Waveform(np.zeros(n, dtype=np.complex128), sample_rate_hz)

    sps = spec.pulse.samples_per_symbol
    taps = design_rrc(spec.pulse)
    # Extra symbols flush the filter so every returned sample is steady-state.
    num_symbols = math.ceil(n / sps) + spec.pulse.span_symbols
    rng = make_rng(derive_stream(spec.seed, "interferer-bits"))
    bits = rng.integers(0, 2, num_symbols * spec.modulation.bits_per_symbol, dtype=np.uint8)
    frame = map_bits(bits, spec.modulation, sample_rate_hz / sps)
    shaped = fir_filter(upsample(frame, sps), taps).samples
    x = shaped[taps.group_delay_samples * 2 : taps.group_delay_samples * 2 + n]

    if spec.freq_offset_hz:
        t = np.arange(n) / sample_rate_hz
        x = x * np.exp(2j * np.pi * spec.freq_offset_hz * t)
    target = reference_power / db_to_linear(spec.cir_db)
    x = x * np.sqrt(target / power(x))
    return Waveform(x, sample_rate_hz)


def combine(signal: Waveform, interferers: Sequence[Waveform]) -> Waveform:
    """Elementwise sum, accumulated left to right in list order."""
    total = np.array(signal.samples)
    for k, w in enumerate(interferers):
        if len(w) != len(signal):
            raise DomainError(f"interferer {k} has length {len(w)}, expected {len(signal)}")
        if w.sample_rate_hz != signal.sample_rate_hz:
            raise DomainError(f"interferer {k} sample rate differs from the signal")
        total += w.samples
    return Waveform(total, signal.sample_rate_hz)
