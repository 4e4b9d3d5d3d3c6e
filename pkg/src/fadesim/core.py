"""Signal containers, seeded random streams and dB helpers shared by every stage."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


class DomainError(ValueError):
    """Raised when an operation receives arguments outside its domain."""


def _frozen_complex(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Waveform:
    """Complex baseband samples at a fixed sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen_complex(self.samples, "waveform"))
        if self.samples.size < 1:
            raise DomainError("waveform must hold at least one sample")
        if not self.sample_rate_hz > 0:
            raise DomainError("sample_rate_hz must be > 0")

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True, eq=False)
class SymbolFrame:
    """Complex symbols at the symbol rate (modulator output, decision input)."""

    symbols: np.ndarray
    symbol_rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "symbols", _frozen_complex(self.symbols, "symbol frame"))
        if not self.symbol_rate_hz > 0:
            raise DomainError("symbol_rate_hz must be > 0")

    def __len__(self) -> int:
        return self.symbols.size


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one independent random stream: ``(master_seed, stream_id)``."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) <= _U64:
                raise DomainError(f"{name} must fit in 64 unsigned bits")
            object.__setattr__(self, name, int(value))


def power(w: Waveform | SymbolFrame | np.ndarray) -> float:
    """Mean of ``|x|**2`` over the samples (or symbols)."""
    if isinstance(w, Waveform):
        x = w.samples
    elif isinstance(w, SymbolFrame):
        x = w.symbols
    else:
        x = np.asarray(w)
    if x.size == 0:
        raise DomainError("power of an empty waveform")
    return float(np.mean(x.real**2 + x.imag**2))


def derive_stream(seed: SeedSpec, label: str) -> SeedSpec:
    """Child stream of ``seed`` named by ``label``.

    The new ``stream_id`` is a 64-bit BLAKE2b digest of the parent
    ``stream_id`` and the label, so the mapping is deterministic and
    different labels collide only with 64-bit-hash probability.
    """
    h = hashlib.blake2b(digest_size=8, person=b"fadesim-stream")
    h.update(seed.stream_id.to_bytes(8, "little"))
    h.update(label.encode("utf-8"))
    return SeedSpec(seed.master_seed, int.from_bytes(h.digest(), "little"))


def make_rng(seed: SeedSpec) -> np.random.Generator:
    """Counter-based Philox generator keyed by the full seed pair.

    Output depends only on the key, never on thread count or call order
    elsewhere in the program.
    """
    key = seed.master_seed | (seed.stream_id << 64)
    return np.random.Generator(np.random.Philox(key=key))


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    return 10.0 * np.log10(np.asarray(lin, dtype=float))


def db_to_amplitude(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 20.0)


def is_disabled_db(db: float) -> bool:
    """``+inf`` dB is the sentinel for "this impairment is switched off"."""
    return math.isinf(db) and db > 0
