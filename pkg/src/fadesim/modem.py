"""Gray-coded M-PSK mapping and hard-decision demapping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, SymbolFrame

# Phases this close to a decision boundary are snapped onto it so the
# counter-clockwise tie-break is not at the mercy of atan2 rounding.
_BOUNDARY_SNAP = 1e-9


@dataclass(frozen=True)
class PskConfig:
    order_m: int = 4
    phase_offset_rad: float = 0.0
    gray_coded: bool = True
    bits_per_symbol: int = field(init=False)

    def __post_init__(self):
        m = int(self.order_m)
        if m < 2 or m & (m - 1):
            raise DomainError(f"order_m must be a power of two >= 2, got {self.order_m}")
        object.__setattr__(self, "order_m", m)
        object.__setattr__(self, "bits_per_symbol", m.bit_length() - 1)

    def constellation(self) -> np.ndarray:
        """Points indexed by constellation position k (not by bit label)."""
        k = np.arange(self.order_m)
        return np.exp(1j * (2 * np.pi * k / self.order_m + self.phase_offset_rad))

    def labels(self) -> np.ndarray:
        """Integer bit label carried by each constellation position."""
        k = np.arange(self.order_m)
        return gray_encode(k) if self.gray_coded else k


def gray_encode(k):
    """Reflected binary code, ``k ^ (k >> 1)``. Works on ints and integer arrays."""
    return k ^ (k >> 1)


def gray_decode(g):
    """Inverse of :func:`gray_encode`."""
    if isinstance(g, np.ndarray):
        k = g.astype(np.int64, copy=True)
        shift = g.astype(np.int64) >> 1
        while np.any(shift):
            k ^= shift
            shift >>= 1
        return k
    k = int(g)
    shift = k >> 1
    while shift:
        k ^= shift
        shift >>= 1
    return k


def bits_to_ints(bits: np.ndarray, width: int) -> np.ndarray:
    groups = np.asarray(bits, dtype=np.int64).reshape(-1, width)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return groups @ weights


def ints_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((np.asarray(values, dtype=np.int64)[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def map_bits(bits, cfg: PskConfig, symbol_rate_hz: float = 1.0) -> SymbolFrame:
    """Map bits (MSB first within each group) onto unit-energy PSK symbols."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size % cfg.bits_per_symbol:
        raise DomainError(
            f"{bits.size} bits is not a multiple of bits_per_symbol={cfg.bits_per_symbol}"
        )
    if np.any(bits > 1):
        raise DomainError("bits must be 0 or 1")
    v = bits_to_ints(bits, cfg.bits_per_symbol)
    k = gray_decode(v) if cfg.gray_coded else v
    phase = 2 * np.pi * k / cfg.order_m + cfg.phase_offset_rad
    return SymbolFrame(np.exp(1j * phase), symbol_rate_hz)


def decide_indices(symbols: np.ndarray, cfg: PskConfig) -> np.ndarray:
    """Nearest constellation position by phase sector.

    A phase exactly on a boundary goes to the counter-clockwise neighbour.
    """
    m = cfg.order_m
    sector = (np.angle(symbols) - cfg.phase_offset_rad) * m / (2 * np.pi)
    half = np.floor(sector) + 0.5
    sector = np.where(np.abs(sector - half) < _BOUNDARY_SNAP, half, sector)
    return np.mod(np.floor(sector + 0.5), m).astype(np.int64)


def demap_symbols(frame: SymbolFrame | np.ndarray, cfg: PskConfig) -> np.ndarray:
    symbols = frame.symbols if isinstance(frame, SymbolFrame) else np.asarray(frame)
    k = decide_indices(symbols, cfg)
    v = gray_encode(k) if cfg.gray_coded else k
    return ints_to_bits(v, cfg.bits_per_symbol)


def hard_decision(symbols: np.ndarray, cfg: PskConfig) -> np.ndarray:
    """Re-modulated decisions, used by the decision-directed equalizer."""
    return cfg.constellation()[decide_indices(symbols, cfg)]
