"""AWGN and multipath Rayleigh fading.

Received signal model: ``r[n] = sum_p c_p[n] s[n - d_p] + noise[n]`` with
each ``c_p`` a zero-mean complex Gaussian process shaped by the classical
(U-shaped) Doppler spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DomainError,
    SeedSpec,
    Waveform,
    db_to_linear,
    derive_stream,
    is_disabled_db,
    make_rng,
    power,
)

_CHUNK = 1 << 16


@dataclass(frozen=True)
class AwgnConfig:
    esn0_db: float
    samples_per_symbol: int = 1
    seed: SeedSpec = SeedSpec(0)

    def __post_init__(self):
        if self.samples_per_symbol < 1:
            raise DomainError("samples_per_symbol must be >= 1")


@dataclass(frozen=True)
class PathSpec:
    delay_samples: int = 0
    avg_gain_db: float = 0.0

    def __post_init__(self):
        if self.delay_samples < 0:
            raise DomainError("delay_samples must be >= 0")


@dataclass(frozen=True)
class FadingConfig:
    paths: tuple[PathSpec, ...] = (PathSpec(),)
    doppler_hz: float = 10.0
    sample_rate_hz: float = 10_000.0
    normalize_total_power: bool = False
    num_oscillators: int = 32
    seed: SeedSpec = SeedSpec(0)

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise DomainError("at least one path is required")
        delays = [p.delay_samples for p in self.paths]
        if delays[0] != 0:
            raise DomainError("first path delay must be 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise DomainError("path delays must be strictly increasing")
        if not self.sample_rate_hz > 0:
            raise DomainError("sample_rate_hz must be > 0")
        if not 0 < self.doppler_hz < self.sample_rate_hz / 10:
            raise DomainError("doppler_hz must be in (0, sample_rate_hz/10)")
        if self.num_oscillators < 8:
            raise DomainError("num_oscillators must be >= 8")

    def linear_gains(self) -> np.ndarray:
        g = db_to_linear([p.avg_gain_db for p in self.paths])
        return g / g.sum() if self.normalize_total_power else g


@dataclass(frozen=True, eq=False)
class FadingProcess:
    """Per-path complex gains, shape ``(num_paths, n)``, on the sample grid."""

    gains: np.ndarray
    delays: tuple[int, ...] = field(default=(0,))

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.gains, dtype=np.complex128))
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "delays", tuple(int(d) for d in self.delays))
        if len(self.delays) != g.shape[0]:
            raise DomainError("one delay per path is required")

    def __len__(self) -> int:
        return self.gains.shape[1]


def add_awgn(w: Waveform, cfg: AwgnConfig, reference_power: float | None = None) -> Waveform:
    """Add circular complex Gaussian noise at the requested Es/N0.

    Noise variance per sample is ``P * sps / (Es/N0)`` where ``P`` is the
    measured power of ``w`` (or ``reference_power`` when the signal of
    interest is only part of ``w``). Behind a unit-energy matched filter
    this yields the requested symbol-domain Es/N0.
    """
    if is_disabled_db(cfg.esn0_db):
        return w
    p = power(w) if reference_power is None else float(reference_power)
    n0 = p * cfg.samples_per_symbol / db_to_linear(cfg.esn0_db)
    noise = make_rng(cfg.seed).standard_normal((2, len(w)))
    noise *= np.sqrt(n0 / 2)
    return Waveform(w.samples + (noise[0] + 1j * noise[1]), w.sample_rate_hz)


def _sum_of_sinusoids(n: int, doppler_norm: float, num_osc: int, rng: np.random.Generator) -> np.ndarray:
    # Zheng-Xiao statistical model: quarter-circle arrival angles with a
    # random common rotation, independent phases per quadrature.
    theta = rng.uniform(-np.pi, np.pi)
    phi_i = rng.uniform(-np.pi, np.pi, num_osc)
    phi_q = rng.uniform(-np.pi, np.pi, num_osc)
    k = np.arange(1, num_osc + 1)
    alpha = (2 * np.pi * k - np.pi + theta) / (4 * num_osc)
    w_i = 2 * np.pi * doppler_norm * np.cos(alpha)
    w_q = 2 * np.pi * doppler_norm * np.sin(alpha)

    out = np.empty(n, dtype=np.complex128)
    for start in range(0, n, _CHUNK):
        t = np.arange(start, min(start + _CHUNK, n), dtype=float)[:, None]
        out.real[start : start + t.shape[0]] = np.cos(t * w_i + phi_i).sum(axis=1)
        out.imag[start : start + t.shape[0]] = np.cos(t * w_q + phi_q).sum(axis=1)
    return out / np.sqrt(num_osc)


def make_fading(cfg: FadingConfig, n: int) -> FadingProcess:
    """Generate ``n`` samples of every path's fading gain.

    Each path has its own derived random stream, so adding a path leaves
    the existing ones unchanged.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    doppler_norm = cfg.doppler_hz / cfg.sample_rate_hz
    gains = np.empty((len(cfg.paths), n), dtype=np.complex128)
    for p, lin in enumerate(cfg.linear_gains()):
        rng = make_rng(derive_stream(cfg.seed, f"path/{p}"))
        gains[p] = np.sqrt(lin) * _sum_of_sinusoids(n, doppler_norm, cfg.num_oscillators, rng)
    return FadingProcess(gains, tuple(p.delay_samples for p in cfg.paths))


def apply_fading(w: Waveform, f: FadingProcess) -> Waveform:
    n = len(w)
    if len(f) < n:
        raise DomainError(f"fading process has {len(f)} samples, waveform needs {n}")
    x = w.samples
    out = np.zeros(n, dtype=np.complex128)
    for c, d in zip(f.gains, f.delays):
        if d == 0:
            out += c[:n] * x
        elif d < n:
            out[d:] += c[d:n] * x[: n - d]
    return Waveform(out, w.sample_rate_hz)


def iid_rayleigh_gains(n: int, seed: SeedSpec, gain_db: float = 0.0) -> np.ndarray:
    """Independent CN(0, gain) draws, one per symbol (fast-fading limit)."""
    z = make_rng(seed).standard_normal((2, n))
    return np.sqrt(db_to_linear(gain_db) / 2) * (z[0] + 1j * z[1])
