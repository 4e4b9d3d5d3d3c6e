"""Scenario files: TOML text with top-level keys plus ``[[paths]]``,
``[[interferers]]`` and an optional ``[equalizer]`` table.

Validation gathers every problem in one pass and reports each with its
key path; unknown keys are rejected so typos never pass silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel import PathSpec
from .equalizer import LmsConfig
from .interference import ADJACENT_CHANNEL, CO_CHANNEL

CHANNELS = ("awgn", "rayleigh", "rayleigh_plus_awgn")
OUTPUTS = ("ber", "psd_tx", "psd_rx", "constellation")
INTERFERENCE_POSITIONS = ("pre_channel", "post_channel")


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class InterfererEntry:
    """Interferer as written in a scenario; seeds and pulse come from the trial."""

    kind: str = CO_CHANNEL
    cir_db: float = 20.0
    freq_offset_hz: float | None = None
    modulation: int = 4

    def offset_hz(self, symbol_rate_hz: float) -> float:
        if self.freq_offset_hz is not None:
            return self.freq_offset_hz
        return 1.25 * symbol_rate_hz if self.kind == ADJACENT_CHANNEL else 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    modulations: tuple[int, ...] = (4,)
    channel: tuple[str, ...] = ("awgn",)
    esn0_db_list: tuple[float, ...] = (10.0,)
    doppler_hz: tuple[float, ...] = (10.0,)
    paths: tuple[PathSpec, ...] = (PathSpec(0, 0.0),)
    normalize_path_power: bool = True
    num_oscillators: int = 32
    rolloff: float = 0.22
    samples_per_symbol: int = 8
    filter_span_symbols: int = 16
    symbol_rate_hz: float = 1250.0
    phase_offset_rad: float = 0.0
    interferers: tuple[InterfererEntry, ...] = ()
    interference_position: str = "pre_channel"
    equalizer: LmsConfig | None = None
    num_bits: int = 1_000_000
    trial_bits: int = 100_000
    skip_bits: int | None = None
    master_seed: int = 2014
    outputs: tuple[str, ...] = ("ber",)
    max_constellation_points: int = 2000
    psd_segment_len: int = 1024

    @property
    def sample_rate_hz(self) -> float:
        return self.symbol_rate_hz * self.samples_per_symbol

    def plan(self, bits_per_symbol: int) -> tuple[int, int]:
        """``(bits_per_trial, num_trials)`` after rounding up to whole symbols and trials."""
        per_trial = math.ceil(self.trial_bits / bits_per_symbol) * bits_per_symbol
        return per_trial, max(1, math.ceil(self.num_bits / per_trial))

    def default_skip_bits(self, bits_per_symbol: int) -> int:
        if self.skip_bits is not None:
            return self.skip_bits
        skip = self.filter_span_symbols * 2 * bits_per_symbol
        if self.equalizer is not None:
            skip = max(skip, self.equalizer.training_len * bits_per_symbol)
        return skip

    def counted_bits(self, n_bits: int, bits_per_symbol: int) -> np.ndarray:
        """Mask of bit positions that enter the BER: past the transient, not pilots."""
        mask = np.arange(n_bits) >= self.default_skip_bits(bits_per_symbol)
        eq = self.equalizer
        if eq is not None and eq.training_period:
            symbol_index = np.arange(n_bits) // bits_per_symbol - eq.reference_delay_symbols
            mask &= ~eq.is_training(symbol_index)
        return mask


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, msg: str):
        self.errors.append(f"{path}: {msg}")

    def unknown(self, table: dict, allowed, prefix: str):
        for key in table:
            if key not in allowed:
                self.fail(f"{prefix}{key}", f"unknown key {key!r}")

    def number(self, raw, key, path, default, lo=None, hi=None, lo_open=False, allow_inf=False):
        if key not in raw:
            return default
        v = raw[key]
        if not _is_number(v) or (math.isinf(v) and not allow_inf) or math.isnan(v):
            self.fail(path, "must be a finite number")
            return default
        if lo is not None and (v <= lo if lo_open else v < lo) or hi is not None and v > hi:
            return self._range(path, lo, hi, lo_open, default)
        return float(v)

    def _range(self, path, lo, hi, lo_open, default):
        left = "(" if lo_open else "["
        lo_txt = "-inf" if lo is None else f"{lo:g}"
        hi_txt = "inf)" if hi is None else f"{hi:g}]"
        self.fail(path, f"must be in {left}{lo_txt},{hi_txt}")
        return default

    def integer(self, raw, key, path, default, lo=None):
        if key not in raw:
            return default
        v = raw[key]
        if not _is_int(v):
            self.fail(path, "must be an integer")
            return default
        if lo is not None and v < lo:
            self.fail(path, f"must be >= {lo}")
            return default
        return v

    def choice_list(self, raw, key, path, default, choices):
        if key not in raw:
            return default
        v = raw[key]
        items = [v] if isinstance(v, str) else v
        if not isinstance(items, list) or not items:
            self.fail(path, "must be a non-empty string or list of strings")
            return default
        bad = [x for x in items if x not in choices]
        if bad:
            self.fail(path, f"unsupported value(s) {bad}; expected one of {list(choices)}")
            return default
        return tuple(dict.fromkeys(items))

    def number_list(self, raw, key, path, default, allow_inf=False, positive=False):
        if key not in raw:
            return default
        v = raw[key]
        items = [v] if _is_number(v) else v
        if not isinstance(items, list) or not items or not all(_is_number(x) for x in items):
            self.fail(path, "must be a number or non-empty list of numbers")
            return default
        out = []
        for i, x in enumerate(items):
            if math.isnan(x) or (math.isinf(x) and not allow_inf):
                self.fail(f"{path}[{i}]", "must be finite")
            elif positive and x <= 0:
                self.fail(f"{path}[{i}]", "must be > 0")
            else:
                out.append(float(x))
        return tuple(out) if len(out) == len(items) else default


def _parse_paths(raw, chk: _Checker):
    if "paths" not in raw:
        return ScenarioConfig.paths
    items = raw["paths"]
    if not isinstance(items, list) or not items or not all(isinstance(p, dict) for p in items):
        chk.fail("paths", "must be a non-empty array of tables ([[paths]])")
        return ScenarioConfig.paths
    paths = []
    for i, p in enumerate(items):
        pre = f"paths[{i}]."
        chk.unknown(p, ("delay_samples", "avg_gain_db"), pre)
        d = chk.integer(p, "delay_samples", pre + "delay_samples", 0, lo=0)
        g = chk.number(p, "avg_gain_db", pre + "avg_gain_db", 0.0)
        paths.append(PathSpec(d, g))
    delays = [p.delay_samples for p in paths]
    if delays[0] != 0:
        chk.fail("paths[0].delay_samples", "first path delay must be 0")
    if any(b <= a for a, b in zip(delays, delays[1:])):
        chk.fail("paths", "delay_samples must be strictly increasing")
    return tuple(paths)


def _parse_interferers(raw, chk: _Checker):
    if "interferers" not in raw:
        return ()
    items = raw["interferers"]
    if not isinstance(items, list) or not all(isinstance(p, dict) for p in items):
        chk.fail("interferers", "must be an array of tables ([[interferers]])")
        return ()
    out = []
    for i, it in enumerate(items):
        pre = f"interferers[{i}]."
        chk.unknown(it, ("kind", "cir_db", "freq_offset_hz", "modulation"), pre)
        kind = it.get("kind", CO_CHANNEL)
        if kind not in (CO_CHANNEL, ADJACENT_CHANNEL):
            chk.fail(pre + "kind", f"must be {CO_CHANNEL!r} or {ADJACENT_CHANNEL!r}")
            kind = CO_CHANNEL
        cir = chk.number(it, "cir_db", pre + "cir_db", 20.0, allow_inf=True)
        offset = None
        if "freq_offset_hz" in it:
            offset = chk.number(it, "freq_offset_hz", pre + "freq_offset_hz", None)
            if offset is not None and kind == CO_CHANNEL and offset != 0:
                chk.fail(pre + "freq_offset_hz", "must be 0 for a co_channel interferer")
            if offset is not None and kind == ADJACENT_CHANNEL and offset == 0:
                chk.fail(pre + "freq_offset_hz", "must be nonzero for an adjacent_channel interferer")
        m = chk.integer(it, "modulation", pre + "modulation", 4, lo=2)
        if m & (m - 1):
            chk.fail(pre + "modulation", "must be a power of two")
        out.append(InterfererEntry(kind, cir, offset, m))
    return tuple(out)


def _parse_equalizer(raw, chk: _Checker):
    if "equalizer" not in raw:
        return None
    eq = raw["equalizer"]
    if not isinstance(eq, dict):
        chk.fail("equalizer", "must be a table ([equalizer])")
        return None
    allowed = ("num_taps", "step_size", "training_len", "reference_delay_symbols", "training_period")
    chk.unknown(eq, allowed, "equalizer.")
    d = LmsConfig()
    taps = chk.integer(eq, "num_taps", "equalizer.num_taps", d.num_taps, lo=1)
    if taps % 2 == 0:
        chk.fail("equalizer.num_taps", "must be odd")
        taps = d.num_taps
    mu = chk.number(eq, "step_size", "equalizer.step_size", d.step_size, lo=0, lo_open=True)
    tl = chk.integer(eq, "training_len", "equalizer.training_len", d.training_len, lo=0)
    rd = chk.integer(eq, "reference_delay_symbols", "equalizer.reference_delay_symbols", 0, lo=0)
    period = chk.integer(eq, "training_period", "equalizer.training_period", 0, lo=0)
    if 0 < period <= tl:
        chk.fail("equalizer.training_period", "must be 0 or greater than training_len")
        period = 0
    return LmsConfig(taps, mu, tl, rd, period)


_TOP_LEVEL = {f.name for f in fields(ScenarioConfig)}


def validate_config(raw_text: str) -> ScenarioConfig:
    """Parse scenario text; raise :class:`ConfigError` listing every violation."""
    try:
        raw = tomllib.loads(raw_text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"<syntax>: {exc}"]) from None

    chk = _Checker()
    chk.unknown(raw, _TOP_LEVEL, "")
    d = ScenarioConfig()
    kw: dict[str, Any] = {}

    name = raw.get("name", d.name)
    if not isinstance(name, str) or not name:
        chk.fail("name", "must be a non-empty string")
        name = d.name
    kw["name"] = name

    mods = raw.get("modulations", list(d.modulations))
    if isinstance(mods, int) and not isinstance(mods, bool):
        mods = [mods]
    if not isinstance(mods, list) or not mods or not all(_is_int(m) for m in mods):
        chk.fail("modulations", "must be a non-empty list of integers")
        mods = list(d.modulations)
    for i, m in enumerate(mods):
        if m < 2 or m & (m - 1):
            chk.fail(f"modulations[{i}]", f"{m} is not a power of two >= 2")
    kw["modulations"] = tuple(dict.fromkeys(mods))

    kw["channel"] = chk.choice_list(raw, "channel", "channel", d.channel, CHANNELS)
    kw["outputs"] = chk.choice_list(raw, "outputs", "outputs", d.outputs, OUTPUTS)
    kw["esn0_db_list"] = chk.number_list(raw, "esn0_db_list", "esn0_db_list", d.esn0_db_list, allow_inf=True)
    kw["doppler_hz"] = chk.number_list(raw, "doppler_hz", "doppler_hz", d.doppler_hz, positive=True)
    kw["rolloff"] = chk.number(raw, "rolloff", "rolloff", d.rolloff, lo=0, hi=1, lo_open=True)
    kw["symbol_rate_hz"] = chk.number(raw, "symbol_rate_hz", "symbol_rate_hz", d.symbol_rate_hz, lo=0, lo_open=True)
    kw["phase_offset_rad"] = chk.number(raw, "phase_offset_rad", "phase_offset_rad", d.phase_offset_rad)
    kw["samples_per_symbol"] = chk.integer(raw, "samples_per_symbol", "samples_per_symbol", d.samples_per_symbol, lo=2)
    span = chk.integer(raw, "filter_span_symbols", "filter_span_symbols", d.filter_span_symbols, lo=2)
    if span % 2:
        chk.fail("filter_span_symbols", "must be even")
        span = d.filter_span_symbols
    kw["filter_span_symbols"] = span
    kw["num_oscillators"] = chk.integer(raw, "num_oscillators", "num_oscillators", d.num_oscillators, lo=8)
    kw["num_bits"] = chk.integer(raw, "num_bits", "num_bits", d.num_bits, lo=1)
    kw["trial_bits"] = chk.integer(raw, "trial_bits", "trial_bits", d.trial_bits, lo=1)
    kw["skip_bits"] = chk.integer(raw, "skip_bits", "skip_bits", None, lo=0)
    kw["max_constellation_points"] = chk.integer(
        raw, "max_constellation_points", "max_constellation_points", d.max_constellation_points, lo=1
    )
    kw["psd_segment_len"] = chk.integer(raw, "psd_segment_len", "psd_segment_len", d.psd_segment_len, lo=8)
    seed = chk.integer(raw, "master_seed", "master_seed", d.master_seed, lo=0)
    if seed >= 1 << 64:
        chk.fail("master_seed", "must fit in 64 unsigned bits")
        seed = d.master_seed
    kw["master_seed"] = seed

    if "normalize_path_power" in raw and not isinstance(raw["normalize_path_power"], bool):
        chk.fail("normalize_path_power", "must be true or false")
    else:
        kw["normalize_path_power"] = raw.get("normalize_path_power", d.normalize_path_power)

    pos = raw.get("interference_position", d.interference_position)
    if pos not in INTERFERENCE_POSITIONS:
        chk.fail("interference_position", f"must be one of {list(INTERFERENCE_POSITIONS)}")
        pos = d.interference_position
    kw["interference_position"] = pos

    kw["paths"] = _parse_paths(raw, chk)
    kw["interferers"] = _parse_interferers(raw, chk)
    kw["equalizer"] = _parse_equalizer(raw, chk)

    cfg = replace(d, **kw)
    fs = cfg.sample_rate_hz
    for i, fd in enumerate(cfg.doppler_hz):
        if fd >= fs / 10:
            chk.fail(f"doppler_hz[{i}]", f"must be below sample_rate/10 = {fs / 10:g} Hz")
    if chk.errors:
        raise ConfigError(chk.errors)
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return validate_config(fh.read())


def describe(cfg: ScenarioConfig) -> dict:
    """Plain-data view of a resolved config (echoes every default)."""
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "paths":
            v = [{"delay_samples": p.delay_samples, "avg_gain_db": p.avg_gain_db} for p in v]
        elif f.name == "interferers":
            v = [
                {"kind": i.kind, "cir_db": i.cir_db, "freq_offset_hz": i.offset_hz(cfg.symbol_rate_hz),
                 "modulation": i.modulation}
                for i in v
            ]
        elif f.name == "equalizer" and v is not None:
            v = {g.name: getattr(v, g.name) for g in fields(v)}
        elif isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out
