"""Scenario execution: the transmit / channel / receive chain and its exports.

Chain order per trial::

    bits -> modulate -> upsample -> tx_filter -> [interference] -> channel
         -> rx_filter -> downsample -> [equalize] -> demodulate

With ``interference_position = "post_channel"`` the interference stage
moves to just after the channel.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import AwgnConfig, FadingConfig, add_awgn, apply_fading, make_fading
from .config import ScenarioConfig, describe
from .core import SeedSpec, SymbolFrame, Waveform, derive_stream, make_rng, power
from .equalizer import lms_run
from .interference import InterfererSpec, combine, gen_interferer
from .metrics import BerReport, PsdEstimate, capture_constellation, count_ber, psd_welch
from .modem import PskConfig, demap_symbols, map_bits
from .pulse import RrcSpec, design_rrc, downsample, fir_filter, upsample

log = logging.getLogger(__name__)

NOISELESS = math.inf


def stage_order(cfg: ScenarioConfig) -> list[str]:
    stages = ["bits", "modulate", "upsample", "tx_filter", "interference", "channel",
              "rx_filter", "downsample", "equalize", "demodulate"]
    if cfg.interference_position == "post_channel":
        stages.remove("interference")
        stages.insert(stages.index("channel") + 1, "interference")
    return stages


@dataclass(frozen=True)
class Combination:
    modulation: int
    channel: str
    esn0_db: float
    doppler_hz: float

    @property
    def has_fading(self) -> bool:
        return self.channel in ("rayleigh", "rayleigh_plus_awgn")

    @property
    def has_noise(self) -> bool:
        return self.channel in ("awgn", "rayleigh_plus_awgn")

    def label(self) -> str:
        return f"{self.modulation}/{self.channel}/{_fmt(self.esn0_db)}"

    def tag(self) -> str:
        return (f"M{self.modulation}_{self.channel}_{_fmt(self.esn0_db)}dB"
                f"_{_fmt(self.doppler_hz)}Hz")


def combinations(cfg: ScenarioConfig) -> list[Combination]:
    """Sweep order: modulation, channel, Es/N0, Doppler.

    Channels without noise ignore the Es/N0 list (reported as ``inf``);
    channels without fading ignore the Doppler list (reported as 0).
    """
    out = []
    for m in cfg.modulations:
        for ch in cfg.channel:
            esn0s = cfg.esn0_db_list if ch != "rayleigh" else (NOISELESS,)
            dopplers = cfg.doppler_hz if ch != "awgn" else (0.0,)
            for e in esn0s:
                for fd in dopplers:
                    out.append(Combination(m, ch, e, fd))
    return out


def trial_seed(cfg: ScenarioConfig, combo: Combination, k: int) -> SeedSpec:
    # Doppler is deliberately not part of the label: trials at different
    # Doppler values share bits, noise and oscillator draws.
    return derive_stream(SeedSpec(cfg.master_seed), f"trial/{combo.label()}/{k}")


@dataclass
class TrialResult:
    report: BerReport
    stages: dict[str, np.ndarray] | None = None
    psd_tx: PsdEstimate | None = None
    psd_rx: PsdEstimate | None = None
    constellation: np.ndarray | None = None


def run_trial(cfg: ScenarioConfig, combo: Combination, k: int, *, keep_stages: bool = False,
              capture: bool = False) -> TrialResult:
    psk = PskConfig(combo.modulation, cfg.phase_offset_rad)
    sps = cfg.samples_per_symbol
    rrc = RrcSpec(cfg.rolloff, cfg.filter_span_symbols, sps)
    taps = design_rrc(rrc)
    total_delay = 2 * taps.group_delay_samples
    fs = cfg.sample_rate_hz
    seed = trial_seed(cfg, combo, k)
    n_bits, _ = cfg.plan(psk.bits_per_symbol)
    stages: dict[str, np.ndarray] = {}

    def keep(name, value):
        if keep_stages:
            stages[name] = np.array(value.samples if isinstance(value, Waveform)
                                    else value.symbols if isinstance(value, SymbolFrame) else value)

    bits = make_rng(derive_stream(seed, "bits")).integers(0, 2, n_bits, dtype=np.uint8)
    keep("bits", bits)
    tx_symbols = map_bits(bits, psk, cfg.symbol_rate_hz)
    keep("modulate", tx_symbols)
    up = upsample(tx_symbols, sps)
    # Trailing zeros flush both filters so every symbol reaches the sampler.
    up = Waveform(np.concatenate([up.samples, np.zeros(total_delay)]), fs)
    keep("upsample", up)
    tx = fir_filter(up, taps)
    keep("tx_filter", tx)
    signal_power = power(tx)

    interferers = []
    for i, entry in enumerate(cfg.interferers):
        spec = InterfererSpec(entry.kind, entry.cir_db, entry.offset_hz(cfg.symbol_rate_hz),
                              PskConfig(entry.modulation), rrc, derive_stream(seed, f"interferer/{i}"))
        interferers.append(gen_interferer(spec, len(tx), fs, reference_power=signal_power))

    x = tx
    if cfg.interference_position == "pre_channel":
        x = combine(x, interferers)
        keep("interference", x)

    channel_gain = 1.0
    if combo.has_fading:
        fcfg = FadingConfig(cfg.paths, combo.doppler_hz, fs, cfg.normalize_path_power,
                            cfg.num_oscillators, derive_stream(seed, "fading"))
        channel_gain = float(fcfg.linear_gains().sum())
        x = apply_fading(x, make_fading(fcfg, len(x)))
    if combo.has_noise:
        awgn = AwgnConfig(combo.esn0_db, sps, derive_stream(seed, "noise"))
        x = add_awgn(x, awgn, reference_power=signal_power * channel_gain)
    keep("channel", x)

    if cfg.interference_position == "post_channel":
        x = combine(x, interferers)
        keep("interference", x)

    rx = fir_filter(x, taps)
    keep("rx_filter", rx)
    rx_symbols = downsample(rx, sps, total_delay)
    keep("downsample", rx_symbols)

    decided = rx_symbols
    if cfg.equalizer is not None:
        eq = cfg.equalizer
        # Pilot blocks recur through the frame, so the whole frame is the
        # training reference; lms_run only reads it inside the blocks.
        known = tx_symbols.symbols if eq.training_period else tx_symbols.symbols[: eq.training_len]
        decided = lms_run(rx_symbols, SymbolFrame(known, cfg.symbol_rate_hz), eq, psk).equalized
    keep("equalize", decided)

    rx_bits = demap_symbols(decided, psk)
    keep("demodulate", rx_bits)
    counted = cfg.counted_bits(bits.size, psk.bits_per_symbol)
    report = count_ber(bits[counted], rx_bits[counted])

    result = TrialResult(report, stages if keep_stages else None)
    if capture:
        if "psd_tx" in cfg.outputs:
            result.psd_tx = psd_welch(tx, min(cfg.psd_segment_len, len(tx)))
        if "psd_rx" in cfg.outputs:
            result.psd_rx = psd_welch(rx, min(cfg.psd_segment_len, len(rx)))
        if "constellation" in cfg.outputs:
            result.constellation = capture_constellation(decided, cfg.max_constellation_points)
    return result


def _trial_task(args):
    cfg, combo, k, keep_stages = args
    first = k == 0
    return run_trial(cfg, combo, k, keep_stages=keep_stages and first, capture=first)


@dataclass
class RunSummary:
    name: str
    out_dir: Path
    master_seed: int
    rows: list[tuple[Combination, BerReport]] = field(default_factory=list)
    effective_bits: dict[int, int] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    psd_peak_db: dict[str, float] = field(default_factory=dict)
    wall_time_s: float = 0.0
    jobs: int = 1

    def report_for(self, modulation: int, channel: str, esn0_db: float | None = None,
                   doppler_hz: float | None = None) -> BerReport:
        for combo, rep in self.rows:
            if (combo.modulation == modulation and combo.channel == channel
                    and (esn0_db is None or combo.esn0_db == esn0_db)
                    and (doppler_hz is None or combo.doppler_hz == doppler_hz)):
                return rep
        raise KeyError((modulation, channel, esn0_db, doppler_hz))


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def _write_csv(path: Path, header: str, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def run_scenario(cfg: ScenarioConfig, out_dir, jobs: int = 1, dump_stages: bool = False) -> RunSummary:
    """Run every combination, write CSV exports and ``summary.json`` into ``out_dir``."""
    t0 = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")

    combos = combinations(cfg)
    tasks, owners = [], []
    effective = {}
    for ci, combo in enumerate(combos):
        bps = PskConfig(combo.modulation).bits_per_symbol
        per_trial, n_trials = cfg.plan(bps)
        effective[combo.modulation] = per_trial * n_trials
        for k in range(n_trials):
            tasks.append((cfg, combo, k, dump_stages))
            owners.append(ci)

    log.info("%s: %d combinations, %d trials, jobs=%d", cfg.name, len(combos), len(tasks), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        results = [_trial_task(t) for t in tasks]

    summary = RunSummary(cfg.name, out, cfg.master_seed, effective_bits=effective, jobs=jobs)
    merged = [BerReport(0, 0) for _ in combos]
    firsts: list[TrialResult | None] = [None] * len(combos)
    for ci, res in zip(owners, results):
        merged[ci] = merged[ci].merge(res.report)
        if firsts[ci] is None:
            firsts[ci] = res
    summary.rows = list(zip(combos, merged))

    # Single writer, after all workers are done.
    if "ber" in cfg.outputs:
        _write_csv(out / "ber.csv", "modulation,channel,esn0_db,doppler_hz,bits,errors,ber,ci95", (
            [str(c.modulation), c.channel, _fmt(c.esn0_db), _fmt(c.doppler_hz), str(r.bits_compared),
             str(r.bit_errors), _fmt(r.ber), _fmt(r.ci95_halfwidth)]
            for c, r in summary.rows))
        summary.artifacts.append("ber.csv")
    for combo, first in zip(combos, firsts):
        tag = combo.tag()
        for kind, psd in (("psd_tx", first.psd_tx), ("psd_rx", first.psd_rx)):
            if psd is None:
                continue
            name = f"{kind}_{tag}.csv"
            _write_csv(out / name, "freq_hz,power_db",
                       ([_fmt(f), _fmt(p)] for f, p in zip(psd.freq_hz, psd.relative_db())))
            summary.artifacts.append(name)
            summary.psd_peak_db[name] = float(psd.power_db.max())
        if first.constellation is not None:
            name = f"constellation_{tag}.csv"
            _write_csv(out / name, "re,im", ([_fmt(a), _fmt(b)] for a, b in first.constellation))
            summary.artifacts.append(name)
        if first.stages is not None:
            name = f"stages_{tag}.npz"
            np.savez(out / name, **first.stages)
            summary.artifacts.append(name)

    summary.wall_time_s = time.perf_counter() - t0
    _write_summary(cfg, summary)
    return summary


def _write_summary(cfg: ScenarioConfig, summary: RunSummary):
    doc = {
        "name": cfg.name,
        "master_seed": cfg.master_seed,
        "jobs": summary.jobs,
        "wall_time_s": round(summary.wall_time_s, 3),
        "stage_order": stage_order(cfg),
        "effective_bits": {f"M{m}": b for m, b in summary.effective_bits.items()},
        "results": [
            {"modulation": c.modulation, "channel": c.channel, "esn0_db": _fmt(c.esn0_db),
             "doppler_hz": c.doppler_hz, "bits": r.bits_compared, "errors": r.bit_errors,
             "ber": r.ber, "ci95": r.ci95_halfwidth}
            for c, r in summary.rows
        ],
        "artifacts": summary.artifacts,
        "psd_peak_db": summary.psd_peak_db,
        "config": describe(cfg),
    }
    with open(summary.out_dir / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_plain(doc), fh, indent=2)
        fh.write("\n")


def _plain(v):
    # JSON has no infinity; the +inf Es/N0 sentinel is written as "inf".
    if isinstance(v, float) and not math.isfinite(v):
        return _fmt(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v
