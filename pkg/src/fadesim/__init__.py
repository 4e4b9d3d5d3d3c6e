"""Link-level M-PSK simulator: RRC shaping, AWGN and Rayleigh fading, interference, LMS, BER/PSD."""

from .core import DomainError, SeedSpec, SymbolFrame, Waveform, derive_stream, make_rng, power
from .modem import PskConfig, demap_symbols, gray_encode, map_bits
from .pulse import FirTaps, RrcSpec, design_rrc, downsample, fir_filter, upsample
from .channel import AwgnConfig, FadingConfig, FadingProcess, PathSpec, add_awgn, apply_fading, make_fading
from .interference import InterfererSpec, combine, gen_interferer
from .equalizer import LmsConfig, lms_run
from .metrics import (
    BerReport,
    PsdEstimate,
    ber_theory_bpsk_rayleigh,
    ber_theory_mpsk_awgn,
    capture_constellation,
    count_ber,
    psd_welch,
)
from .config import ConfigError, ScenarioConfig, validate_config
from .runner import run_scenario

__version__ = "0.1.0"
