import json
import re

import numpy as np
import pytest

from fadesim.cli import main
from fadesim.config import ScenarioConfig, validate_config
from fadesim.runner import combinations, run_scenario, run_trial, stage_order

FIG1_ORDER = ["bits", "modulate", "upsample", "tx_filter", "interference", "channel",
              "rx_filter", "downsample", "equalize", "demodulate"]

SMALL = """
name = "small"
modulations = [2, 4, 16]
channel = ["awgn", "rayleigh_plus_awgn"]
esn0_db_list = [12.0]
doppler_hz = [10.0]
num_bits = 24000
trial_bits = 6000
outputs = ["ber", "psd_tx", "psd_rx", "constellation"]
max_constellation_points = 100
[[interferers]]
kind = "co_channel"
cir_db = 25.0
"""


def test_stage_order():
    assert stage_order(ScenarioConfig()) == FIG1_ORDER
    post = stage_order(ScenarioConfig(interference_position="post_channel"))
    assert post.index("interference") == post.index("channel") + 1


def test_keep_stages_matches_chain_order():
    cfg = validate_config(SMALL)
    res = run_trial(cfg, combinations(cfg)[0], 0, keep_stages=True)
    assert list(res.stages) == FIG1_ORDER


def test_noiseless_awgn_is_error_free(tmp_path):
    cfg = ScenarioConfig(modulations=(2, 4, 16, 64), channel=("awgn",), esn0_db_list=(float("inf"),),
                         num_bits=12_000, trial_bits=6_000)
    summary = run_scenario(cfg, tmp_path)
    assert [r.bit_errors for _, r in summary.rows] == [0, 0, 0, 0]


def test_outputs_and_determinism(tmp_path):
    cfg = validate_config(SMALL)
    s1 = run_scenario(cfg, tmp_path / "a")
    s2 = run_scenario(cfg, tmp_path / "b", jobs=2)
    assert len(s1.rows) == 6
    for name in s1.artifacts:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    text = (tmp_path / "a" / "ber.csv").read_bytes()
    assert b"\r" not in text
    lines = text.decode().splitlines()
    assert lines[0] == "modulation,channel,esn0_db,doppler_hz,bits,errors,ber,ci95"
    assert len(lines) == 7
    for row in lines[1:]:
        fields = row.split(",")
        assert len(fields) == 8
        for f in (fields[6], fields[7]):
            digits = re.sub(r"e.*$", "", f).replace(".", "").lstrip("0")
            assert len(digits) <= 6

    psd = np.loadtxt(tmp_path / "a" / "psd_tx_M4_awgn_12dB_0Hz.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(psd[:, 0]) > 0) and psd[:, 1].max() == 0.0
    pts = np.loadtxt(tmp_path / "a" / "constellation_M4_awgn_12dB_0Hz.csv", delimiter=",", skiprows=1)
    assert pts.shape[1] == 2 and len(pts) <= 100

    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["stage_order"] == FIG1_ORDER
    assert summary["master_seed"] == 2014
    assert summary["effective_bits"]


def test_awgn_chain_roughly_matches_theory(tmp_path):
    from fadesim.metrics import ber_theory_mpsk_awgn

    cfg = ScenarioConfig(modulations=(4,), channel=("awgn",), esn0_db_list=(7.0,), num_bits=200_000,
                         trial_bits=100_000, filter_span_symbols=64)
    rep = run_scenario(cfg, tmp_path).rows[0][1]
    expected = float(ber_theory_mpsk_awgn(4, 7.0 - 10 * np.log10(2)))
    assert abs(rep.ber - expected) < 4 * np.sqrt(expected / rep.bits_compared) + 0.05 * expected


def test_seed_changes_results(tmp_path):
    cfg = ScenarioConfig(esn0_db_list=(4.0,), num_bits=20_000, trial_bits=20_000)
    a = run_scenario(cfg, tmp_path / "a").rows[0][1]
    b = run_scenario(ScenarioConfig(esn0_db_list=(4.0,), num_bits=20_000, trial_bits=20_000, master_seed=1),
                     tmp_path / "b").rows[0][1]
    assert a != b


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "s.cfg"
    good.write_text('num_bits = 4000\ntrial_bits = 4000\nchannel = "awgn"\n')
    assert main(["run", str(good), "--out", str(tmp_path / "o"), "--seed", "5"]) == 0
    assert (tmp_path / "o" / "ber.csv").exists()
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["master_seed"] == 5

    bad = tmp_path / "bad.cfg"
    bad.write_text("rolloff = 1.5\ndopler_hz = 3\n")
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "rolloff" in err and "dopler_hz" in err
    assert main(["validate", str(tmp_path / "missing.cfg")]) == 1
    assert main(["validate", "fig11_ber"]) == 0

    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(good), "--out", str(blocker / "sub")]) == 2


def test_cli_dump_stages(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text('num_bits = 2000\ntrial_bits = 2000\nchannel = "awgn"\n')
    assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "--dump-stages"]) == 0
    with np.load(tmp_path / "o" / "stages_M4_awgn_10dB_0Hz.npz") as z:
        assert list(z.files) == FIG1_ORDER


def test_presets_list(capsys):
    assert main(["presets", "list"]) == 0
    out = capsys.readouterr().out.split()
    assert out == sorted(["fig2-4_psd.cfg", "fig5-7_constellation.cfg", "fig8-10_rx.cfg",
                          "fig11_ber.cfg", "fig12_doppler.cfg"])


@pytest.mark.slow
@pytest.mark.parametrize("m, ebn0, rel", [(2, 6.0, None), (16, 12.0, 0.10), (64, 16.0, 0.10)])
def test_chain_matches_theory_per_order(tmp_path, m, ebn0, rel):
    from fadesim.metrics import ber_theory_mpsk_awgn

    bps = int(np.log2(m))
    esn0 = ebn0 + 10 * np.log10(bps)
    cfg = ScenarioConfig(modulations=(m,), channel=("awgn",), esn0_db_list=(esn0,), num_bits=600_000,
                         trial_bits=300_000)
    rep = run_scenario(cfg, tmp_path).rows[0][1]
    theory = float(ber_theory_mpsk_awgn(m, ebn0))
    if rel is None:
        tol = max(3 * np.sqrt(theory * (1 - theory) / rep.bits_compared), 0.05 * theory)
    else:
        tol = rel * theory
    assert abs(rep.ber - theory) <= tol


@pytest.mark.slow
def test_ber_confidence_coverage(tmp_path):
    # 20 independent seeds; each run's 95% interval should cover the pooled BER.
    reports = []
    for s in range(20):
        cfg = ScenarioConfig(esn0_db_list=(6.0,), num_bits=40_000, trial_bits=40_000, master_seed=100 + s)
        reports.append(run_scenario(cfg, tmp_path / str(s)).rows[0][1])
    pooled = sum(r.bit_errors for r in reports) / sum(r.bits_compared for r in reports)
    covered = sum(abs(r.ber - pooled) <= r.ci95_halfwidth for r in reports)
    assert covered >= 18
