"""CLI contract: exit codes, error lines, determinism, JSON schemas."""

import json
import subprocess
import sys

import numpy as np
import pytest

from rfpipe.cli import main
from rfpipe.frame import FrameKind, RFFrame
from rfpipe.usrf import read_frame, write_frame

TINY_PHANTOM_JSON = {
    "width_m": 0.02,
    "depth_m": 0.02,
    "scatterer_density": 0.5,
    "cysts": [{"x_m": 0.0, "z_m": 0.010, "r_m": 0.002}],
    "point_target": {"x_m": 0.0, "z_m": 0.014, "gain_db": 40.0},
    "seed": 5,
}


@pytest.fixture
def phantom_file(tmp_path):
    path = tmp_path / "phantom.json"
    path.write_text(json.dumps(TINY_PHANTOM_JSON))
    return path


def write_zero_frame(path, shape=(32, 4)):
    frame = RFFrame(
        kind=FrameKind.CHANNEL_DATA,
        samples=np.zeros(shape, dtype=np.float32),
        fs=20.832e6,
        f0=5.208e6,
        c=1540.0,
    )
    write_frame(frame, path)


def run_pipeline_to_pw(tmp_path, phantom_file, seed=3):
    fsa = tmp_path / "fsa.usrf"
    ab = tmp_path / "ab.json"
    pw = tmp_path / "pw.usrf"
    assert main(["simulate-fsa", "--phantom", str(phantom_file), "--elements", "8",
                 "--out", str(fsa)]) == 0
    assert main(["gen-aberration", "--elements", "8", "--rms-ns", "40", "--corr-len", "2",
                 "--seed", str(seed), "--out", str(ab)]) == 0
    assert main(["synth-pw", "--fsa", str(fsa), "--aberration", str(ab), "--out", str(pw)]) == 0
    return fsa, ab, pw


def test_simulate_fsa_happy_path(tmp_path, phantom_file, capsys):
    out = tmp_path / "fsa.usrf"
    code = main(["simulate-fsa", "--phantom", str(phantom_file), "--elements", "8",
                 "--out", str(out)])
    assert code == 0
    frame = read_frame(out)
    assert frame.kind is FrameKind.FSA_TENSOR
    assert frame.n1 == frame.n2 == 8


def test_normalize_all_zero_is_domain_error(tmp_path, capsys):
    src = tmp_path / "zero.usrf"
    write_zero_frame(src)
    code = main(["normalize", "--method", "robust", "--in", str(src),
                 "--out", str(tmp_path / "out.usrf")])
    assert code == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("E_ALL_ZERO:")
    assert "\n" not in err


def test_missing_input_is_io_error(tmp_path, capsys):
    code = main(["normalize", "--method", "maxabs", "--in", str(tmp_path / "nope.usrf"),
                 "--out", str(tmp_path / "out.usrf")])
    assert code == 1
    assert capsys.readouterr().err.startswith("E_IO:")


def test_unknown_flag_is_usage_error(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "rfpipe.cli", "normalize", "--bogus", "x"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2


def test_help_lists_subcommands():
    proc = subprocess.run(
        [sys.executable, "-m", "rfpipe.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    for name in ("simulate-fsa", "gen-aberration", "synth-pw", "downsample", "normalize",
                 "beamform", "analyze", "dataset", "repro"):
        assert name in proc.stdout


def test_pipeline_normalize_and_compare(tmp_path, phantom_file, capsys):
    _, _, pw = run_pipeline_to_pw(tmp_path, phantom_file)
    norm = tmp_path / "norm.usrf"
    assert main(["normalize", "--method", "robust", "--in", str(pw), "--out", str(norm)]) == 0
    robust_frame = read_frame(norm)
    assert abs(float(np.std(np.asarray(robust_frame.samples, dtype=np.float64))) - 1.0) < 1e-5

    mask = tmp_path / "mask.json"
    mask.write_text(json.dumps({"column": "middle", "include_sample_intervals": [[150, 600]]}))
    metrics = tmp_path / "metrics.json"
    assert main(["analyze", "compare", "--a", str(norm), "--b", str(norm),
                 "--mask", str(mask), "--metrics", str(metrics)]) == 0
    data = json.loads(metrics.read_text())
    assert set(data) == {"amplitude_ratio", "overlap_error"}
    assert data["amplitude_ratio"] == 1.0 and data["overlap_error"] == 0.0


def test_dataset_stats_and_standardize(tmp_path, capsys):
    a, b = tmp_path / "a.usrf", tmp_path / "b.usrf"
    frame_a = RFFrame(kind=FrameKind.CHANNEL_DATA, samples=np.zeros((2, 1), dtype=np.float32),
                      fs=1.0, f0=0.5, c=1540.0)
    frame_b = RFFrame(kind=FrameKind.CHANNEL_DATA, samples=np.full((2, 1), 2.0, dtype=np.float32),
                      fs=1.0, f0=0.5, c=1540.0)
    write_frame(frame_a, a)
    write_frame(frame_b, b)
    stats_path = tmp_path / "stats.json"
    assert main(["dataset-stats", "--out", str(stats_path), str(a), str(b)]) == 0
    stats = json.loads(stats_path.read_text())
    assert stats == {"mean": 1.0, "std": 1.0, "n_samples": 4}

    out = tmp_path / "std.usrf"
    assert main(["normalize", "--method", "standardize", "--in", str(a),
                 "--stats", str(stats_path), "--out", str(out)]) == 0
    assert np.array_equal(read_frame(out).samples.ravel(), [-1.0, -1.0])


def test_downsample_updates_header(tmp_path):
    src = tmp_path / "hi.usrf"
    t = np.arange(4096) / 104.16e6
    frame = RFFrame(kind=FrameKind.CHANNEL_DATA,
                    samples=np.cos(2 * np.pi * 5.208e6 * t).astype(np.float32),
                    fs=104.16e6, f0=5.208e6, c=1540.0)
    write_frame(frame, src)
    out = tmp_path / "lo.usrf"
    assert main(["downsample", "--in", str(src), "--factor", "5", "--out", str(out)]) == 0
    assert read_frame(out).fs == 20.832e6


def test_beamform_outputs(tmp_path, phantom_file):
    _, _, pw = run_pipeline_to_pw(tmp_path, phantom_file)
    img = tmp_path / "img.usrf"
    bmode = tmp_path / "bmode.usrf"
    pgm = tmp_path / "img.pgm"
    assert main(["beamform", "--in", str(pw), "--elements", "8",
                 "--width", "0.004", "--z0", "0.006", "--z1", "0.016",
                 "--out", str(img), "--bmode-out", str(bmode), "--pgm-out", str(pgm)]) == 0
    assert read_frame(img).kind is FrameKind.IMAGE
    assert pgm.read_bytes().startswith(b"P5\n")
    grid = read_frame(bmode).samples
    assert grid.max() == 0.0 and grid.min() >= -50.0


def test_analyze_contrast(tmp_path, phantom_file):
    _, _, pw = run_pipeline_to_pw(tmp_path, phantom_file)
    bmode = tmp_path / "bmode.usrf"
    assert main(["beamform", "--in", str(pw), "--elements", "8",
                 "--width", "0.008", "--z0", "0.006", "--z1", "0.016",
                 "--bmode-out", str(bmode)]) == 0
    metrics = tmp_path / "contrast.json"
    assert main(["analyze", "contrast", "--bmode", str(bmode),
                 "--cyst", "0", "0.010", "0.0015",
                 "--background", "0", "0.010", "0.0025", "0.0035",
                 "--metrics", str(metrics)]) == 0
    data = json.loads(metrics.read_text())
    assert "contrast_db" in data


def test_analyze_column_and_histogram(tmp_path, phantom_file):
    _, _, pw = run_pipeline_to_pw(tmp_path, phantom_file)
    col_csv = tmp_path / "col.csv"
    assert main(["analyze", "column", "--in", str(pw), "--col", "middle",
                 "--out", str(col_csv)]) == 0
    header = col_csv.read_text().splitlines()[0]
    assert header == "sample_index,time_s,value"

    hist_csv = tmp_path / "hist.csv"
    assert main(["analyze", "histogram", "--in", str(pw), "--bins", "21", "--symmetric",
                 "--out", str(hist_csv)]) == 0
    rows = hist_csv.read_text().strip().splitlines()
    assert rows[0] == "bin_left,bin_right,count"
    assert len(rows) == 22


def test_gen_aberration_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["gen-aberration", "--elements", "16", "--rms-ns", "50",
                     "--seed", "9", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_deterministic_across_thread_flag(tmp_path, phantom_file):
    outs = []
    for threads, name in ((1, "one.usrf"), (8, "many.usrf")):
        out = tmp_path / name
        assert main(["simulate-fsa", "--phantom", str(phantom_file), "--elements", "8",
                     "--threads", str(threads), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_threads_env_fallback(tmp_path, phantom_file, monkeypatch):
    out = tmp_path / "env.usrf"
    monkeypatch.setenv("RFPIPE_THREADS", "4")
    assert main(["simulate-fsa", "--phantom", str(phantom_file), "--elements", "8",
                 "--out", str(out)]) == 0
    ref = tmp_path / "ref.usrf"
    monkeypatch.delenv("RFPIPE_THREADS")
    assert main(["simulate-fsa", "--phantom", str(phantom_file), "--elements", "8",
                 "--out", str(ref)]) == 0
    assert out.read_bytes() == ref.read_bytes()


def test_dataset_generate_cli(tmp_path, phantom_file):
    out_dir = tmp_path / "corpus"
    assert main(["dataset", "generate", "--phantom", str(phantom_file), "--elements", "8",
                 "--versions", "3", "--seed", "7", "--epochs", "4",
                 "--out-dir", str(out_dir)]) == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["n_versions"] == 3
    assert len(manifest["pairing"]["epochs"]) == 4
