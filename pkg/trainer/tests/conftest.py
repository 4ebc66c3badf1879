import json
import subprocess
import sys

import pytest
import torch

torch.set_num_threads(2)


def rfpipe(*args):
    subprocess.run(
        [sys.executable, "-m", "rfpipe.cli", *map(str, args)],
        check=True,
        capture_output=True,
    )


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """3-version 16-element corpus for smoke tests (seconds to build)."""
    root = tmp_path_factory.mktemp("tiny_corpus")
    phantom = root / "phantom.json"
    phantom.write_text(
        json.dumps(
            {
                "scatterer_density": 0.5,
                "cysts": [{"x_m": -0.005, "z_m": 0.020, "r_m": 0.002}],
                "point_target": {"x_m": 0.0, "z_m": 0.027, "gain_db": 40.0},
                "seed": 13,
            }
        )
    )
    out = root / "corpus"
    rfpipe(
        "dataset", "generate", "--phantom", phantom, "--elements", 16,
        "--versions", 3, "--rms-ns", 50, "--corr-len", 2, "--seed", 6,
        "--epochs", 8, "--threads", 2, "--out-dir", out,
    )
    return out / "manifest.json"
