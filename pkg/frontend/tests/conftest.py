"""Shared fixtures: real table sets produced through the analysis CLI.

The renderer consumes only CSV files, so the fixtures shell out to the
``sharpfid`` command line exactly as a user would, once per session, with
reduced sample counts for the sampled figures.
"""

import subprocess
import sys

import pytest

SAMPLED = {4: "20000", 6: "50000", 9: "30000"}


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("tables")
    for fid in range(1, 10):
        cmd = [sys.executable, "-m", "sharpfid.cli", "figure", str(fid),
               "--out", str(out), "--seed", "0"]
        if fid in SAMPLED:
            cmd += ["--samples", SAMPLED[fid]]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, f"table generation failed for figure {fid}: {proc.stderr}"
    return out
