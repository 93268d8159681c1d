import subprocess
import sys

import pytest


def generate_bank(path, kind, n=32, t_max=1000, sigma2=1e6):
    """Produce a bank through the exporting tool's CLI (the external
    interface this harness consumes)."""
    args = [
        sys.executable, "-m", "unhippo.cli", "gen-init",
        "--kind", kind, "--n", str(n), "--t-max", str(t_max),
        "--sigma2", str(sigma2), "--out", str(path),
    ]
    subprocess.run(args, check=True, capture_output=True)
    return path


@pytest.fixture(scope="session")
def bank_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("banks")
    return {
        "hippo": generate_bank(root / "hippo.unh", "hippo"),
        "unhippo": generate_bank(root / "unhippo.unh", "unhippo"),
    }
