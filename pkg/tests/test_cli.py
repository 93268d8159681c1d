import numpy as np
import pytest

import unhippo as uh
from unhippo.cli import denoise_signal, main, shifted_times


def run(args):
    return main([str(a) for a in args])


class TestGenInit:
    def test_writes_structurally_complete_bank(self, tmp_path):
        out = tmp_path / "b.unh"
        assert run(["gen-init", "--kind", "unhippo", "--n", 8, "--t-max", 16, "--out", out]) == 0
        tensors, meta = uh.read_container(out)
        assert len(tensors) == 32
        assert meta["n"] == 8 and meta["t_max"] == 16 and meta["kind"] == "unhippo"

    def test_zero_n_is_usage_error(self, tmp_path):
        assert run(["gen-init", "--kind", "unhippo", "--n", 0, "--out", tmp_path / "x"]) == 2

    def test_closed_form_gated_to_unhippo(self, tmp_path):
        args = ["gen-init", "--kind", "hippo", "--scheme", "closed_form", "--out", tmp_path / "x"]
        assert run(args) == 2

    def test_unknown_flag_is_usage_error(self, tmp_path):
        assert run(["gen-init", "--kind", "unhippo", "--frobnicate", "--out", tmp_path / "x"]) == 2

    def test_hippo_bank_default_scheme(self, tmp_path):
        out = tmp_path / "h.unh"
        assert run(["gen-init", "--kind", "hippo", "--n", 4, "--t-max", 3, "--out", out]) == 0
        _, meta = uh.read_container(out)
        assert meta["scheme"] == "trapezoidal_lssl"


class TestDenoise:
    def test_polynomial_tracking(self, tmp_path, capsys):
        # noise-free polynomial of degree < n: the online estimate locks on
        taus = np.linspace(0.0, 1.0, 2000)
        coef = np.array([0.0, 1.0, 0.3, 0.8, -0.5, 0.2, -0.1, 0.05])
        clean = np.polyval(coef[::-1], taus)
        trace = uh.SignalTrace(taus, clean, clean.copy(), rho=0.0, seed=0)
        src = tmp_path / "poly.csv"
        uh.write_trace(src, trace)
        out = tmp_path / "recon.csv"
        assert run(["denoise", "--input", src, "--kind", "hippo", "--n", 8, "--out", out]) == 0
        summary = capsys.readouterr().out
        mse_clean = float(summary.split("mse_clean=")[1].split()[0])
        assert mse_clean < 1e-4
        header, first = out.read_text().splitlines()[:2]
        assert header == "tau,recon"
        assert len(first.split(",")) == 2

    def test_huge_sigma2_ignores_data(self, tmp_path, capsys):
        trace = uh.add_noise(uh.sample_gp(250, 10.0, 1.0, 5), 0.1, 6)
        src = tmp_path / "t.csv"
        uh.write_trace(src, trace)
        args = [
            "denoise", "--input", src, "--kind", "unhippo", "--n", 64,
            "--sigma2", 1e18, "--out", tmp_path / "r.csv",
        ]
        assert run(args) == 0
        mse_clean = float(capsys.readouterr().out.split("mse_clean=")[1].split()[0])
        zero_mse = uh.mse(np.zeros_like(trace.clean), trace.clean)
        assert abs(mse_clean - zero_mse) < 0.05 * zero_mse

    def test_unhippo_beats_hippo_on_noisy_trace(self, tmp_path):
        trace = uh.add_noise(uh.sample_gp(250, 10.0, 1.0, 3), 0.1, 4)
        rec_h = denoise_signal(trace.taus, trace.noisy, 64, "hippo")
        rec_u = denoise_signal(trace.taus, trace.noisy, 64, "unhippo")
        assert uh.mse(rec_u, trace.clean) < uh.mse(rec_h, trace.clean)

    def test_malformed_csv_is_usage_error(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("nope\n1\n")
        assert run(["denoise", "--input", src, "--kind", "hippo", "--out", tmp_path / "r"]) == 2

    def test_missing_file_is_usage_error(self, tmp_path):
        args = ["denoise", "--input", tmp_path / "none.csv", "--kind", "hippo", "--out", tmp_path / "r"]
        assert run(args) == 2


class TestShiftedTimes:
    def test_grid_starting_at_zero(self):
        taus = np.linspace(0.0, 1.0, 5)
        times = shifted_times(taus)
        assert times[0] > 0
        assert np.allclose(np.diff(times), np.diff(taus))

    def test_uniform_grid_has_integer_ratios(self):
        times = shifted_times(np.linspace(0.0, 10.0, 250))
        ratios = times[1:] / times[:-1]
        expected = np.arange(2, 251) / np.arange(1, 250)
        assert np.allclose(ratios, expected, rtol=1e-12)


class TestFigures:
    @pytest.mark.parametrize(
        "which,files",
        [
            ("legendre", ["legendre_basis.csv", "legendre_projection.csv", "legendre.svg"]),
            ("extrapolation", ["extrapolation.csv", "extrapolation.svg"]),
            ("comparison", ["comparison.csv", "comparison.svg"]),
            ("sigma-effect", ["sigma_effect.csv", "sigma_effect.svg"]),
        ],
    )
    def test_emits_expected_files(self, tmp_path, which, files):
        out = tmp_path / which
        assert run(["figures", "--which", which, "--out", out, "--seed", 3]) == 0
        for name in files:
            assert (out / name).exists() and (out / name).stat().st_size > 0

    def test_unknown_selector_is_usage_error(self, tmp_path):
        assert run(["figures", "--which", "bogus", "--out", tmp_path]) == 2

    def test_discretizations_has_eight_curves(self, tmp_path):
        out = tmp_path / "disc"
        assert run(["figures", "--which", "discretizations", "--out", out, "--seed", 3]) == 0
        header = (out / "discretizations.csv").read_text().splitlines()[0].split(",")
        assert len(header) == 9  # step + 4 schemes x 2 kinds
        kinds = {name.split("_")[0] for name in header[1:]}
        assert kinds == {"hippo", "unhippo"}

    def test_time_invariance_compression_factor(self, tmp_path):
        out = tmp_path / "ti"
        assert run(["figures", "--which", "time-invariance", "--out", out, "--seed", 3]) == 0
        rows = (out / "time_invariance_factor.csv").read_text().splitlines()
        last = rows[-1].split(",")
        assert int(float(last[0])) == 250
        assert abs(float(last[1]) - (499.0 / 500.0) ** 250) < 1e-6

    def test_deterministic_given_seed(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run(["figures", "--which", "legendre", "--out", out_a, "--seed", 7])
        run(["figures", "--which", "legendre", "--out", out_b, "--seed", 7])
        for name in ("legendre_basis.csv", "legendre_projection.csv", "legendre.svg"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_env_seed_override(self, tmp_path, monkeypatch):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        monkeypatch.setenv("UNHIPPO_SEED", "5")
        run(["figures", "--which", "legendre", "--out", out_a])
        monkeypatch.setenv("UNHIPPO_SEED", "6")
        run(["figures", "--which", "legendre", "--out", out_b])
        a = (out_a / "legendre_projection.csv").read_bytes()
        b = (out_b / "legendre_projection.csv").read_bytes()
        assert a != b


class TestBench:
    def test_runs_and_reports(self, capsys):
        assert run(["bench-disc", "--n", 32, "--reps", 3]) == 0
        out = capsys.readouterr().out
        for scheme in ("closed_form", "trapezoidal", "forward", "backward"):
            assert f"scheme={scheme} median_ms=" in out

    def test_bad_arguments(self):
        assert run(["bench-disc", "--n", 0]) == 2
