"""Command-line surface: subcommand flows, reproducibility of outputs
and the exit-code table."""

import numpy as np
import pytest

from ssnt.cli import main
from ssnt.fileio import RunManifest, read_diagnostics, read_tensor, write_tensor


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def truth_file(tmp_path):
    path = tmp_path / "truth.ssnt"
    assert run("synth", "--dims", "12,12,4", "--tubal-rank", "2", "--seed", "7", "--out", path) == 0
    return path


class TestSynth:
    def test_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a.ssnt"
        b = tmp_path / "b.ssnt"
        run("synth", "--dims", "30,30,16", "--tubal-rank", "2", "--seed", "7", "--out", a)
        run("synth", "--dims", "30,30,16", "--tubal-rank", "2", "--seed", "7", "--out", b)
        assert a.read_bytes() == b.read_bytes()


class TestComplete:
    def test_full_observation_returns_input(self, tmp_path, truth_file, capsys):
        out = tmp_path / "rec.ssnt"
        code = run(
            "complete", "--input", truth_file, "--sr", "1.0", "--out", out,
            "--tmax", "3", "--seed", "0",
        )
        assert code == 0
        assert np.array_equal(read_tensor(out), read_tensor(truth_file))
        assert "psnr=inf" in capsys.readouterr().out

    def test_seeded_rerun_byte_identical(self, tmp_path, truth_file):
        blobs = []
        for tag in ("a", "b"):
            rec = tmp_path / f"rec_{tag}.ssnt"
            diag = tmp_path / f"diag_{tag}.csv"
            assert run(
                "complete", "--input", truth_file, "--sr", "0.4", "--out", rec,
                "--tmax", "25", "--seed", "3", "--diagnostics", diag,
            ) == 0
            blobs.append((rec.read_bytes(), diag.read_bytes()))
        assert blobs[0] == blobs[1]

    def test_tv_flag_and_manifest(self, tmp_path, truth_file):
        out = tmp_path / "rec.ssnt"
        manifest = tmp_path / "run.json"
        diag = tmp_path / "diag.csv"
        code = run(
            "complete", "--input", truth_file, "--sr", "0.5", "--out", out,
            "--tv", "--tau", "0.2", "--tmax", "10", "--seed", "1",
            "--manifest", manifest, "--diagnostics", diag,
        )
        assert code == 0
        m = RunManifest.load(manifest)
        assert m.command == "tc"
        assert m.config["tau"] == 0.2
        assert m.config["t_max"] == 10
        assert m.metrics is not None
        rows = read_diagnostics(diag)
        assert len(rows) == 10

    def test_obs_mask_path(self, tmp_path, truth_file):
        obs = tmp_path / "obs.ssnt"
        mask = tmp_path / "mask.ssnt"
        assert run(
            "degrade", "--kind", "tc", "--input", truth_file, "--sr", "0.5",
            "--seed", "2", "--obs", obs, "--mask", mask,
        ) == 0
        out = tmp_path / "rec.ssnt"
        assert run("complete", "--obs", obs, "--mask", mask, "--out", out, "--tmax", "5") == 0
        rec = read_tensor(out)
        m = read_tensor(mask)
        assert np.array_equal(rec[m == 1.0], read_tensor(obs)[m == 1.0])

    def test_save_transform(self, tmp_path, truth_file):
        out = tmp_path / "rec.ssnt"
        trans = tmp_path / "f_of_obs.ssnt"
        assert run(
            "complete", "--input", truth_file, "--sr", "0.5", "--out", out,
            "--tmax", "3", "--save-transform", trans,
        ) == 0
        assert read_tensor(trans).shape == (12, 12, 8)


class TestOtherSolvers:
    def test_subtract_outputs_split(self, tmp_path):
        rng = np.random.default_rng(0)
        video = np.clip(rng.uniform(0.2, 0.8, (10, 10, 6)), 0, 1)
        vid = tmp_path / "video.ssnt"
        write_tensor(vid, video)
        bg = tmp_path / "bg.ssnt"
        fg = tmp_path / "fg.ssnt"
        assert run(
            "subtract", "--input", vid, "--background", bg, "--foreground", fg,
            "--tmax", "10", "--seed", "0",
        ) == 0
        assert np.allclose(read_tensor(bg) + read_tensor(fg), video)

    def test_robust_complete_sparse_output(self, tmp_path, truth_file):
        out = tmp_path / "rec.ssnt"
        sp = tmp_path / "sparse.ssnt"
        assert run(
            "robust-complete", "--input", truth_file, "--sr", "0.5",
            "--noise-sr", "0.1", "--out", out, "--sparse", sp,
            "--tmax", "5", "--seed", "1",
        ) == 0
        assert read_tensor(sp).shape == (12, 12, 4)

    def test_sci_roundtrip_files(self, tmp_path, truth_file):
        obs = tmp_path / "meas.ssnt"
        mask = tmp_path / "mask.ssnt"
        assert run(
            "degrade", "--kind", "sci", "--input", truth_file, "--sr", "0.5",
            "--seed", "3", "--obs", obs, "--mask", mask,
        ) == 0
        assert read_tensor(obs).shape == (12, 12, 1)
        out = tmp_path / "rec.ssnt"
        assert run(
            "sci", "--measurement", obs, "--mask", mask, "--out", out, "--tmax", "5",
        ) == 0
        assert read_tensor(out).shape == (12, 12, 4)


class TestMetricsCommand:
    def test_self_comparison(self, tmp_path, truth_file, capsys):
        report = tmp_path / "report.csv"
        assert run("metrics", truth_file, truth_file, "--out", report) == 0
        out = capsys.readouterr().out
        assert "psnr=inf" in out and "ssim=1.0" in out and "sam=0.0" in out
        header, row = report.read_text().strip().split("\n")
        assert header == "psnr,ssim,sam,peak"
        assert row.split(",")[0] == "inf"


class TestAccegyCommand:
    def test_curve_csv(self, tmp_path, truth_file):
        curve = tmp_path / "curve.csv"
        assert run("accegy", truth_file, "--dft", "--out", curve) == 0
        lines = curve.read_text().strip().split("\n")
        assert lines[0] == "fraction,energy_ratio"
        last = lines[-1].split(",")
        assert float(last[0]) == 1.0
        assert float(last[1]) == pytest.approx(1.0, abs=1e-12)


class TestBaselineCommand:
    def test_baseline_recovers(self, tmp_path):
        truth = tmp_path / "truth.ssnt"
        run("synth", "--dims", "16,16,4", "--tubal-rank", "2", "--seed", "4", "--out", truth)
        obs = tmp_path / "obs.ssnt"
        mask = tmp_path / "mask.ssnt"
        run("degrade", "--kind", "tc", "--input", truth, "--sr", "0.6", "--seed", "5",
            "--obs", obs, "--mask", mask)
        out = tmp_path / "rec.ssnt"
        assert run("baseline-tnn", "--obs", obs, "--mask", mask, "--out", out,
                   "--rho", "0.3", "--iters", "200") == 0
        t = read_tensor(truth)
        err = np.linalg.norm(read_tensor(out) - t) / np.linalg.norm(t)
        assert err < 1e-2


class TestConvert:
    def test_csv_roundtrip_without_normalization(self, tmp_path, truth_file):
        csv_path = tmp_path / "x.csv"
        assert run("convert", "--to-csv", truth_file, "--out", csv_path) == 0
        back = tmp_path / "back.ssnt"
        assert run(
            "convert", "--from-csv", csv_path, "--dims", "12,12,4",
            "--out", back, "--no-normalize",
        ) == 0
        assert np.array_equal(read_tensor(back), read_tensor(truth_file))

    def test_ingest_normalizes_with_manifest(self, tmp_path):
        csv_path = tmp_path / "raw.csv"
        values = np.linspace(-5.0, 15.0, 24)
        csv_path.write_text("\n".join(repr(float(v)) for v in values) + "\n")
        out = tmp_path / "x.ssnt"
        manifest = tmp_path / "m.json"
        assert run(
            "convert", "--from-csv", csv_path, "--dims", "2,3,4",
            "--out", out, "--manifest", manifest,
        ) == 0
        t = read_tensor(out)
        assert t.min() == 0.0 and t.max() == 1.0
        m = RunManifest.load(manifest)
        assert m.normalization == {"min": -5.0, "max": 15.0}


class TestExitCodes:
    def test_unknown_flag_is_usage(self, truth_file, capsys):
        assert run("synth", "--dims", "2,2,2", "--out", "x", "--bogus") == 2
        capsys.readouterr()

    def test_missing_file_is_io(self, tmp_path, capsys):
        code = run("metrics", tmp_path / "none.ssnt", tmp_path / "none.ssnt")
        assert code == 3
        assert "error code=3 kind=io" in capsys.readouterr().err

    def test_corrupt_file_is_format(self, tmp_path, truth_file, capsys):
        blob = bytearray(truth_file.read_bytes())
        blob[40] ^= 0xFF
        bad = tmp_path / "bad.ssnt"
        bad.write_bytes(bytes(blob))
        assert run("metrics", bad, bad) == 4
        assert "kind=format" in capsys.readouterr().err

    def test_inconsistent_config_is_config_error(self, tmp_path, truth_file, capsys):
        csv_path = tmp_path / "x.csv"
        run("convert", "--to-csv", truth_file, "--out", csv_path)
        code = run("convert", "--from-csv", csv_path, "--dims", "5,5,5", "--out", tmp_path / "y.ssnt")
        assert code == 5
        assert "kind=config" in capsys.readouterr().err

    def test_shape_mismatch_between_files(self, tmp_path, truth_file, capsys):
        other = tmp_path / "other.ssnt"
        run("synth", "--dims", "6,6,3", "--out", other)
        assert run("metrics", truth_file, other) == 5
        capsys.readouterr()
