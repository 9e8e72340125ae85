import json

import numpy as np
import pytest

from spdlrr import io as spio
from spdlrr.cli import cli_main
from spdlrr.synthetic import rpca_instance, two_class_cube

from conftest import CUBE_LAM, RPCA_LAM


@pytest.fixture()
def demo_dir(tmp_path):
    cube, labels = two_class_cube(seed=0)
    spio.write_cube(cube, str(tmp_path / "cube.json"))
    spio.write_raster(labels.labels, str(tmp_path / "truth.txt"))
    return tmp_path


def classify_args(demo_dir, out_name, extra=()):
    return [
        "classify",
        "--cube",
        str(demo_dir / "cube.json"),
        "--labels",
        str(demo_dir / "truth.txt"),
        "--out-dir",
        str(demo_dir / out_name),
        "--seed",
        "7",
        "--lambda",
        str(CUBE_LAM),
        "--superpixels",
        "4",
        "--delta",
        "0.7",
        "--m-split",
        "2",
        "--percent",
        "0.10",
        *extra,
    ]


class TestExitCodes:
    def test_no_command_is_usage_error(self, capsys):
        assert cli_main([]) == 1

    def test_unknown_flag_is_usage_error(self, capsys):
        assert cli_main(["classify", "--bogus"]) == 1

    def test_missing_required_flag(self, demo_dir, capsys):
        rc = cli_main(
            ["decompose", "--partition", "p.txt", "--out-dir", str(demo_dir / "o")]
        )
        captured = capsys.readouterr()
        assert rc == 1
        assert "cube" in captured.err

    def test_classify_needs_explicit_seed(self, demo_dir, capsys):
        args = classify_args(demo_dir, "out")
        args.remove("--seed")
        args.remove("7")
        assert cli_main(args) == 1

    def test_format_error_is_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "cube.json"
        bad.write_text("{not json")
        rc = cli_main(
            ["segment", "--cube", str(bad), "--out", str(tmp_path / "p.txt")]
        )
        assert rc == 2

    def test_missing_file_is_exit_two(self, tmp_path, capsys):
        rc = cli_main(
            [
                "segment",
                "--cube",
                str(tmp_path / "nope.json"),
                "--out",
                str(tmp_path / "p.txt"),
            ]
        )
        assert rc == 2

    def test_strict_flags_nonconvergence(self, demo_dir, capsys):
        rc = cli_main(
            classify_args(demo_dir, "strict", extra=["--strict", "--max-iter", "2"])
        )
        assert rc == 3

    def test_help_exits_zero(self, capsys):
        assert cli_main(["--help"]) == 0


class TestSegmentCommand:
    def test_raster_is_loadable(self, demo_dir, capsys):
        out = demo_dir / "part.txt"
        rc = cli_main(
            [
                "segment",
                "--cube",
                str(demo_dir / "cube.json"),
                "--out",
                str(out),
                "--superpixels",
                "4",
            ]
        )
        assert rc == 0
        part = spio.load_partition(str(out))
        assert part.count == 4
        assert part.labels.shape == (12, 12)


class TestDecomposeCommand:
    def test_recovers_planted_low_rank(self, tmp_path, capsys):
        x, l0, e0 = rpca_instance(seed=0)
        from spdlrr import HsiCube

        # One 10x20 image whose 100 "bands" hold the synthetic matrix.
        cube = HsiCube(10, 20, x)
        spio.write_cube(cube, str(tmp_path / "cube.json"))
        spio.write_raster(np.zeros((10, 20), int), str(tmp_path / "part.txt"))
        rc = cli_main(
            [
                "decompose",
                "--cube",
                str(tmp_path / "cube.json"),
                "--partition",
                str(tmp_path / "part.txt"),
                "--out-dir",
                str(tmp_path / "out"),
                "--lambda",
                repr(RPCA_LAM),
                "--beta",
                "0",
                "--max-iter",
                "300",
            ]
        )
        assert rc == 0
        restored = spio.load_cube(str(tmp_path / "out" / "L.json"))
        rel = np.linalg.norm(restored.x - l0) / np.linalg.norm(l0)
        assert rel <= 1e-3
        trace_lines = (tmp_path / "out" / "trace.csv").read_text().splitlines()
        assert trace_lines[0] == "iter,r1,r2,objective,mu"
        assert len(trace_lines) > 10


class TestClassifyCommand:
    def test_outputs_and_metrics(self, demo_dir, capsys):
        rc = cli_main(classify_args(demo_dir, "out"))
        assert rc == 0
        out = demo_dir / "out"
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) == {"oa", "aa", "kappa", "per_class", "confusion"}
        assert metrics["oa"] >= 0.95
        for name in ("predictions.txt", "map.pgm", "map.pgm.palette.txt"):
            assert (out / name).exists()
        assert (out / "trace_1.csv").exists() and (out / "trace_3.csv").exists()
        # Predictions carry the source label ids and score cleanly.
        rc = cli_main(
            [
                "metrics",
                str(out / "predictions.txt"),
                str(demo_dir / "truth.txt"),
                "--out",
                str(demo_dir / "scored.json"),
            ]
        )
        assert rc == 0
        scored = json.loads((demo_dir / "scored.json").read_text())
        assert scored["oa"] >= 0.95

    def test_byte_identical_reruns(self, demo_dir, capsys):
        assert cli_main(classify_args(demo_dir, "a")) == 0
        assert cli_main(classify_args(demo_dir, "b")) == 0
        for name in (
            "predictions.txt",
            "map.pgm",
            "map.pgm.palette.txt",
            "metrics.json",
            "trace_1.csv",
            "trace_2.csv",
            "trace_3.csv",
        ):
            a = (demo_dir / "a" / name).read_bytes()
            b = (demo_dir / "b" / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"

    def test_config_file_supplies_defaults_and_flags_override(self, demo_dir, capsys):
        cfg = demo_dir / "run.cfg"
        cfg.write_text(
            "\n".join(
                [
                    f"cube = {demo_dir / 'cube.json'}",
                    f"labels = {demo_dir / 'truth.txt'}",
                    f"out_dir = {demo_dir / 'cfg_out'}",
                    f"lambda = {CUBE_LAM}",
                    "superpixels = 4",
                    "delta = 0.7",
                    "m_split = 2",
                    "percent = 0.10",
                ]
            )
            + "\n"
        )
        rc = cli_main(
            ["classify", "--config", str(cfg), "--seed", "7", "--t-max", "1"]
        )
        assert rc == 0
        out = demo_dir / "cfg_out"
        assert (out / "trace_1.csv").exists()
        assert not (out / "trace_2.csv").exists()  # --t-max flag overrode default


class TestMetricsCommand:
    def test_scores_original_ids_consistently(self, tmp_path, capsys):
        truth = np.array([[0, 2, 2], [5, 5, 2]])
        pred = np.array([[2, 2, 5], [5, 5, 2]])
        spio.write_raster(truth, str(tmp_path / "t.txt"))
        spio.write_raster(pred, str(tmp_path / "p.txt"))
        rc = cli_main(["metrics", str(tmp_path / "p.txt"), str(tmp_path / "t.txt")])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        # 5 labeled pixels, 4 correct; the unlabeled corner is ignored.
        assert payload["oa"] == pytest.approx(0.8)
        assert payload["confusion"] == [[2, 1], [0, 2]]

    def test_shape_mismatch_rejected(self, tmp_path, capsys):
        spio.write_raster(np.ones((2, 2), int), str(tmp_path / "t.txt"))
        spio.write_raster(np.ones((2, 3), int), str(tmp_path / "p.txt"))
        rc = cli_main(["metrics", str(tmp_path / "p.txt"), str(tmp_path / "t.txt")])
        assert rc == 2
