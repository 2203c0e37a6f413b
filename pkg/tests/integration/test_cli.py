"""Command-line surface: exit codes, files written and printed summaries."""

import json

import numpy as np
import pytest
from PIL import Image

from main import EXIT_RUNTIME, EXIT_USAGE, main
from settings import load_config
from training.checkpoint import save_checkpoint
from training.trainer import init_state


def _pixels(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


@pytest.fixture
def zero_checkpoint(tiny_config_file, tmp_path):
    """Checkpoint whose generator returns the target unchanged."""
    cfg = load_config(tiny_config_file)
    state = init_state(cfg)
    state.generator.zero_output_projection()
    return save_checkpoint(tmp_path / "zero", state, cfg)


class TestUsage:

    def test_missing_required_option(self):
        assert main(["align", "--out", "x.png"]) == EXIT_USAGE

    def test_unknown_flag(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path), "--colour", "red"]) == EXIT_USAGE

    def test_unknown_command(self):
        assert main(["paint"]) == EXIT_USAGE

    def test_unknown_config_key(self, capsys):
        assert main(["show-config", "--set", "losses.style=2"]) == EXIT_RUNTIME
        assert "unknown config key" in capsys.readouterr().out


class TestCommands:

    def test_show_config_threads_the_seed(self, capsys):
        assert main(["show-config", "--seed", "5"]) == 0
        out = capsys.readouterr().out
        assert "config digest" in out
        assert "scenario.seed = 5" in out

    def test_synth(self, tmp_path, capsys):
        assert main(["synth", "--out", str(tmp_path), "--identities", "4", "--expressions", "3", "--size", "64"]) == 0
        lines = (tmp_path / "manifest.jsonl").read_text().splitlines()
        assert len(lines) == 12
        assert json.loads(lines[0])["image_path"] == "images/id000_ex00.png"
        assert "12" in capsys.readouterr().out

    def test_align(self, synthetic_dir, tmp_path, capsys):
        out = tmp_path / "crop.png"
        code = main([
            "align",
            "--input", str(synthetic_dir / "images" / "id001_ex02.png"),
            "--landmarks", str(synthetic_dir / "landmarks" / "id001_ex02.json"),
            "--out", str(out),
            "--size", "128",
        ])
        assert code == 0
        assert _pixels(out).shape == (128, 128, 3)
        assert json.loads(out.with_suffix(".json").read_text())["layout"] == "synthetic18"
        assert "anchor residual" in capsys.readouterr().out

    def test_align_bad_landmarks(self, synthetic_dir, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps({"layout": "synthetic18", "points": [[0, 0]] * 5}))
        code = main([
            "align",
            "--input", str(synthetic_dir / "images" / "id000_ex00.png"),
            "--landmarks", str(broken),
            "--out", str(tmp_path / "crop.png"),
        ])
        assert code == EXIT_RUNTIME

    def test_train_zero_epochs(self, synthetic_dir, tiny_config_file, tmp_path):
        run = tmp_path / "run"
        code = main(["train", "--manifest", str(synthetic_dir), "--out", str(run), "--epochs", "0",
                     "--config", str(tiny_config_file)])
        assert code == 0
        assert (run / "checkpoint" / "metadata.json").is_file()
        assert (run / "loss_log.csv").read_text().startswith("step,lr,L_identity")

    def test_reenact_with_zero_projection_returns_target(self, synthetic_dir, zero_checkpoint, tmp_path):
        out = tmp_path / "out.png"
        target = synthetic_dir / "images" / "id002_ex00.png"
        code = main([
            "reenact",
            "--source", str(synthetic_dir / "images" / "id000_ex01.png"),
            "--source-landmarks", str(synthetic_dir / "landmarks" / "id000_ex01.json"),
            "--target", str(target),
            "--checkpoint", str(zero_checkpoint),
            "--out", str(out),
            "--triptych",
        ])
        assert code == 0
        np.testing.assert_array_equal(_pixels(out), _pixels(target))
        assert _pixels(tmp_path / "out_triptych.png").shape == (64, 192, 3)

    def test_reenact_align_needs_target_landmarks(self, synthetic_dir, zero_checkpoint, tmp_path):
        code = main([
            "reenact",
            "--source", str(synthetic_dir / "images" / "id000_ex01.png"),
            "--source-landmarks", str(synthetic_dir / "landmarks" / "id000_ex01.json"),
            "--target", str(synthetic_dir / "images" / "id002_ex00.png"),
            "--checkpoint", str(zero_checkpoint),
            "--out", str(tmp_path / "out.png"),
            "--align",
        ])
        assert code == EXIT_RUNTIME

    def test_evaluate_identity_self_pairs(self, synthetic_dir, tiny_config_file, tmp_path, capsys):
        report = tmp_path / "report.json"
        code = main(["evaluate", "--manifest", str(synthetic_dir), "--identity", "--pairs", "self",
                     "--report", str(report), "--config", str(tiny_config_file)])
        assert code == 0
        out = capsys.readouterr().out
        assert "0.00%" in out and "1.00" in out
        data = json.loads(report.read_text())
        assert data["scenario"] == "self"
        assert data["sample_count"] == 12
        assert data["mean_nmse"] == pytest.approx(0.0, abs=1e-12)

    def test_evaluate_checkpoint(self, synthetic_dir, zero_checkpoint, tmp_path):
        report = tmp_path / "report.json"
        code = main(["evaluate", "--manifest", str(synthetic_dir), "--checkpoint", str(zero_checkpoint),
                     "--pairs", "self", "--num-pairs", "3", "--report", str(report), "--show-reference"])
        assert code == 0
        data = json.loads(report.read_text())
        assert data["sample_count"] == 3
        assert data["mean_csim"] == pytest.approx(1.0, abs=1e-6)

    def test_evaluate_empty_manifest(self, tmp_path, tiny_config_file):
        (tmp_path / "manifest.jsonl").write_text("")
        code = main(["evaluate", "--manifest", str(tmp_path), "--identity", "--config", str(tiny_config_file),
                     "--report", str(tmp_path / "report.json")])
        assert code == EXIT_RUNTIME
        assert not (tmp_path / "report.json").exists()

    def test_evaluate_needs_a_generator(self, synthetic_dir, tmp_path):
        assert main(["evaluate", "--manifest", str(synthetic_dir), "--report", str(tmp_path / "r.json")]) == EXIT_RUNTIME


def test_pipeline_is_deterministic(tiny_config_file, tmp_path):
    for name in ("a", "b"):
        data = tmp_path / name / "data"
        assert main(["synth", "--out", str(data), "--identities", "3", "--expressions", "2", "--size", "64",
                     "--seed", "3"]) == 0
        assert main(["train", "--manifest", str(data), "--out", str(tmp_path / name / "run"),
                     "--config", str(tiny_config_file), "--epochs", "1", "--seed", "3"]) == 0
        assert main(["evaluate", "--manifest", str(data), "--checkpoint", str(tmp_path / name / "run" / "checkpoint"),
                     "--pairs", "scenario", "--num-pairs", "4", "--report", str(tmp_path / name / "report.json")]) == 0

    for rel in ("data/images/id002_ex01.png", "run/checkpoint/weights.bin", "run/checkpoint/config.txt",
                "run/loss_log.csv", "report.json"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    # one full epoch: 6 faces at batch size 1
    metadata = json.loads((tmp_path / "a" / "run" / "checkpoint" / "metadata.json").read_text())
    assert (metadata["epoch"], metadata["step"]) == (1, 6)
