import json

import pytest

from misodetect.cli import main

from .conftest import separable_text_samples, write_jsonl


def run_cli(capsys, *argv) -> dict | list:
    assert main(list(argv)) == 0
    captured = capsys.readouterr()
    return json.loads(captured.out)


def test_wilcoxon_command(capsys):
    out = run_cli(capsys, "wilcoxon", "--x", "2,3,4,5,6,7", "--y", "1,1,1,1,1,1")
    assert out["statistic"] == 21.0
    assert out["p_value"] == pytest.approx(0.03125)
    assert out["p_display"] == "0.031"
    assert out["n_nonzero"] == 6


def test_cuq_command(capsys, tmp_path):
    header = "participant_id," + ",".join(f"item_{i}" for i in range(1, 17))
    path = tmp_path / "cuq.csv"
    path.write_text(header + "\np1," + ",".join(["3"] * 16) + "\n")
    out = run_cli(capsys, "cuq", "--input", str(path))
    assert out["scores"]["p1"] == 50.0
    assert out["mean"] == 50.0


def test_ueq_command(capsys, tmp_path):
    header = "participant_id," + ",".join(f"item_{i}" for i in range(1, 27))
    path = tmp_path / "ueq.csv"
    path.write_text(header + "\np1," + ",".join(["4"] * 26) + "\n")
    out = run_cli(capsys, "ueq", "--input", str(path))
    assert out["overall"]["p1"] == 0
    assert out["dimensions"]["stimulation"]["mean"] == 0


def test_stub_registry_and_explain_roundtrip(capsys, tmp_path):
    out = run_cli(capsys, "stub-registry", "--out", str(tmp_path / "reg"))
    config = json.loads((tmp_path / "reg" / "config.json").read_text())
    assert len(config["registry"]) == 4

    report = run_cli(
        capsys,
        "explain",
        "--checkpoint",
        str(tmp_path / "reg" / "stub_mbert"),
        "--text",
        "aunt sagging saree",
        "--method",
        "kernel_shap",
    )
    tokens = report[0]["attribution_report"]["tokens"]
    assert {t["surface"] for t in tokens} == {"aunt", "sagging", "saree"}


def test_train_text_command(capsys, tmp_path):
    from misodetect.corpus import sample_to_record

    data = tmp_path / "train.jsonl"
    write_jsonl(data, [sample_to_record(s, "text") for s in separable_text_samples(32)])
    out = run_cli(
        capsys,
        "train-text",
        "--train",
        str(data),
        "--out",
        str(tmp_path / "ckpt"),
        "--learning-rate",
        "1e-3",
        "--epochs",
        "6",
    )
    assert (tmp_path / "ckpt" / "model.json").exists()
    assert 0.0 <= out["validation"]["binary_macro_f1"] <= 1.0
