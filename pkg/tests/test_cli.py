import struct

import pytest

from repository.report_repository import ReportRepository
from routers.cli_router import run

SMALL_DATA = "synthetic:n=16,classes=2,dim=8"


def attack_row(tmp_path, *flags):
    out = tmp_path / "attack.csv"
    assert run(["attack", "--model", "mlp-3x16", "--data", SMALL_DATA, "--batch", "8", "--out", str(out), *flags]) == 0
    (row,) = ReportRepository().read_rows(out)
    return row


def assert_single_error_line(capsys, code):
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    assert err[0].startswith(f"error code={code} ")


def test_zero_steps_is_a_usage_error(capsys):
    assert run(["attack", "--steps", "0"]) == 2
    assert_single_error_line(capsys, 2)


def test_zero_epochs_is_a_usage_error(capsys):
    assert run(["train", "--epochs", "0"]) == 2
    assert_single_error_line(capsys, 2)


def test_unknown_subcommand(capsys):
    assert run(["explode"]) == 2
    assert_single_error_line(capsys, 2)


def test_negative_radius_is_rejected(capsys):
    assert run(["attack", "--data", SMALL_DATA, "--eps", "-0.1"]) == 2
    assert_single_error_line(capsys, 2)


def test_unknown_preset(capsys):
    assert run(["attack", "--model", "resnet50", "--data", SMALL_DATA]) == 2
    assert_single_error_line(capsys, 2)


def test_zero_radius_gives_zero_perturbation(tmp_path):
    row = attack_row(tmp_path, "--eps", "0", "--steps", "1")
    assert float(row["linf"]) == 0.0
    assert row["clean_loss"] == row["final_loss"]


def test_bad_idx_file_exits_with_load_failure(tmp_path, capsys):
    images, labels = tmp_path / "images.idx", tmp_path / "labels.idx"
    images.write_bytes(struct.pack(">4I", 0xDEADBEEF, 1, 2, 2) + bytes(4))
    labels.write_bytes(struct.pack(">2I", 0x801, 1) + bytes(1))
    assert run(["attack", "--data", f"{images},{labels}"]) == 3
    assert_single_error_line(capsys, 3)


def test_missing_checkpoint_exits_with_load_failure(tmp_path, capsys):
    assert run(["attack", "--model", str(tmp_path / "gone.sgck"), "--data", SMALL_DATA]) == 3
    assert_single_error_line(capsys, 3)


def test_missing_bench_spec_exits_with_load_failure(tmp_path, capsys):
    assert run(["bench", "--spec", str(tmp_path / "absent.toml")]) == 3
    assert_single_error_line(capsys, 3)


def test_malformed_bench_spec_is_a_usage_error(tmp_path, capsys):
    spec = tmp_path / "bench.toml"
    spec.write_text("models = [unterminated\n")
    assert run(["bench", "--spec", str(spec)]) == 2
    assert_single_error_line(capsys, 2)


def test_unwritable_report_exits_with_load_failure(tmp_path, capsys):
    argv = ["attack", "--model", "mlp-3x16", "--data", SMALL_DATA, "--steps", "1", "--out", str(tmp_path)]
    assert run(argv) == 3
    assert_single_error_line(capsys, 3)


def test_empty_idx_dataset_exits_with_load_failure(tmp_path, capsys):
    images, labels = tmp_path / "images.idx", tmp_path / "labels.idx"
    images.write_bytes(struct.pack(">4I", 0x803, 0, 4, 4))
    labels.write_bytes(struct.pack(">2I", 0x801, 0))
    assert run(["attack", "--data", f"{images},{labels}"]) == 3
    assert_single_error_line(capsys, 3)


def test_semi_and_full_pgd_give_the_same_perturbation(tmp_path):
    flags = ["--attack", "pgd", "--steps", "50", "--eps", "0.1"]
    semi = attack_row(tmp_path, *flags, "--mode", "semi")
    full = attack_row(tmp_path, *flags, "--mode", "full")
    assert semi["perturbation_sha256"] == full["perturbation_sha256"]
    assert int(full["bwd_flops"]) == 2 * int(semi["bwd_flops"])
    assert int(semi["param_grad_bytes"]) == 0


@pytest.mark.parametrize("attack", ["fgsm", "bim"])
def test_other_attacks_run(tmp_path, attack):
    row = attack_row(tmp_path, "--attack", attack, "--steps", "3", "--eps", "0.05")
    assert float(row["linf"]) <= 0.05


def test_bench_writes_rows_for_both_modes(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    argv = ["bench", "--models", "mlp-2x16-nobias", "--batch", "4", "--K", "2,3", "--repeats", "3",
            "--data", "synthetic:n=8,classes=2,dim=8", "--out", str(out)]
    assert run(argv) == 0
    rows = ReportRepository().read_rows(out)
    assert [(row["K"], row["mode"]) for row in rows] == [("2", "full"), ("2", "semi"), ("3", "full"), ("3", "semi")]
    semi_rows = [row for row in rows if row["mode"] == "semi"]
    assert all(float(row["flop_ratio"]) == 1.5 for row in semi_rows)
    assert all(row["status"] in ("ok", "noisy") for row in semi_rows)
    assert all(row["speedup"] == "" for row in rows if row["mode"] == "full")


def test_bench_rejects_too_few_repeats(capsys):
    assert run(["bench", "--repeats", "2"]) == 2
    assert_single_error_line(capsys, 2)


def test_train_verify_reports_identical_models(tmp_path, capsys):
    save = tmp_path / "trained.sgck"
    argv = ["train", "--model", "mlp-3x16", "--data", "synthetic:n=32,classes=2,dim=8", "--K", "3",
            "--epochs", "2", "--batch", "16", "--verify", "--save", str(save), "--out", str(tmp_path / "train.csv")]
    assert run(argv) == 0
    assert "models identical" in capsys.readouterr().out
    assert save.exists()
    rows = ReportRepository().read_rows(tmp_path / "train.csv")
    assert {row["toggle_semi"] for row in rows} == {"True", "False"}
    assert len(rows) == 4


def test_invalid_environment_exits_before_running(monkeypatch, capsys):
    import main

    monkeypatch.setenv("SEMIGRAD_LOG_LEVEL", "LOUD")
    assert main.main(["attack", "--steps", "1"]) == 2
    err = capsys.readouterr().err
    assert "SEMIGRAD_LOG_LEVEL" in err
