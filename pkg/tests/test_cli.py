import csv

import numpy as np
import pytest

from atfs.cli import CSV_SCHEMA, main
from atfs.fixtures import face_image
from atfs.imageio import load_png, save_png


def _read_report(path):
    with open(path) as fh:
        assert fh.readline().strip() == CSV_SCHEMA
        return list(csv.DictReader(fh))


def test_attack_on_fixture_respects_budget(tmp_path):
    out = tmp_path / "run"
    rc = main(["attack", "--out-dir", str(out), "--steps", "25", "--eps", "6"])
    assert rc == 0
    row = _read_report(out / "report.csv")[0]
    assert float(row["linf_pre_quant"]) <= 6.0 / 255.0 + 1e-12
    adv = load_png(str(out / "adv.png"))
    clean = face_image(0)
    # PNG quantization adds at most half a level on top of the budget
    assert np.max(np.abs(adv - clean)) <= 6.0 / 255.0 + 0.5 / 255.0 + 1e-12


def test_reruns_are_byte_identical(tmp_path):
    args = ["attack", "--steps", "20", "--seed", "3"]
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out-dir", str(d1)]) == 0
    assert main(args + ["--out-dir", str(d2)]) == 0
    for name in ("report.csv", "trace.csv", "adv.png"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_zero_steps_outputs_input(tmp_path):
    out = tmp_path / "zero"
    assert main(["attack", "--out-dir", str(out), "--steps", "0"]) == 0
    row = _read_report(out / "report.csv")[0]
    assert float(row["linf_pre_quant"]) == 0.0
    assert float(row["l2_pre_quant"]) == 0.0
    quantized = np.floor(face_image(0) * 255.0 + 0.5) / 255.0
    assert np.array_equal(load_png(str(out / "adv.png")), quantized)


def test_methods_produce_different_images(tmp_path):
    d1, d2 = tmp_path / "atfs", tmp_path / "naive"
    assert main(["attack", "--out-dir", str(d1), "--steps", "10"]) == 0
    assert main(["attack", "--out-dir", str(d2), "--steps", "10",
                 "--method", "naive"]) == 0
    assert (d1 / "adv.png").read_bytes() != (d2 / "adv.png").read_bytes()


def test_sweep_singleton_matches_attack(tmp_path):
    d1, d2 = tmp_path / "single", tmp_path / "sweep"
    assert main(["attack", "--out-dir", str(d1), "--steps", "10"]) == 0
    assert main(["sweep-budget", "--out-dir", str(d2), "--steps", "10",
                 "--eps-list", "6"]) == 0
    r1 = _read_report(d1 / "report.csv")[0]
    r2 = _read_report(d2 / "report.csv")[0]
    assert r1 == r2


def test_sweep_rows_carry_requested_eps(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep-budget", "--out-dir", str(out), "--steps", "5",
                 "--eps-list", "2,4,8,16"]) == 0
    rows = _read_report(out / "report.csv")
    assert [float(r["eps"]) for r in rows] == [v / 255.0 for v in (2, 4, 8, 16)]


def test_robustness_identity_rescale_full_retention(tmp_path):
    out = tmp_path / "rob"
    assert main(["robustness", "--out-dir", str(out), "--steps", "20",
                 "--transforms", "rescale:1.0,jpeg:75"]) == 0
    with open(out / "robustness.csv") as fh:
        fh.readline()
        rows = list(csv.DictReader(fh))
    by_label = {r["transform"]: r for r in rows}
    assert abs(float(by_label["rescale:1.0"]["retention_pct"]) - 100.0) < 1e-9


def test_robustness_empty_transforms_rejected(tmp_path):
    rc = main(["robustness", "--out-dir", str(tmp_path / "x"),
               "--transforms", ""])
    assert rc == 1


def test_conflict_outputs_both_loss_kinds(tmp_path):
    out = tmp_path / "conf"
    assert main(["conflict", "--out-dir", str(out), "--num-images", "3"]) == 0
    with open(out / "conflict.csv") as fh:
        fh.readline()
        rows = list(csv.DictReader(fh))
    assert [r["loss_kind"] for r in rows] == ["deviation", "alignment"]
    assert all(int(r["dimension"]) == 3072 for r in rows)


def test_gen_pattern_round_trip(tmp_path):
    path = tmp_path / "p.png"
    assert main(["gen-pattern", "--spec", "stripes:8", "--size", "32",
                 "--out", str(path)]) == 0
    img = load_png(str(path))
    assert img.shape == (3, 32, 32)
    assert set(np.unique(img)) == {0.0, 1.0}


def test_file_input_and_target(tmp_path):
    xp = tmp_path / "x.png"
    tp = tmp_path / "t.png"
    save_png(face_image(1), str(xp))
    save_png(face_image(2), str(tp))
    out = tmp_path / "filerun"
    rc = main(["attack", "--input", f"file:{xp}", "--target", str(tp),
               "--steps", "3", "--out-dir", str(out)])
    assert rc == 0


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("steps=4\nseed=9\n# comment\nmethod=naive\n")
    d1 = tmp_path / "c1"
    assert main(["attack", "--config", str(cfg), "--out-dir", str(d1),
                 "--method", "atfs"]) == 0
    row = _read_report(d1 / "report.csv")[0]
    assert row["method"] == "atfs"  # flag wins over file
    assert row["steps"] == "4" and row["seed"] == "9"


def test_usage_errors_exit_1(tmp_path):
    assert main(["attack", "--input", "file:/does/not/exist.png"]) == 1
    assert main(["attack", "--eps", "0"]) == 1
    assert main(["attack", "--steps", "-3"]) == 1
    assert main(["attack", "--models", ""]) == 1
    assert main(["attack", "--input", "fixture:99"]) == 1
    assert main(["sweep-budget", "--eps-list", ""]) == 1
    assert main(["attack", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["bogus"]) == 1


def test_jpeg_quality_retention_ordering():
    # milder compression should preserve more of the attack's loss reduction
    from atfs.attack import AttackConfig, evaluate_alignment, precompute_targets, run_attack
    from atfs.robustness import jpeg_approx
    from conftest import standard_extractors, standard_target

    target = standard_target()
    hi, lo = [], []
    for seed in range(10):
        extractors = standard_extractors(seed)
        x = face_image(seed)
        targets = precompute_targets(extractors, target)
        _, tot0 = evaluate_alignment(extractors, x, targets)
        x_adv, _ = run_attack(extractors, x, target,
                              AttackConfig(steps=40, seed=seed))
        for quality, acc in ((100, hi), (30, lo)):
            _, tot = evaluate_alignment(extractors, jpeg_approx(x_adv, quality),
                                        targets)
            acc.append(tot0 - tot)
    assert float(np.mean(hi)) > float(np.mean(lo))


def test_runtime_errors_exit_2(tmp_path):
    # single_pgd with two extractors fails inside the attack machinery
    rc = main(["attack", "--method", "single", "--steps", "1",
               "--out-dir", str(tmp_path / "r")])
    assert rc == 2
