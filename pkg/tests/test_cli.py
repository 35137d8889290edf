import os

import numpy as np
import pytest

from vocstress.cli import main
from vocstress.core import read_archive, validate_session
from vocstress.features import load_dataset_csv
from vocstress.ingest import serialize_line, Marker
from vocstress.sim import ParticipantSpec, simulate_participant


def test_simulate_and_features_and_traineval(tmp_path):
    out = tmp_path / "cohort"
    spec_file = tmp_path / "cohort.cfg"
    spec_file.write_text(
        "n=3\nhigh_reactor_frac=0.5\nsign_pos_frac=1.0\nsign_neg_frac=0.0\n"
        "dropout.hr=1\ndropout.gsr=1\nmin_baseline_tvoc=150\n"
    )
    assert main(["simulate", "--cohort", str(spec_file), "--seed", "5", "--out", str(out)]) == 0
    archives = sorted(p for p in os.listdir(out) if p.startswith("session_"))
    assert len(archives) == 3
    for name in archives:
        assert validate_session(read_archive(out / name)) == []
    assert (out / "ground_truth.csv").exists()

    csv = tmp_path / "dataset.csv"
    assert main(["features", "--in", str(out), "--out", str(csv)]) == 0
    ds = load_dataset_csv(csv)
    assert len(ds.windows) == 3 * 32

    rep = tmp_path / "eval.txt"
    assert main([
        "train-eval", "--dataset", str(csv), "--model", "rf",
        "--regime", "kfold", "--seed", "1", "--out", str(rep),
    ]) == 0
    text = rep.read_text()
    assert "CLASSIFICATION PERFORMANCE" in text and "Random Forest" in text

    rep2 = tmp_path / "loso.txt"
    assert main([
        "train-eval", "--dataset", str(csv), "--model", "svm-linear",
        "--regime", "loso", "--seed", "1", "--out", str(rep2),
    ]) == 0
    assert "LEAVE-ONE-SUBJECT-OUT" in rep2.read_text()


def test_ingest_roundtrip(tmp_path):
    record = simulate_participant(ParticipantSpec(participant_id="P09", seed=4))
    wire = tmp_path / "capture.txt"
    with open(wire, "w") as fh:
        for ts, name in record.markers:
            fh.write(serialize_line(Marker(ts, name)))
        for f in record.frames:
            fh.write(serialize_line(f))
        fh.write("F,garbage\n")  # one corrupt line must not kill the run
    out = tmp_path / "session.txt"
    assert main(["ingest", "--in", str(wire), "--out", str(out), "--participant", "P09"]) == 0
    loaded = read_archive(out)
    assert len(loaded.frames) == len(record.frames)
    assert loaded.meta.stress_ratings == record.meta.stress_ratings
    assert validate_session(loaded) == []


def test_couple_and_attribute_cli(tmp_path):
    out = tmp_path / "cohort"
    spec_file = tmp_path / "c.cfg"
    spec_file.write_text(
        "n=4\nsign_pos_frac=0.5\nsign_neg_frac=0.5\nmin_baseline_tvoc=150\n"
        "dropout.hr=1\ndropout.gsr=1\n"
    )
    main(["simulate", "--cohort", str(spec_file), "--seed", "9", "--out", str(out)])
    rep = tmp_path / "coupling.txt"
    assert main([
        "couple", "--in", str(out), "--out", str(rep), "--seed", "3",
        "--permutations", "199",
    ]) == 0
    text = rep.read_text()
    assert "MANIPULATION CHECK" in text and "PHYSIOLOGY-VOC COUPLING" in text

    csv = tmp_path / "d.csv"
    main(["features", "--in", str(out), "--out", str(csv)])
    att = tmp_path / "attr.txt"
    assert main(["attribute", "--dataset", str(csv), "--seed", "2", "--out", str(att)]) == 0
    t2 = att.read_text()
    assert "MULTIMODAL FUSION" in t2 and "FEATURE IMPORTANCE" in t2


def test_malformed_command_exit_2():
    assert main(["simulate", "--bogus-flag"]) == 2
    assert main(["train-eval"]) == 2


def test_reproduce_smoke(tmp_path):
    out = tmp_path / "rep"
    code = main([
        "reproduce", "--seed", "7", "--out", str(out),
        "--config", str(_tiny_config(tmp_path)),
    ])
    assert code == 0
    for name in (
        "dataset.csv",
        "coupling_report.txt",
        "classification_kfold.txt",
        "classification_loso.txt",
        "fusion_attribution.txt",
        "checks.txt",
    ):
        assert (out / name).exists()
    assert "ALL CHECKS PASSED" in (out / "checks.txt").read_text()


def _tiny_config(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("n=6\nmin_baseline_tvoc=150\n")
    return cfg
