"""CLI exit codes, output formats, and byte-identity with library calls."""

import json

import numpy as np
import pytest

from commflow import KdeParams, load_events
from commflow import export
from commflow.classify import ForestModel, LabeledExample, ForestConfig
from commflow.classify import filter_confident, train as train_model
from commflow.cli import main, read_feature_rows
from commflow.density import grid_for_range, profile_pair, integrate, Grid
from commflow.pipeline import analyze_pair

TWO_BURST = "".join(f"1 2 {t}\n" for t in (0, 1, 2, 100, 101, 102))


@pytest.fixture()
def burst_file(tmp_path):
    p = tmp_path / "bursts.txt"
    p.write_text(TWO_BURST)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_usage_error_exit_1(capsys):
    code, _, err = run(capsys, "episodes")  # missing required args
    assert code == 1
    assert "error" in err


def test_unknown_command_exit_1(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 1


def test_missing_file_exit_2(capsys):
    code, _, err = run(capsys, "pairs", "/nonexistent/path.txt")
    assert code == 2
    assert "error" in err


def test_ingest_report_text(capsys, burst_file):
    code, out, err = run(capsys, "ingest", burst_file, "--report")
    assert code == 0
    assert "events parsed:   6" in err
    assert out == ""


def test_ingest_report_json(capsys, burst_file):
    code, out, _ = run(capsys, "ingest", burst_file, "--report", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["events"] == 6
    assert doc["entities"] == 2


def test_ingest_strict_bad_file(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1 2 100\nnot a record\n")
    code, _, err = run(capsys, "ingest", p, "--strict")
    assert code == 2
    assert "parse-error" in err


def test_pairs_csv(capsys, burst_file):
    code, out, _ = run(capsys, "pairs", burst_file)
    assert code == 0
    meta, header, rows = export.read_csv_document(out)
    assert header == list(export.PAIR_HEADER)
    assert rows == [["1", "2", "6", "0", "6"]]


def test_pairs_byte_identity(capsys, burst_file):
    code, out, _ = run(capsys, "pairs", burst_file, "--min", "2")
    log, _ = load_events(burst_file)
    expected = export.pairs_csv(log.list_pairs(2), {"input": str(burst_file), "min": 2})
    assert out == expected


def test_episodes_two_rows(capsys, burst_file):
    code, out, _ = run(
        capsys, "episodes", burst_file, "--pair", "1,2",
        "--sigma", "1", "--h", "1",
        "--epsilon-mode", "relative", "--epsilon", "0.05",
    )
    assert code == 0
    meta, header, rows = export.read_csv_document(out)
    assert len(rows) == 2
    assert header[: len(export.EPISODE_COLUMNS)] == list(export.EPISODE_COLUMNS)
    start0, end0 = float(rows[0][3]), float(rows[0][4])
    start1, end1 = float(rows[1][3]), float(rows[1][4])
    assert start0 <= 0 and end0 >= 2
    assert start1 <= 100 and end1 >= 102
    assert meta["epsilon_mode"] == "relative-to-peak"


def test_episodes_byte_identity_with_library(capsys, burst_file):
    argv = [
        "episodes", str(burst_file), "--pair", "1,2", "--sigma", "1", "--h", "1",
        "--grid-n", "1500",
    ]
    code, out, _ = run(capsys, *argv)
    assert code == 0

    log, _ = load_events(burst_file)
    seq = log.pair_sequence("1", "2")
    params = KdeParams(0.0, 1.0, 1.0)
    from commflow.density import default_grid
    grid = default_grid(seq, params, 1500)
    result = analyze_pair(seq, params, epsilon_value=0.05, grid=grid)
    meta = {
        "input": str(burst_file),
        "pair": "1,2",
        "mu": 0.0,
        "sigma": 1.0,
        "h": 1.0,
        "grid_n": grid.n,
        "from": grid.start,
        "to": grid.end,
        "epsilon": 0.05,
        "epsilon_mode": "relative-to-peak",
        "min_duration": 0.0,
        "merge_gap": 0.0,
        "epsilon_resolved": result.epsilon,
    }
    expected = export.episodes_csv(result.episodes, meta)
    assert out == expected


def test_episodes_json_matches_csv_values(capsys, burst_file):
    argv = ["episodes", str(burst_file), "--pair", "1,2", "--sigma", "1", "--h", "1"]
    _, csv_out, _ = run(capsys, *argv)
    _, json_out, _ = run(capsys, *argv, "--format", "json")
    _, header, rows = export.read_csv_document(csv_out)
    doc = json.loads(json_out)
    assert len(doc["episodes"]) == len(rows)
    for row, ep in zip(rows, doc["episodes"]):
        assert float(row[header.index("start")]) == ep["start"]
        assert float(row[header.index("end")]) == ep["end"]
        assert float(row[header.index("duration")]) == ep["duration"]
        assert int(row[header.index("n_out")]) == ep["n_out"]
        for name, value in ep["features"].items():
            assert float(row[header.index(name)]) == value


def test_profile_integrates_to_counts(capsys, burst_file):
    code, out, _ = run(
        capsys, "profile", burst_file, "--pair", "1,2",
        "--sigma", "1", "--h", "1", "--grid-n", "4001",
    )
    assert code == 0
    _, header, rows = export.read_csv_document(out)
    assert header == ["t", "f_in", "f_out"]
    t = np.array([float(r[0]) for r in rows])
    f_out = np.array([float(r[2]) for r in rows])
    log, _ = load_events(burst_file)
    seq = log.pair_sequence("1", "2")
    grid = Grid(float(t[0]), float(t[1] - t[0]), len(t))
    total = seq.n_out * integrate(f_out, grid)
    assert total == pytest.approx(seq.n_out, abs=1e-3)


def test_profile_pair_flag_validation(capsys, burst_file):
    code, _, err = run(capsys, "profile", burst_file, "--pair", "1")
    assert code == 2
    code, _, err = run(capsys, "profile", burst_file, "--pair", "1,1")
    assert code == 2
    assert "invalid-pair" in err


def test_profile_empty_pair_needs_range(capsys, burst_file):
    code, _, err = run(capsys, "profile", burst_file, "--pair", "7,9")
    assert code == 2
    assert "no events" in err


def test_train_and_predict_round_trip(capsys, tmp_path, burst_file):
    # features from the episodes command, labels written by hand
    code, feats, _ = run(
        capsys, "episodes", burst_file, "--pair", "1,2", "--sigma", "1", "--h", "1",
    )
    assert code == 0
    fpath = tmp_path / "features.csv"
    fpath.write_text(feats)
    rows = read_feature_rows(fpath)
    assert len(rows) == 2

    labels = "episode_id,label\n" + f"{rows[0][0]},positive\n" + f"{rows[1][0]},negative\n"
    lpath = tmp_path / "labels.csv"
    lpath.write_text(labels)
    mpath = tmp_path / "model.json"
    code, _, err = run(
        capsys, "train", "--features", fpath, "--labels", lpath,
        "--seed", "42", "--out", mpath,
    )
    assert code == 0
    assert mpath.exists()

    code, out, _ = run(capsys, "predict", "--model", mpath, "--features", fpath)
    assert code == 0
    _, header, prows = export.read_csv_document(out)
    assert header == list(export.PREDICTION_HEADER)
    assert len(prows) == 2
    got = {r[0]: r[1] for r in prows}
    assert got[rows[0][0]] == "positive"
    assert got[rows[1][0]] == "negative"


def test_train_single_class_exit_2(capsys, tmp_path, burst_file):
    code, feats, _ = run(
        capsys, "episodes", burst_file, "--pair", "1,2", "--sigma", "1", "--h", "1",
    )
    fpath = tmp_path / "features.csv"
    fpath.write_text(feats)
    refs = [r[0] for r in read_feature_rows(fpath)]
    lpath = tmp_path / "labels.csv"
    lpath.write_text("episode_id,label\n" + "".join(f"{r},positive\n" for r in refs))
    code, _, err = run(
        capsys, "train", "--features", fpath, "--labels", lpath,
        "--out", tmp_path / "m.json",
    )
    assert code == 2
    assert "needs-both-classes" in err


def test_predict_min_confidence_filter_matches_library(capsys, tmp_path, burst_file):
    _, feats, _ = run(
        capsys, "episodes", burst_file, "--pair", "1,2", "--sigma", "1", "--h", "1",
    )
    fpath = tmp_path / "features.csv"
    fpath.write_text(feats)
    rows = read_feature_rows(fpath)
    lpath = tmp_path / "labels.csv"
    lpath.write_text(
        "episode_id,label\n"
        f"{rows[0][0]},positive\n"
        f"{rows[1][0]},negative\n"
    )
    mpath = tmp_path / "model.json"
    run(capsys, "train", "--features", fpath, "--labels", lpath,
        "--seed", "7", "--out", mpath)

    code, out, _ = run(
        capsys, "predict", "--model", mpath, "--features", fpath,
        "--min-confidence", "0.9", "--polarity", "positive",
    )
    assert code == 0

    model = ForestModel.load(mpath)
    preds = [model.predict(vec, episode_ref=ref) for ref, vec in rows]
    expected = export.predictions_csv(
        filter_confident(preds, 0.9, "positive"),
        {
            "model": str(mpath),
            "class_name": model.class_name,
            "min_confidence": 0.9,
            "polarity": "positive",
        },
    )
    assert out == expected
