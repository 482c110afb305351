import csv
import json

import numpy as np
import pytest

from specc import io
from specc.cli import main, parse_grid, parse_k_grid
from specc.graph import load_edge_list
from specc.metrics import nvi


def run(*args):
    return main([str(a) for a in args])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def karate_fit(tmp_path_factory, karate):
    out = tmp_path_factory.mktemp("fit") / "k"
    assert run("fit", "--dataset", "karate", "--k", 2, "--criterion", "bic", "--out", out) == 0
    return out


# helpers

def test_parse_grids():
    assert parse_grid("0.1:0.3:0.1") == pytest.approx([0.1, 0.2, 0.3])
    assert parse_grid("0.2,0.4") == [0.2, 0.4]
    assert parse_k_grid("2..5") == [2, 3, 4, 5]
    assert parse_k_grid("1,3") == [1, 3]


def test_membership_csv_round_trip(tmp_path):
    M = np.array([[0.25, 0.0], [1.0 / 3, 0.5]])
    io.write_membership_csv(tmp_path / "m.csv", M, ["a", "b"])
    labels, back = io.read_membership_csv(tmp_path / "m.csv")
    assert labels == ["a", "b"] and np.array_equal(back, M)


def test_align_columns_undoes_permutation():
    rng = np.random.default_rng(0)
    ref = np.abs(rng.standard_normal((20, 4)))
    assert np.array_equal(io.align_columns(ref[:, [3, 1, 0, 2]], ref), ref)


# simulate

def test_simulate_defaults(tmp_path):
    out = tmp_path / "s"
    assert run("simulate", "--seed", 1, "--out", out) == 0
    g = load_edge_list(f"{out}_edges.txt")
    assert 47 <= 2 * g.n_edges / 500 <= 53
    labels, Z = io.read_membership_csv(f"{out}_truth.csv")
    assert Z.shape == (500, 3) and len(labels) == 500
    params = json.loads(open(f"{out}_params.json").read())
    assert params["alpha"] > 0


def test_simulate_pure_truth(tmp_path):
    out = tmp_path / "s"
    assert run("simulate", "--overlap", 0, "--n", 90, "--degree", 10, "--out", out) == 0
    _, Z = io.read_membership_csv(f"{out}_truth.csv")
    assert np.all(np.count_nonzero(Z, axis=1) == 1)


def test_simulate_hubs_need_clip(tmp_path, capsys):
    out = tmp_path / "h"
    assert run("simulate", "--hubs", "--seed", 3, "--out", out) == 1
    assert "alpha=" in capsys.readouterr().err
    assert run("simulate", "--hubs", "--clip", "--seed", 3, "--out", out) == 0
    theta = np.array(json.loads(open(f"{out}_params.json").read())["theta"])
    lo, hi = np.unique(np.round(theta, 12))
    assert hi / lo == pytest.approx(5.0)


def test_simulate_scenario_file_and_config(tmp_path):
    scen = tmp_path / "scen.txt"
    scen.write_text("n = 60\nK = 2\ntarget_degree = 8\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 4, "out": str(tmp_path / "c")}))
    assert run("simulate", "--scenario", scen, "--config", cfg) == 0
    assert io.read_membership_csv(tmp_path / "c_truth.csv")[1].shape == (60, 2)


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert run("simulate", "--config", cfg, "--out", tmp_path / "x") == 1
    assert "colour" in capsys.readouterr().err


# fit and path

def test_fit_karate_matches_factions(karate_fit, karate):
    _, Z = karate
    labels, V = io.read_membership_csv(f"{karate_fit}_membership.csv")
    assert labels == [str(i) for i in range(1, 35)]
    assert nvi(V, Z) == 1.0
    report = json.loads(open(f"{karate_fit}_report.json").read())
    assert report["overlap_count"] == 0 and report["criterion"] == "bic"
    support = read_rows(f"{karate_fit}_support.csv")
    assert len(support) == report["support_size"] == 34


def test_fit_fixed_lambda(tmp_path):
    out = tmp_path / "f"
    assert run("fit", "--dataset", "karate", "--k", 2, "--lambda", 0.6, "--out", out) == 0
    report = json.loads(open(f"{out}_report.json").read())
    assert report["lambdas"] == [0.6] and report["criterion"] is None
    assert isinstance(report["converged"], bool)


def test_fit_requires_k(tmp_path):
    assert run("fit", "--dataset", "karate", "--out", tmp_path / "f") == 1


def test_fit_edge_list_input(tmp_path):
    edges = tmp_path / "e.txt"
    edges.write_text("\n".join(f"{i} {j}" for i in range(5) for j in range(i + 1, 5))
                     + "\n" + "\n".join(f"{i} {j}" for i in range(5, 10) for j in range(i + 1, 10)) + "\n")
    out = tmp_path / "f"
    assert run("fit", "--input", edges, "--k", 2, "--algorithm", "cd", "--grid", "0.5", "--out", out) == 0
    _, V = io.read_membership_csv(f"{out}_membership.csv")
    assert nvi(V, np.repeat(np.eye(2), 5, axis=0)) == 1.0


def test_path_karate_shapes(tmp_path):
    out = tmp_path / "p"
    assert run("path", "--dataset", "karate", "--k", 2, "--out", out) == 0
    scores = read_rows(f"{out}_path_scores.csv")
    members = read_rows(f"{out}_path_members.csv")
    assert len(scores) == 19
    assert len(members) == 34 * 2 * 19
    flagged = [r for r in scores if r["selected"] == "1"]
    assert len(flagged) == 1
    assert float(flagged[0]["bic"]) == min(float(r["bic"]) for r in scores)


def test_path_single_lambda(tmp_path):
    out = tmp_path / "p"
    assert run("path", "--dataset", "karate", "--k", 2, "--grid", "0.5", "--out", out) == 0
    assert len(read_rows(f"{out}_path_scores.csv")) == 1


def test_select_k_on_cliques(tmp_path):
    rng = np.random.default_rng(0)
    lines = []
    for b in range(3):
        for i in range(20):
            for j in range(i + 1, 20):
                if rng.random() < 0.9:
                    lines.append(f"{20 * b + i} {20 * b + j}")
    lines += ["0 20", "20 40"]
    edges = tmp_path / "e.txt"
    edges.write_text("\n".join(lines) + "\n")
    out = tmp_path / "k"
    assert run("select-k", "--input", edges, "--k-grid", "1..5", "--folds", 10, "--out", out) == 0
    rows = read_rows(f"{out}_kselect.csv")
    assert [int(r["k"]) for r in rows] == [1, 2, 3, 4, 5]


# evaluate

@pytest.fixture()
def truth_csv(tmp_path, karate):
    _, Z = karate
    path = tmp_path / "truth.csv"
    io.write_membership_csv(path, Z, [str(i) for i in range(1, 35)])
    return path, Z


def evaluate(tmp_path, est, labels, truth_path):
    est_path = tmp_path / "est.csv"
    io.write_membership_csv(est_path, est, labels)
    out = tmp_path / "metrics.json"
    code = run("evaluate", "--estimate", est_path, "--truth", truth_path, "--out", out)
    return code, (json.loads(out.read_text()) if code == 0 else None)


def test_evaluate_identity_and_permutation(tmp_path, truth_csv):
    path, Z = truth_csv
    labels = [str(i) for i in range(1, 35)]
    assert evaluate(tmp_path, Z, labels, path)[1]["nvi"] == 1.0
    assert evaluate(tmp_path, Z[:, ::-1], labels, path)[1]["nvi"] == 1.0
    # row order of the estimate does not matter, labels do
    order = np.random.default_rng(0).permutation(34)
    assert evaluate(tmp_path, Z[order], [labels[i] for i in order], path)[1]["nvi"] == 1.0


def test_evaluate_corrupted_rows(tmp_path, truth_csv):
    path, Z = truth_csv
    bad = Z.copy()
    rows = np.random.default_rng(1).choice(34, 4, replace=False)
    bad[rows] = bad[rows, ::-1]
    code, report = evaluate(tmp_path, bad, [str(i) for i in range(1, 35)], path)
    assert code == 0
    assert report["nvi"] < 1.0
    assert report["nvi"] == pytest.approx(nvi(bad, Z), abs=1e-15)
    assert report["misclustering"] == 4


def test_evaluate_label_mismatch(tmp_path, truth_csv):
    path, Z = truth_csv
    code, _ = evaluate(tmp_path, Z, [str(i) for i in range(2, 36)], path)
    assert code == 1


# determinism and reproduce

def test_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert run("simulate", "--n", 150, "--degree", 12, "--seed", 9, "--out", tmp_path / name) == 0
        assert run("fit", "--input", tmp_path / f"{name}_edges.txt", "--k", 3, "--algorithm", "cd",
                   "--seed", 9, "--out", tmp_path / f"{name}f") == 0
    for suffix in ("_edges.txt", "_truth.csv", "_params.json", "f_membership.csv", "f_support.csv",
                   "f_report.json"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()


def test_reproduce_fixed_point(capsys):
    assert run("reproduce", "fixed-point") == 0
    assert "[PASS] fixed-point: max deviation" in capsys.readouterr().out


def test_reproduce_polblogs_missing(tmp_path, capsys):
    assert run("reproduce", "polblogs", "--polblogs", tmp_path / "absent.gml") == 1
    assert "[FAIL]" in capsys.readouterr().out
