import json

import numpy as np
import pytest
from click.testing import CliRunner

from netpolar.cli import main
from netpolar.graph import load_edge_list, preprocess
from netpolar.scores import SCORE_IDS


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def bridge_file(tmp_path):
    p = tmp_path / "bridge.txt"
    p.write_text("0 1\n0 2\n1 2\n2 3\n3 4\n3 5\n4 5\n")
    return str(p)


@pytest.fixture
def path3_file(tmp_path):
    # 1|2 partition makes AEI fail: exercises partial exits
    p = tmp_path / "path3.txt"
    p.write_text("a b\nb c\n")
    return str(p)


class TestScoreCommand:
    def test_json_payload(self, runner, bridge_file):
        result = runner.invoke(main, ["score", "--input", bridge_file])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["graph"]["n"] == 6
        assert payload["graph"]["m"] == 7
        assert sorted(payload["partition_sizes"]) == [3, 3]
        got = {s["score_id"]: s for s in payload["scores"]}
        assert set(got) == set(SCORE_IDS)
        assert all(s["error"] is None for s in payload["scores"])
        assert got["EI"]["value"] == pytest.approx(5 / 7)

    def test_csv_format(self, runner, bridge_file):
        result = runner.invoke(
            main, ["score", "--input", bridge_file, "--format", "csv"]
        )
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0].startswith("score_id,value,flags,error,n,m")
        assert len(lines) == 1 + len(SCORE_IDS)

    def test_byte_identical_reruns(self, runner, bridge_file):
        args = ["score", "--input", bridge_file, "--seed", "3"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.output == b.output

    def test_score_subset_and_order(self, runner, bridge_file):
        result = runner.invoke(
            main, ["score", "--input", bridge_file, "--scores", "Q,RWC"]
        )
        payload = json.loads(result.output)
        assert [s["score_id"] for s in payload["scores"]] == ["Q", "RWC"]

    def test_unknown_score_is_usage_error(self, runner, bridge_file):
        result = runner.invoke(
            main, ["score", "--input", bridge_file, "--scores", "XXX"]
        )
        assert result.exit_code == 2
        assert "unknown scores" in result.stderr

    def test_missing_file_fails(self, runner):
        result = runner.invoke(main, ["score", "--input", "nope.txt"])
        assert result.exit_code == 2

    def test_malformed_edge_list(self, runner, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("a b c d\n")
        result = runner.invoke(main, ["score", "--input", str(p)])
        assert result.exit_code == 2
        assert "error:" in result.stderr

    def test_partial_exit_when_a_score_errors(self, runner, path3_file):
        result = runner.invoke(main, ["score", "--input", path3_file])
        assert result.exit_code == 1
        payload = json.loads(result.output)
        errors = {s["score_id"]: s["error"] for s in payload["scores"]}
        assert errors["AEI"] is not None
        assert errors["EI"] is None

    def test_side_outputs(self, runner, bridge_file, tmp_path):
        part = tmp_path / "part.csv"
        lmap = tmp_path / "map.csv"
        result = runner.invoke(
            main,
            ["score", "--input", bridge_file, "--partition-output", str(part),
             "--labelmap-output", str(lmap)],
        )
        assert result.exit_code == 0
        assert part.read_text().startswith("node,block\n")
        assert lmap.read_text().startswith("id,label\n")

    def test_output_file(self, runner, bridge_file, tmp_path):
        out = tmp_path / "res.json"
        result = runner.invoke(
            main, ["score", "--input", bridge_file, "--output", str(out)]
        )
        assert result.exit_code == 0
        assert result.output == ""
        assert json.loads(out.read_text())["graph"]["n"] == 6


class TestNormalizeCommand:
    def test_json_payload(self, runner, bridge_file):
        result = runner.invoke(
            main,
            ["normalize", "--input", bridge_file, "--samples", "5",
             "--scores", "Q,EI", "--null", "d1"],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["samples"] == 5
        for rec in payload["scores"]:
            assert rec["error"] is None
            assert rec["null"]["n_valid"] == 5
            assert rec["denoised"] == pytest.approx(
                rec["raw"] - rec["null"]["mean"], abs=1e-12
            )

    def test_csv_header(self, runner, bridge_file):
        result = runner.invoke(
            main,
            ["normalize", "--input", bridge_file, "--samples", "3",
             "--scores", "Q", "--format", "csv"],
        )
        assert result.exit_code == 0
        assert result.output.splitlines()[0] == (
            "score_id,raw,denoised,standardized,null_mean,null_std,"
            "null_stderr,n_samples,n_errors,flags,error"
        )

    def test_partial_exit_on_ensemble_failure(self, runner, path3_file):
        result = runner.invoke(
            main,
            ["normalize", "--input", path3_file, "--samples", "3",
             "--scores", "AEI,Q"],
        )
        assert result.exit_code == 1
        payload = json.loads(result.output)
        by_id = {r["score_id"]: r for r in payload["scores"]}
        assert by_id["AEI"]["error"] is not None
        assert by_id["Q"]["error"] is None

    def test_deterministic(self, runner, bridge_file):
        args = ["normalize", "--input", bridge_file, "--samples", "4",
                "--scores", "EI", "--seed", "11"]
        assert runner.invoke(main, args).output == runner.invoke(main, args).output


class TestSweepCommand:
    def test_er_sweep_shape(self, runner):
        result = runner.invoke(
            main,
            ["sweep", "--generator", "er", "--n", "40", "--mean-degree", "4",
             "--replicates", "2", "--scores", "Q,EI"],
        )
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert lines[0] == (
            "network_id,mean_degree,n,replicate,score_id,value,flags,error"
        )
        assert len(lines) == 1 + 2 * 2  # 2 replicates x 2 scores

    def test_network_ids_unique_per_graph(self, runner):
        result = runner.invoke(
            main,
            ["sweep", "--generator", "er", "--n", "30,40", "--mean-degree", "3",
             "--replicates", "2", "--scores", "Q"],
        )
        lines = result.output.strip().splitlines()[1:]
        ids = [line.split(",")[0] for line in lines]
        assert len(set(ids)) == 4

    def test_deterministic(self, runner):
        args = ["sweep", "--generator", "er", "--n", "50", "--mean-degree", "4",
                "--replicates", "2", "--scores", "RWC", "--seed", "5"]
        assert runner.invoke(main, args).output == runner.invoke(main, args).output

    def test_sbm_sweep_with_normalization(self, runner):
        result = runner.invoke(
            main,
            ["sweep", "--generator", "sbm", "--n", "60", "--frac-small", "0.4",
             "--scheme", "high", "--k-in", "4", "--contrast", "8",
             "--replicates", "1", "--scores", "EI", "--normalize",
             "--samples", "4", "--partitioner", "spectral"],
        )
        assert result.exit_code == 0, result.output
        header, row = result.output.strip().splitlines()
        assert "denoised" in header.split(",")
        assert row.split(",")[header.split(",").index("denoised")] != ""

    def test_unknown_scheme_rejected(self, runner):
        result = runner.invoke(
            main, ["sweep", "--generator", "sbm", "--scheme", "extreme"]
        )
        assert result.exit_code == 2
        assert "unknown sbm schemes" in result.stderr

    def test_bad_number_list(self, runner):
        result = runner.invoke(
            main, ["sweep", "--generator", "er", "--n", "10;20"]
        )
        assert result.exit_code == 2

    def test_infeasible_combo_marks_partial(self, runner):
        # mean degree above n-1 cannot be generated
        result = runner.invoke(
            main,
            ["sweep", "--generator", "er", "--n", "10", "--mean-degree", "40",
             "--replicates", "1", "--scores", "Q"],
        )
        assert result.exit_code == 1
        line = result.output.strip().splitlines()[1]
        assert "m must be in" in line


class TestEvaluateCommand:
    @pytest.fixture
    def corpus_file(self, tmp_path):
        rows = ["network_id,label,RWC,EI,n"]
        rng = np.random.default_rng(0)
        for i in range(20):
            lab = "polarized" if i % 2 == 0 else "non_polarized"
            base = 0.7 if lab == "polarized" else 0.3
            rows.append(
                f"g{i:02d},{lab},{base + 0.05 * rng.random():.4f},"
                f"{base:.4f},{1000 + 50 * i}"
            )
        p = tmp_path / "corpus.csv"
        p.write_text("\n".join(rows) + "\n")
        return str(p)

    def test_basic_auc(self, runner, corpus_file):
        result = runner.invoke(main, ["evaluate", "--input", corpus_file])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["corpus"]["networks"] == 20
        assert payload["scores"]["RWC"]["auc"] == 1.0
        assert payload["scores"]["EI"]["gini"] == 1.0
        assert "n" not in payload["scores"]

    def test_windowed(self, runner, corpus_file):
        result = runner.invoke(
            main,
            ["evaluate", "--input", corpus_file, "--window", "6",
             "--covariate", "n"],
        )
        payload = json.loads(result.output)
        windows = payload["scores"]["RWC"]["windows"]
        assert len(windows) == 15
        assert all(w["auc"] == 1.0 for w in windows)

    def test_window_without_covariate(self, runner, corpus_file):
        result = runner.invoke(
            main, ["evaluate", "--input", corpus_file, "--window", "6"]
        )
        assert result.exit_code == 2
        assert "go together" in result.stderr

    def test_combine(self, runner, corpus_file):
        result = runner.invoke(
            main, ["evaluate", "--input", corpus_file, "--combine"]
        )
        payload = json.loads(result.output)
        assert payload["combined_from"] == ["EI", "RWC"]
        assert payload["scores"]["combined"]["auc"] == 1.0

    def test_missing_score_column(self, runner, corpus_file):
        result = runner.invoke(
            main, ["evaluate", "--input", corpus_file, "--scores", "BCC"]
        )
        assert result.exit_code == 2
        assert "not in" in result.stderr

    def test_csv_output(self, runner, corpus_file):
        result = runner.invoke(
            main, ["evaluate", "--input", corpus_file, "--format", "csv"]
        )
        assert result.output.splitlines()[0] == "score_id,auc,gini"


class TestGenerateCommand:
    def test_er_with_verify(self, runner, tmp_path):
        out = tmp_path / "er.txt"
        result = runner.invoke(
            main,
            ["generate", "--generator", "er", "--n", "50", "--m", "100",
             "--output", str(out), "--verify"],
        )
        assert result.exit_code == 0
        assert "verify PASS: node count" in result.stderr
        data = load_edge_list(out)
        assert data.n == 50
        assert data.pairs.shape[0] == 100

    def test_d1_preserves_degrees(self, runner, bridge_file, tmp_path):
        out = tmp_path / "null.txt"
        result = runner.invoke(
            main,
            ["generate", "--generator", "d1", "--input", bridge_file,
             "--output", str(out), "--verify", "--seed", "4"],
        )
        assert result.exit_code == 0
        assert "verify PASS: degree sequence preserved" in result.stderr
        observed = preprocess(load_edge_list(bridge_file))
        null = preprocess(load_edge_list(str(out)))
        assert sorted(null.degrees) == sorted(observed.degrees)

    def test_d2_verifies_joint_degrees(self, runner, bridge_file, tmp_path):
        out = tmp_path / "null2.txt"
        result = runner.invoke(
            main,
            ["generate", "--generator", "d2", "--input", bridge_file,
             "--output", str(out), "--verify"],
        )
        assert result.exit_code == 0
        assert "joint degree matrix preserved" in result.stderr

    def test_null_kind_requires_input(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["generate", "--generator", "d1", "--output",
             str(tmp_path / "x.txt")],
        )
        assert result.exit_code == 2
        assert "needs --input" in result.stderr

    def test_sbm_labels_output(self, runner, tmp_path):
        out = tmp_path / "sbm.txt"
        labels = tmp_path / "labels.csv"
        result = runner.invoke(
            main,
            ["generate", "--generator", "sbm", "--n", "40", "--frac-small",
             "0.25", "--k-in", "4", "--contrast", "5", "--output", str(out),
             "--labels-output", str(labels), "--verify"],
        )
        assert result.exit_code == 0, result.stderr
        assert "verify PASS: small block size" in result.stderr
        lines = labels.read_text().strip().splitlines()
        assert lines[0] == "node,block"
        assert sum(1 for ln in lines[1:] if ln.endswith(",A")) == 10

    def test_labels_output_rejected_elsewhere(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["generate", "--generator", "er", "--n", "20", "--m", "30",
             "--output", str(tmp_path / "g.txt"),
             "--labels-output", str(tmp_path / "l.csv")],
        )
        assert result.exit_code == 2
        assert "only applies" in result.stderr

    def test_powerlaw_verify_mean_degree(self, runner, tmp_path):
        out = tmp_path / "pl.txt"
        result = runner.invoke(
            main,
            ["generate", "--generator", "powerlaw", "--n", "2000",
             "--gamma", "2.5", "--mean-degree", "4", "--output", str(out),
             "--verify"],
        )
        assert result.exit_code == 0
        assert "verify PASS" in result.stderr

    def test_infeasible_params_fail_cleanly(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["generate", "--generator", "er", "--n", "5", "--m", "100",
             "--output", str(tmp_path / "g.txt")],
        )
        assert result.exit_code == 2
        assert "error:" in result.stderr
