import json

import numpy as np
import pytest
from click.testing import CliRunner

from mgalign import affinity_pair, build_knn_graph, solve_exact
from mgalign.cli import main
from mgalign.io import load_embeddings, save_embeddings_json, save_triplet_batch
from mgalign.synthetic import separable_batch


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def embedding_file(tmp_path):
    rng = np.random.default_rng(3)
    path = tmp_path / "emb.json"
    save_embeddings_json(path, rng.normal(size=(5, 3)))
    return path


def read_json(path):
    return json.loads(path.read_text())


class TestAlign:
    def test_same_file_identity(self, runner, tmp_path, embedding_file):
        out = tmp_path / "match.json"
        result = runner.invoke(
            main, ["align", str(embedding_file), str(embedding_file),
                   "--k", "2", "--solver", "exact", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        data = read_json(out)
        assert data["sigma"] == [0, 1, 2, 3, 4]
        assert abs(data["objective"]) <= 1e-9

    def test_matches_library_solve(self, runner, tmp_path):
        rng = np.random.default_rng(11)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_embeddings_json(a, rng.normal(size=(5, 3)))
        save_embeddings_json(b, rng.normal(size=(5, 3)))
        out = tmp_path / "match.json"
        result = runner.invoke(
            main, ["align", str(a), str(b), "--k", "2", "--solver", "exact", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        g1 = build_knn_graph(load_embeddings(a), k=2, metric="cosine")
        g2 = build_knn_graph(load_embeddings(b), k=2, metric="cosine")
        expected = solve_exact(affinity_pair(g1, g2, "cosine"))
        data = read_json(out)
        assert data["objective"] == pytest.approx(expected.objective)
        assert data["sigma"] == [int(x) for x in expected.matching.sigma]

    def test_default_k_recorded_in_manifest(self, runner, tmp_path):
        rng = np.random.default_rng(4)
        path = tmp_path / "e.json"
        save_embeddings_json(path, rng.normal(size=(8, 3)))
        out = tmp_path / "m.json"
        result = runner.invoke(main, ["align", str(path), str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output
        manifest = read_json(tmp_path / "m.json.manifest.json")
        assert manifest["config"]["k"] == 5

    def test_format_error_exit_2(self, runner, tmp_path, embedding_file):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        result = runner.invoke(
            main, ["align", str(bad), str(embedding_file), "--out", str(tmp_path / "o.json")],
        )
        assert result.exit_code == 2

    def test_solver_error_exit_3(self, runner, tmp_path):
        rng = np.random.default_rng(5)
        big = tmp_path / "big.json"
        save_embeddings_json(big, rng.normal(size=(12, 3)))
        result = runner.invoke(
            main, ["align", str(big), str(big), "--k", "2",
                   "--solver", "exact", "--out", str(tmp_path / "o.json")],
        )
        assert result.exit_code == 3

    def test_rerun_byte_identical(self, runner, tmp_path, embedding_file):
        out = tmp_path / "m.json"
        contents = []
        for _ in range(2):
            result = runner.invoke(
                main, ["align", str(embedding_file), str(embedding_file),
                       "--k", "2", "--out", str(out), "--seed", "7"],
            )
            assert result.exit_code == 0
            contents.append(out.read_bytes())
        assert contents[0] == contents[1]


class TestMultiAlign:
    def test_separable_identity(self, runner, tmp_path):
        path = tmp_path / "t.jsonl"
        save_triplet_batch(path, separable_batch(5, seed=1))
        out = tmp_path / "multi.json"
        result = runner.invoke(
            main, ["multi-align", str(path), "--k", "2", "--solver", "exact", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        data = read_json(out)
        assert data["hamming_vs_identity"] == 0.0
        for rep in data["matchings"].values():
            assert rep["sigma"] == [0, 1, 2, 3, 4]

    def test_single_record(self, runner, tmp_path):
        path = tmp_path / "t.jsonl"
        save_triplet_batch(path, separable_batch(1, seed=2))
        out = tmp_path / "multi.json"
        result = runner.invoke(main, ["multi-align", str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output
        data = read_json(out)
        assert all(rep["sigma"] == [0] for rep in data["matchings"].values())

    def test_pairwise_mode(self, runner, tmp_path):
        path = tmp_path / "t.jsonl"
        save_triplet_batch(path, separable_batch(4, seed=3))
        out = tmp_path / "pairs.json"
        result = runner.invoke(
            main, ["multi-align", str(path), "--k", "2", "--mode", "pairwise", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        data = read_json(out)
        assert set(data["pairs"]) == {"v-a", "v-ae", "a-ae"}
        assert data["triplets"] == [[i, i, i] for i in range(4)]

    def test_bad_records_exit_2(self, runner, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": 0, "v": [1.0]}\n')
        result = runner.invoke(
            main, ["multi-align", str(path), "--out", str(tmp_path / "o.json")],
        )
        assert result.exit_code == 2


class TestVerify:
    def test_clean_run_exit_zero(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main, ["verify", "--trials", "20", "--n", "4",
                   "--geodesic-pairs", "5", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        data = read_json(out)
        assert data["trials"] == 20 and data["violations"] == []
        assert data["constant_speed"]["violations"] == []

    def test_zero_trials(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main, ["verify", "--trials", "0", "--geodesic-pairs", "0", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert read_json(out)["violations"] == []

    def test_mutant_flagged_exit_4(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main, ["verify", "--trials", "5", "--geodesic-pairs", "0",
                   "--mutant", "--out", str(out)],
        )
        assert result.exit_code == 4
        assert read_json(out)["violations"]


class TestTrain:
    def test_smoke_and_artifacts(self, runner, tmp_path):
        prefix = tmp_path / "run"
        result = runner.invoke(
            main, ["train", "--size", "8", "--raw-dim", "5", "--embed-dim", "3",
                   "--epochs", "8", "--k", "3", "--seed", "1",
                   "--out-prefix", str(prefix)],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "run.checkpoint.json").exists()
        assert (tmp_path / "run.eval.json").exists()
        trace = (tmp_path / "run.trace.csv").read_text().splitlines()
        assert trace[1] == "epoch,batch,hamming,surrogate,accuracy"
        assert len(trace) == 2 + 8

    def test_zero_learning_rate_constant_trace(self, runner, tmp_path):
        prefix = tmp_path / "frozen"
        result = runner.invoke(
            main, ["train", "--size", "6", "--raw-dim", "4", "--embed-dim", "3",
                   "--epochs", "3", "--k", "2", "--learning-rate", "0",
                   "--out-prefix", str(prefix)],
        )
        assert result.exit_code == 0, result.output
        rows = (tmp_path / "frozen.trace.csv").read_text().splitlines()[2:]
        hammings = {row.split(",")[2] for row in rows}
        assert len(hammings) == 1


class TestBench:
    def test_counts(self, runner, tmp_path):
        out = tmp_path / "bench.csv"
        result = runner.invoke(
            main, ["bench", "--modalities", "3,4,5,6", "--sizes", "6",
                   "--solver", "exact", "--k", "2", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().splitlines()[2:]
        counts = {}
        for line in lines:
            k, b, mode, solves = line.split(",")[:4]
            counts[(int(k), mode)] = int(solves)
        for k in (3, 4, 5, 6):
            assert counts[(k, "barycenter")] == k
            assert counts[(k, "pairwise")] == k * (k - 1) // 2

    def test_manifest_has_platform(self, runner, tmp_path):
        out = tmp_path / "bench.csv"
        result = runner.invoke(
            main, ["bench", "--modalities", "3", "--sizes", "4",
                   "--solver", "exact", "--k", "2", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        manifest = read_json(tmp_path / "bench.csv.manifest.json")
        assert "platform" in manifest and "machine" in manifest["platform"]
