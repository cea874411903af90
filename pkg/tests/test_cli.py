"""CLI subcommands: pipeline runs, comparisons, ingestion, reports."""

import json
import os

import jsonschema
import numpy as np
import pytest

from hsel.cli import RunConfig, build_parser, cmd_compare, cmd_run, main
from hsel.core import Split, write_corpus_csv
from hsel.datasets import synthetic_news_corpus
from hsel.pool import write_prediction_matrix

from conftest import make_redundant_matrix


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "small.csv"
    write_corpus_csv(synthetic_news_corpus(n_docs=150, seed=3), str(path))
    return str(path)


def _schema(name):
    from importlib import resources

    return json.loads(
        resources.files("hsel").joinpath(f"schemas/{name}.schema.json").read_text()
    )


class TestRun:
    def test_report_cardinalities_and_schema(self, small_corpus, tmp_path):
        config = RunConfig(corpus=small_corpus, outdir=str(tmp_path / "out"), seed=7)
        report = cmd_run(config)
        assert len(report["pool"]) == 12
        assert len(report["candidates"]) == 12
        assert [c["level_k"] for c in report["candidates"]] == list(range(1, 13))
        jsonschema.validate(report, _schema("run_report"))
        for name in (
            "run_report.json",
            "selection_report.json",
            "dissimilarity.csv",
            "dendrogram.txt",
            "validation_matrix.csv",
            "test_matrix.csv",
        ):
            assert os.path.exists(os.path.join(config.outdir, name)), name

    def test_selection_report_sweeps_all_metrics(self, small_corpus, tmp_path):
        config = RunConfig(corpus=small_corpus, outdir=str(tmp_path / "out"), seed=7)
        cmd_run(config)
        doc = json.load(open(os.path.join(config.outdir, "selection_report.json")))
        jsonschema.validate(doc, _schema("selection_report"))
        assert set(doc["metrics"]) == {"accuracy", "precision", "recall", "f1"}
        for metric_doc in doc["metrics"].values():
            assert len(metric_doc["candidates"]) == 12
            assert metric_doc["final"]["rule"] == "max-validation"

    def test_determinism_modulo_timestamp(self, small_corpus, tmp_path):
        outdir = str(tmp_path / "out")
        config = RunConfig(corpus=small_corpus, outdir=outdir, seed=11)

        def snapshot():
            files = {}
            for name in sorted(os.listdir(outdir)):
                with open(os.path.join(outdir, name), "rb") as fh:
                    files[name] = fh.read()
            report = json.loads(files["run_report.json"])
            report["generated_at"] = "X"
            files["run_report.json"] = json.dumps(report, sort_keys=True).encode()
            return files

        cmd_run(config)
        first = snapshot()
        cmd_run(config)
        second = snapshot()
        assert first.keys() == second.keys()
        for name in first:
            assert first[name] == second[name], f"{name} differs between runs"

    def test_cli_exit_codes_and_stage_diagnostics(self, tmp_path, capsys):
        rc = main(
            ["run", "--corpus", str(tmp_path / "missing.csv"), "--outdir", str(tmp_path)]
        )
        assert rc == 1
        assert "error [load-corpus]" in capsys.readouterr().err

    def test_outdir_env_override(self, small_corpus, tmp_path, monkeypatch):
        override = tmp_path / "env-out"
        monkeypatch.setenv("HSEL_OUTPUT_DIR", str(override))
        rc = main(["run", "--corpus", small_corpus, "--outdir", str(tmp_path / "flag-out")])
        assert rc == 0
        assert override.joinpath("run_report.json").exists()
        assert not (tmp_path / "flag-out").exists()


class TestCompare:
    def test_corpus_mode_rows(self, small_corpus, tmp_path):
        config = RunConfig(corpus=small_corpus, outdir=str(tmp_path / "cmp"), seed=7)
        report = cmd_compare(config)
        jsonschema.validate(report, _schema("compare_report"))
        rows = {row["display"]: row for row in report["rows"]}
        # Group C spans the whole pool.
        assert rows["C-LR (12)"]["members_count"] == 12
        assert rows["BASELINE"]["accuracy"] == 0.5
        assert rows["BASELINE"]["precision"] is None
        monolithic = [r for r in report["rows"] if r["kind"] == "monolithic"]
        assert len(monolithic) == 12
        group_a = [r for r in report["rows"] if r["kind"] == "group_a"]
        assert {r["members_count"] for r in group_a} == {3}
        group_b = [r for r in report["rows"] if r["kind"] == "group_b"]
        assert {r["members_count"] for r in group_b} == {4}
        assert any(r["kind"] == "group_d" for r in report["rows"])
        assert any(r["kind"] == "elbow" for r in report["rows"])

    def test_matrix_mode_on_redundant_pool(self, tmp_path):
        vpm = make_redundant_matrix(seed=31, split=Split.VALIDATION)
        tpm = make_redundant_matrix(seed=32, split=Split.TEST)
        val_path = str(tmp_path / "val.csv")
        test_path = str(tmp_path / "test.csv")
        write_prediction_matrix(vpm, val_path)
        write_prediction_matrix(tpm, test_path)
        config = RunConfig(corpus="", outdir=str(tmp_path / "cmp"), seed=7)
        report = cmd_compare(config, validation_matrix=val_path, test_matrix=test_path)
        rows = {row["kind"]: row for row in report["rows"] if row["kind"] != "monolithic"}
        d_row, c_row = rows["group_d"], rows["group_c"]
        assert d_row["members_count"] < c_row["members_count"]
        assert d_row["accuracy"] >= c_row["accuracy"] - 0.02


class TestIngest:
    def test_valid_file_summary(self, tmp_path, capsys):
        pm = make_redundant_matrix(seed=31, split=Split.VALIDATION)
        path = str(tmp_path / "pm.csv")
        write_prediction_matrix(pm, path)
        rc = main(["ingest", path])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert len(summary["classifiers"]) == 12
        assert summary["num_classes"] == 2

    def test_label_out_of_range_rejected_with_line(self, tmp_path, capsys):
        path = tmp_path / "pm.csv"
        path.write_text("truth,CV-NB\n0,0\n1,5\n")
        (tmp_path / "pm.csv.meta.json").write_text('{"num_classes": 2, "split": "TEST"}')
        rc = main(["ingest", str(path)])
        assert rc == 1
        assert "line 3" in capsys.readouterr().err


class TestSingleStageCommands:
    def _write_matrices(self, tmp_path):
        vpm = make_redundant_matrix(seed=31, split=Split.VALIDATION)
        tpm = make_redundant_matrix(seed=32, split=Split.TEST)
        val_path = str(tmp_path / "val.csv")
        test_path = str(tmp_path / "test.csv")
        write_prediction_matrix(vpm, val_path)
        write_prediction_matrix(tpm, test_path)
        return val_path, test_path

    def test_diversity_then_cluster(self, tmp_path, capsys):
        val_path, _ = self._write_matrices(tmp_path)
        outdir = str(tmp_path / "out")
        assert main(["diversity", "--matrix", val_path, "--outdir", outdir]) == 0
        matrix_path = capsys.readouterr().out.strip()
        assert os.path.exists(matrix_path)
        assert main(["cluster", "--dissimilarity", matrix_path, "--outdir", outdir]) == 0
        dendro_path = capsys.readouterr().out.strip()
        text = open(dendro_path).read()
        assert text.startswith("hsel-dendrogram v1")
        assert "leaves 12" in text

    def test_select_rules_agree_on_engineered_fixture(self, tmp_path):
        # Both final-choice rules land on the same members here: the level-3
        # candidate maximizes distance and validation score simultaneously.
        val_path, _ = self._write_matrices(tmp_path)
        finals = {}
        for rule in ("max-validation", "max-diversity"):
            outdir = str(tmp_path / rule)
            rc = main(
                ["select", "--matrix", val_path, "--rule", rule,
                 "--metrics", "accuracy", "--outdir", outdir]
            )
            assert rc == 0
            doc = json.load(open(os.path.join(outdir, "selection_report.json")))
            finals[rule] = doc["metrics"]["accuracy"]["final"]
        assert finals["max-validation"]["rule"] == "max-validation"
        assert finals["max-diversity"]["rule"] == "max-diversity"
        assert finals["max-validation"]["members"] == finals["max-diversity"]["members"]

    def test_stack_command_round_trip(self, tmp_path, capsys):
        val_path, test_path = self._write_matrices(tmp_path)
        outdir = str(tmp_path / "out")
        rc = main(
            [
                "stack",
                "--validation-matrix", val_path,
                "--test-matrix", test_path,
                "--members", "SRC01-CLF,SRC05-CLF,SRC09-CLF",
                "--meta", "vote",
                "--outdir", outdir,
            ]
        )
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["test_eval"]["accuracy"] == 1.0
        from hsel.combine import stack_from_json

        restored = stack_from_json(open(out["stack"]).read())
        assert [m.canonical for m in restored.members] == [
            "SRC01-CLF", "SRC05-CLF", "SRC09-CLF",
        ]


def test_parser_defaults_documented():
    parser = build_parser()
    help_text = parser.format_help()
    assert "run" in help_text and "compare" in help_text and "ingest" in help_text
