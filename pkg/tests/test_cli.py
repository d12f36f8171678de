"""Tests for the specdec command line and its exit codes."""

import json

import pytest
from click.testing import CliRunner

from src.harness.cli import cli, EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner, out_dir):
    def run(*args):
        return runner.invoke(cli, ["--out-dir", str(out_dir), *args])
    return run


def test_predict(invoke, out_dir):
    result = invoke("predict", "--tar", "3.7", "--t-draft-ms", "53.5", "--t-target-ms", "60.03")
    assert result.exit_code == EXIT_OK, result.output
    assert "32.59" in result.output
    assert list(out_dir.glob("predict-*.csv"))


def test_predict_needs_both_latencies(invoke):
    result = invoke("predict", "--tar", "3.7", "--t-draft-ms", "53.5")
    assert result.exit_code == EXIT_VALIDATION


def test_parity_without_measurements_is_a_validation_error(invoke, out_dir):
    result = invoke("parity")
    assert result.exit_code == EXIT_VALIDATION
    assert not out_dir.exists()


def test_missing_model_file_is_a_runtime_failure(runner, out_dir, tmp_path):
    config = tmp_path / "params.json"
    config.write_text(json.dumps({
        "draft": {"type": "ngram_file", "path": str(tmp_path / "missing.json")},
        "target": {"type": "replay", "script": [[1.0, 0.0]]},
        "prompt": [0]
    }))
    result = runner.invoke(cli, ["--out-dir", str(out_dir), "--config", str(config), "run-specdec"])
    assert result.exit_code == EXIT_RUNTIME


def test_missing_config_file(invoke, tmp_path):
    result = invoke("--config", str(tmp_path / "nope.json"), "predict")
    assert result.exit_code == EXIT_VALIDATION


def test_bad_choice(invoke):
    assert invoke("--format", "xml", "predict").exit_code == EXIT_VALIDATION


def test_ingest(invoke, tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("ab\ncde\n")
    result = invoke("ingest", str(corpus))
    assert result.exit_code == EXIT_OK, result.output
    assert '"tokens": 7' in result.output


def test_fit_ngram(invoke, tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("abracadabra\nabba\n")
    output = tmp_path / "models" / "bigram.json"
    result = invoke("fit-ngram", str(corpus), "--order", "2", "--output", str(output))
    assert result.exit_code == EXIT_OK, result.output
    assert json.loads(output.read_text())["order"] == 2


def test_explore(invoke):
    result = invoke("explore", "--budget", "3.5e8", "--tolerance", "0.06", "--depths", "4,24",
                    "--ffn-dims", "3448,4096", "--limit", "5")
    assert result.exit_code == EXIT_OK, result.output


def test_explore_rejects_bad_depths(invoke):
    assert invoke("explore", "--depths", "4,x").exit_code == EXIT_VALIDATION


def test_explore_missing_budget_spec(invoke, tmp_path):
    result = invoke("explore", "--budget-spec", str(tmp_path / "nope.json"))
    assert result.exit_code == EXIT_VALIDATION
    assert "--budget-spec file not found" in result.output


@pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
def test_explore_malformed_budget_spec(invoke, tmp_path, content):
    spec = tmp_path / "budget.json"
    spec.write_text(content)
    assert invoke("explore", "--budget-spec", str(spec)).exit_code == EXIT_VALIDATION


def test_compare(invoke):
    result = invoke("compare", "--candidate", "pruned-1.3b:3.81:105.1", "--candidate", "pruned-wide-1.3b:3.70:53.5",
                    "--t-target-ms", "60.03")
    assert result.exit_code == EXIT_OK, result.output
    assert '"winner": "pruned-wide-1.3b"' in result.output


def test_compare_needs_two_candidates(invoke):
    result = invoke("compare", "--candidate", "a:3.0:50", "--t-target-ms", "60")
    assert result.exit_code == EXIT_VALIDATION


def test_run_specdec_with_prompt(invoke, tmp_path):
    config = tmp_path / "params.json"
    config.write_text(json.dumps({"synthetic": {"num_tokens": 3000, "sequence_length": 200}}))
    result = invoke("--config", str(config), "run-specdec", "--prompt", "hello", "--max-new-tokens", "8",
                    "--lookahead", "3")
    assert result.exit_code == EXIT_OK, result.output
