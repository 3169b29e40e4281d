"""
Integration test: generate a small synthetic dataset, train, evaluate and
aggregate through the command line entry point
"""
import json

import pytest
import yaml

from src.api.main import main
from src.domain.services.ranking_metrics import HEADLINE_METRIC


def write_config(tmp_path, **sections):
    data_dir = tmp_path / "data"
    raw = {
        "data": {
            "sessions_path": str(data_dir / "sessions.jsonl"),
            "interactions_path": str(data_dir / "interactions.csv"),
            "basic_lists_path": str(data_dir / "basic_lists.jsonl"),
            "min_positive": 1,
            "top_m": 15,
            "test_days": 3,
            "validation_days": 2,
        },
        "dataset": {"behaviors": ["examine", "click", "buy"], "history_sessions": 5, "history_items": 20},
        "synthetic": {
            "num_users": 30, "num_items": 150, "num_categories": 3, "num_models": 2,
            "sessions_per_user": 8, "num_days": 16, "pool_size": 15, "list_length": 12, "seed": 1,
        },
        "model": {"embed_dim": 8, "intent_embed_dim": 4, "hidden_dim": 8, "context_embed_dim": 4, "num_layers": 1},
        "training": {"max_epochs": 2, "patience": 2, "batch_size": 64, "seeds": [0, 1]},
        "evaluation": {"ks": [3, 10], "baselines": ["single:0", "single:1", "borda", "rra"]},
        "output": {"dir": str(tmp_path / "outputs")},
    }
    for section, values in sections.items():
        raw[section].update(values)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("synthetic")
    config = write_config(tmp_path)
    assert main(["gen-synthetic", "--config", str(config)]) == 0
    assert main(["train", "--config", str(config)]) == 0
    return tmp_path, config


def test_generation_artifacts(trained_run):
    tmp_path, _ = trained_run
    data_dir = tmp_path / "data"
    for name in ("interactions.csv", "basic_lists.jsonl", "sessions.jsonl", "sessions.meta.json"):
        assert (data_dir / name).exists()
    report = json.loads((data_dir / "generation_report.json").read_text(encoding="utf-8"))
    assert report["num_test_sessions"] > 0
    assert set(report["single_ndcg"]) == {"click_model", "buy_model"}


def test_training_artifacts(trained_run):
    tmp_path, _ = trained_run
    run_dir = tmp_path / "outputs" / "IntEL-PL"
    for seed in (0, 1):
        assert (run_dir / f"seed_{seed}" / "checkpoint.pt").exists()
        assert (run_dir / f"seed_{seed}" / "train_log.jsonl").exists()


def test_evaluate_writes_model_and_baseline_metrics(trained_run):
    tmp_path, config = trained_run
    assert main(["evaluate", "--config", str(config)]) == 0
    outputs = tmp_path / "outputs"
    aggregated = json.loads((outputs / "IntEL-PL" / "metrics.json").read_text(encoding="utf-8"))
    assert len(aggregated[HEADLINE_METRIC]["per_seed"]) == 2
    assert 0.0 <= aggregated[HEADLINE_METRIC]["mean"] <= 1.0
    assert "Intent-NDCG@10" in aggregated
    for name in ("Single-click_model", "Single-buy_model", "Borda", "RRA"):
        assert (outputs / name / "metrics.json").exists()


def test_evaluation_is_byte_identical(trained_run):
    tmp_path, config = trained_run
    target = tmp_path / "outputs" / "IntEL-PL" / "seed_0" / "checkpoint.pt"
    assert main(["evaluate", "--config", str(config), "--checkpoint", str(target), "--baselines"]) == 0
    first = (target.parent / "metrics.json").read_bytes()
    assert main(["evaluate", "--config", str(config), "--checkpoint", str(target), "--baselines"]) == 0
    assert (target.parent / "metrics.json").read_bytes() == first


def test_aggregate_and_predict(trained_run):
    tmp_path, config = trained_run
    rankings = tmp_path / "rankings.jsonl"
    assert main(["aggregate", "--config", str(config), "--method", "rra", "--out", str(rankings)]) == 0
    assert rankings.read_text(encoding="utf-8").count("\n") > 0

    assert main(["predict-intents", "--config", str(config)]) == 0
    assert (tmp_path / "outputs" / "IntEL-PL" / "intents.jsonl").exists()

    run_dir = tmp_path / "outputs" / "IntEL-PL"
    out = tmp_path / "combined" / "metrics.json"
    assert main([
        "aggregate-metrics", "--inputs", str(run_dir / "seed_0"), str(run_dir / "seed_1"), "--out", str(out),
    ]) == 0
    assert HEADLINE_METRIC in json.loads(out.read_text(encoding="utf-8"))


def test_fingerprint_mismatch_is_a_validation_error(trained_run):
    _, config = trained_run
    assert main(["evaluate", "--config", str(config), "--set", "model.embed_dim=16", "--baselines"]) == 1
