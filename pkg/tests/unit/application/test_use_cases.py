"""
Tests for the application use cases on small in-memory datasets
"""
import json

import numpy as np
import pytest
import torch

from src.application.dto.requests import (
    AggregateRankingsRequest, AggregateRequest, EvaluateRequest, PredictIntentsRequest, VerifyTheoremsRequest
)
from src.application.services.model_runtime import EnsembleRuntime, configure_determinism
from src.application.use_cases import (
    AggregateMetricsUseCase, AggregateRankingsUseCase, EvaluateUseCase, PredictIntentsUseCase,
    TrainEnsembleUseCase, VerifyTheoremsUseCase
)
from src.application.use_cases.evaluate_use_case import baseline_name
from src.config.run_config import build_run_config
from src.config.settings import RuntimeSettings
from src.domain.entities.dataset import SessionDataset
from src.domain.exceptions import FingerprintMismatchError, IntelValidationError
from src.domain.repositories.idataset_repository import ISessionRepository
from src.domain.services.ranking_metrics import HEADLINE_METRIC
from src.domain.value_objects.metrics import MetricsReport, MetricSummary
from src.infrastructure.checkpoints.checkpoint_store import load_checkpoint
from src.domain.services.ranking_losses import bpr_loss
from src.infrastructure.models.batching import PairBatch, collate_sessions
from src.infrastructure.repositories import JsonMetricsRepository
from tests.conftest import make_dataset


class InMemorySessionRepository(ISessionRepository):

    def __init__(self, dataset: SessionDataset):
        self.dataset = dataset

    def load(self) -> SessionDataset:
        return self.dataset

    def save(self, dataset: SessionDataset) -> None:
        self.dataset = dataset

    def exists(self) -> bool:
        return True


def small_config(tmp_path, *overrides):
    raw = {
        "dataset": {"history_sessions": 5, "history_items": 20},
        "model": {"embed_dim": 8, "intent_embed_dim": 4, "hidden_dim": 8, "context_embed_dim": 4, "num_layers": 1},
        "training": {"max_epochs": 2, "patience": 1, "batch_size": 16, "seeds": [0]},
        "evaluation": {"ks": [3, 5]},
        "output": {"dir": str(tmp_path / "outputs")},
    }
    return build_run_config(raw, overrides)


@pytest.fixture
def repo():
    return InMemorySessionRepository(make_dataset(users=3, days=10, items=5))


class TestTrain:

    def test_writes_checkpoint_and_log(self, tmp_path, repo):
        config = small_config(tmp_path)
        result, = TrainEnsembleUseCase(repo).execute(config)
        assert result.checkpoint_path.exists()
        lines = result.log_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == result.epochs_run
        entry = json.loads(lines[0])
        assert {"l_ens", "ambiguity", "l_int", "joint", "validation"} <= set(entry)
        assert HEADLINE_METRIC in entry["validation"]

    def test_zero_learning_rate_keeps_initial_weights(self, tmp_path, repo):
        config = small_config(tmp_path, "training.learning_rate=0", "training.max_epochs=1")
        result, = TrainEnsembleUseCase(repo).execute(config)

        configure_determinism(0)
        fresh = EnsembleRuntime(config, repo.dataset)
        trained = load_checkpoint(result.checkpoint_path, config.fingerprint())
        for name, value in fresh.network.state_dict().items():
            assert torch.equal(trained["ensemble"][name], value)

    @pytest.mark.parametrize("loss", ["mse", "bpr", "pl"])
    def test_each_loss_family_trains(self, tmp_path, repo, loss):
        config = small_config(tmp_path, f"training.loss={loss}", "training.max_epochs=1")
        result, = TrainEnsembleUseCase(repo).execute(config)
        assert result.best_epoch == 1

    def test_awelv_has_no_predictor(self, tmp_path, repo):
        config = small_config(tmp_path, "training.method=awelv", "training.max_epochs=1")
        result, = TrainEnsembleUseCase(repo).execute(config)
        assert load_checkpoint(result.checkpoint_path)["predictor"] is None
        assert config.run_name == "aWELv"


class TestEvaluate:

    def test_deterministic(self, tmp_path, repo):
        config = small_config(tmp_path, "training.max_epochs=1")
        TrainEnsembleUseCase(repo).execute(config)
        use_case = EvaluateUseCase(repo, JsonMetricsRepository())
        first = use_case.execute(config)
        text = (config.output_dir / "metrics.json").read_text(encoding="utf-8")
        second = use_case.execute(config)
        assert first.headline == second.headline
        assert (config.output_dir / "metrics.json").read_text(encoding="utf-8") == text
        assert first.simplex_rows_checked == sum(s.scores.num_items for s in repo.dataset.split("test"))

    def test_baselines_only(self, tmp_path, repo):
        config = small_config(tmp_path)
        result = EvaluateUseCase(repo, JsonMetricsRepository()).execute(
            config, EvaluateRequest(baselines=["single:0", "borda", "rra"], skip_model=True)
        )
        assert set(result.metrics_paths) == {"Single-m0", "Borda", "RRA"}
        report = JsonMetricsRepository().load(result.metrics_paths["Borda"])
        assert "Click-NDCG@5" in report

    def test_changed_model_config_is_rejected(self, tmp_path, repo):
        config = small_config(tmp_path, "training.max_epochs=1")
        TrainEnsembleUseCase(repo).execute(config)
        changed = small_config(tmp_path, "model.embed_dim=16")
        with pytest.raises(FingerprintMismatchError):
            EvaluateUseCase(repo, JsonMetricsRepository()).execute(changed)

    def test_baseline_names(self):
        assert baseline_name("single:1", ["click_model", "buy_model"]) == "Single-buy_model"
        with pytest.raises(IntelValidationError):
            baseline_name("single:2", ["a", "b"])


class TestPredictIntents:

    def test_learned(self, tmp_path, repo):
        config = small_config(tmp_path, "training.max_epochs=1")
        TrainEnsembleUseCase(repo).execute(config)
        result = PredictIntentsUseCase(repo).execute(config, PredictIntentsRequest(split="test"))
        lines = result.intents_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == result.num_sessions == len(repo.dataset.split("test"))
        assert sum(json.loads(lines[0])["predicted"]) == pytest.approx(1.0)

    def test_historical_average_needs_no_checkpoint(self, tmp_path, repo):
        config = small_config(tmp_path, "model.intent_mode=his_avg")
        result = PredictIntentsUseCase(repo).execute(config)
        assert result.mode == "his_avg"
        assert 0.0 <= result.intent_ndcg <= 1.0

    def test_none_mode_rejected(self, tmp_path, repo):
        with pytest.raises(IntelValidationError):
            PredictIntentsUseCase(repo).execute(small_config(tmp_path, "model.intent_mode=none"))


class TestAggregation:

    def test_rankings_file(self, tmp_path, repo):
        out = tmp_path / "rankings.jsonl"
        result = AggregateRankingsUseCase(repo, num_workers=2).execute(
            AggregateRankingsRequest(method="borda", output=out, split="test")
        )
        rows = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
        assert result.num_sessions == len(rows) == len(repo.dataset.split("test"))
        assert [r["session_id"] for r in rows] == sorted(r["session_id"] for r in rows)
        assert len(set(rows[0]["ranking"])) == 5

    def test_metrics_over_seeds(self, tmp_path):
        metrics_repo = JsonMetricsRepository()
        for seed, value in enumerate((0.2, 0.4)):
            metrics_repo.save(MetricsReport({HEADLINE_METRIC: MetricSummary(value, n_sessions=4)}),
                              tmp_path / f"seed_{seed}")
        request = AggregateRequest(
            inputs=[tmp_path / "seed_0", tmp_path / "seed_1"],
            output=tmp_path / "run" / "metrics.json",
            comparison=tmp_path / "comparison.csv",
        )
        report = AggregateMetricsUseCase(metrics_repo).execute(request)
        assert report.mean(HEADLINE_METRIC) == pytest.approx(0.3)
        assert report[HEADLINE_METRIC].std == pytest.approx(0.1)
        assert (tmp_path / "comparison.csv").exists()


class TestVerifyTheorems:

    def test_report_is_reproducible(self, tmp_path):
        request = dict(trials=10, seed=7, max_items=8, max_items_listwise=6, sweep_steps=3)
        first = VerifyTheoremsUseCase().execute(VerifyTheoremsRequest(output_dir=tmp_path / "a", **request))
        VerifyTheoremsUseCase().execute(VerifyTheoremsRequest(output_dir=tmp_path / "b", **request))
        assert first.all_hold
        assert set(first.theorems) == {"pointwise", "pairwise", "listwise"}
        assert (tmp_path / "a" / "report.json").read_text(encoding="utf-8") == (
            tmp_path / "b" / "report.json"
        ).read_text(encoding="utf-8")
        assert not (tmp_path / "a" / "counterexamples").exists()


def test_runtime_settings_from_environment(monkeypatch):
    monkeypatch.setenv("INTEL_NUM_WORKERS", "3")
    assert RuntimeSettings().num_workers == 3


@pytest.mark.parametrize("loss", ["mse", "bpr", "pl"])
def test_joint_loss_gradcheck(tmp_path, repo, loss):
    config = small_config(tmp_path, f"training.loss={loss}")
    configure_determinism(0, deterministic=False)
    runtime = EnsembleRuntime(config, repo.dataset)
    runtime.network.double()
    runtime.predictor.double()
    samples = repo.dataset.split("train")[:3]
    batch = collate_sessions(
        samples, runtime.windows, repo.dataset.num_categories, repo.dataset.intent_dim, dtype=torch.float64
    )
    pairs = runtime.sample_pairs(samples, np.random.default_rng(0))
    scores = batch.scores.clone().requires_grad_(True)

    def joint(x):
        batch.scores = x
        return runtime.losses(batch, runtime.forward(batch), pairs).joint

    assert torch.autograd.gradcheck(joint, (scores,), eps=1e-5, atol=1e-6, rtol=1e-4)


def _has_pairs(levels):
    positives = levels[levels >= 1]
    return bool(np.isin(positives - 1, levels).any())


def test_bpr_term_averages_only_sessions_with_pairs(tmp_path, repo):
    config = small_config(tmp_path, "training.loss=bpr")
    configure_determinism(0)
    runtime = EnsembleRuntime(config, repo.dataset)
    samples = [s for s in repo.dataset.split("train") if _has_pairs(s.ground_truth.levels)][:2]
    batch = runtime.collate(samples)
    pairs = runtime.sample_pairs(samples, np.random.default_rng(0))
    assert bool((pairs.counts > 0).all())

    valid = pairs.valid.clone()
    valid[1] = False
    one_session = PairBatch(pairs.positive, pairs.negative, valid)
    with torch.no_grad():
        output = runtime.forward(batch)
        expected = bpr_loss(output.ensemble, pairs.positive, pairs.negative, pairs.valid)[0]
        breakdown = runtime.losses(batch, output, one_session)
    assert breakdown.l_ens.item() == pytest.approx(expected.item())
