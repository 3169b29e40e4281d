"""
Train Ensemble Use Case
Joint training of the intent predictor and the ensemble network with
early stopping on the validation headline metric
"""
import json
import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import torch

from ..dto.reports import EpochLog, TrainingResult
from ..services.model_runtime import EnsembleRuntime, configure_determinism
from ...config.run_config import RunConfig
from ...config.settings import RuntimeSettings
from ...domain.entities.dataset import SessionDataset
from ...domain.exceptions import NonFiniteLossError, TrainingDivergedError
from ...domain.repositories.idataset_repository import ISessionRepository
from ...domain.services.history_builder import build_history_windows
from ...domain.services.ranking_metrics import HEADLINE_METRIC, evaluate_run
from ...infrastructure.checkpoints.checkpoint_store import save_checkpoint

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.pt"
TRAIN_LOG_NAME = "train_log.jsonl"


def seed_dir(config: RunConfig, seed: int) -> Path:
    return config.output_dir / f"seed_{seed}"


def checkpoint_path(config: RunConfig, seed: int) -> Path:
    return seed_dir(config, seed) / CHECKPOINT_NAME


class TrainEnsembleUseCase:
    """Trains one model per configured seed"""

    def __init__(self, session_repo: ISessionRepository, runtime_settings: Optional[RuntimeSettings] = None):
        self.session_repo = session_repo
        self.settings = runtime_settings or RuntimeSettings()

    def execute(self, config: RunConfig) -> List[TrainingResult]:
        dataset = self.session_repo.load()
        windows = build_history_windows(
            dataset.samples, dataset.scheme, config.dataset.history_sessions, config.dataset.history_items
        )
        logger.info(
            f"Training {config.run_name} on {len(dataset.split('train'))} sessions "
            f"for seeds {config.training.seeds}"
        )
        return [self.train_seed(config, dataset, windows, seed) for seed in config.training.seeds]

    def train_seed(self, config: RunConfig, dataset: SessionDataset, windows: Dict, seed: int) -> TrainingResult:
        configure_determinism(seed, self.settings.deterministic)
        training = config.training
        runtime = EnsembleRuntime(config, dataset, windows, self.settings.device)
        optimizer = torch.optim.Adam(
            runtime.parameters(), lr=training.learning_rate, weight_decay=training.weight_decay
        )
        rng = np.random.default_rng(seed)

        train = dataset.split("train")
        validation = dataset.split("validation")
        out_dir = seed_dir(config, seed)
        out_dir.mkdir(parents=True, exist_ok=True)
        ckpt_path = out_dir / CHECKPOINT_NAME
        log_path = out_dir / TRAIN_LOG_NAME

        best_metric = -math.inf
        best_epoch = 0
        epochs_without_gain = 0
        epochs_run = 0
        stopped_early = False

        with open(log_path, "w", encoding="utf-8", newline="\n") as log_file:
            for epoch in range(1, training.max_epochs + 1):
                epochs_run = epoch
                losses = self._train_epoch(runtime, optimizer, train, rng, epoch, ckpt_path)
                validation_metrics = self._validate(runtime, validation, config)

                entry = EpochLog(epoch=epoch, validation=validation_metrics, **losses)
                log_file.write(json.dumps(entry.model_dump(), sort_keys=True) + "\n")
                log_file.flush()

                metric = validation_metrics[HEADLINE_METRIC]
                logger.info(
                    f"[seed {seed}] epoch {epoch}: joint={losses['joint']:.5f} "
                    f"l_ens={losses['l_ens']:.5f} A={losses['ambiguity']:.5f} "
                    f"l_int={losses['l_int']:.5f} val {HEADLINE_METRIC}={metric:.4f}"
                )
                if metric > best_metric:
                    best_metric, best_epoch, epochs_without_gain = metric, epoch, 0
                    ensemble_state, predictor_state = runtime.state_dicts()
                    save_checkpoint(
                        ckpt_path,
                        fingerprint=config.fingerprint(),
                        config=config.model_dump(mode="json"),
                        ensemble_state=ensemble_state,
                        predictor_state=predictor_state,
                        seed=seed,
                        epoch=epoch,
                        metrics=validation_metrics,
                    )
                else:
                    epochs_without_gain += 1
                    if epochs_without_gain >= training.patience:
                        stopped_early = True
                        logger.info(f"[seed {seed}] early stop after {epoch} epochs (best epoch {best_epoch})")
                        break

        return TrainingResult(
            run_name=config.run_name,
            seed=seed,
            epochs_run=epochs_run,
            best_epoch=best_epoch,
            best_metric=best_metric,
            stopped_early=stopped_early,
            checkpoint_path=ckpt_path,
            log_path=log_path,
        )

    def _train_epoch(
        self,
        runtime: EnsembleRuntime,
        optimizer: torch.optim.Optimizer,
        train,
        rng: np.random.Generator,
        epoch: int,
        ckpt_path: Path
    ) -> Dict[str, float]:
        """One pass over the training sessions in a seeded random order; returns mean losses"""
        runtime.train(True)
        totals: Dict[str, float] = defaultdict(float)
        steps = 0
        order = rng.permutation(len(train))
        for step, (chunk, batch) in enumerate(runtime.batches(train, runtime.config.training.batch_size, order)):
            pairs = runtime.sample_pairs(chunk, rng)
            try:
                output = runtime.forward(batch)
                losses = runtime.losses(batch, output, pairs)
            except NonFiniteLossError as e:
                kept = str(ckpt_path) if ckpt_path.exists() else None
                raise TrainingDivergedError(f"Epoch {epoch}, step {step}: {e}", kept) from e

            optimizer.zero_grad()
            losses.joint.backward()
            optimizer.step()

            for name, value in losses.as_floats().items():
                totals[name] += value
            steps += 1
            logger.debug(f"epoch {epoch} step {step}: joint={totals['joint'] / steps:.5f}")
        return {name: value / max(steps, 1) for name, value in totals.items()}

    def _validate(self, runtime: EnsembleRuntime, validation, config: RunConfig) -> Dict[str, float]:
        ranking = runtime.rank(validation)
        runtime.require_simplex(ranking, "validation")
        objectives = config.evaluation.objectives
        if objectives and "all" not in [o.lower() for o in objectives]:
            objectives = ["all"] + list(objectives)
        report = evaluate_run(
            ranking.rankings,
            validation,
            runtime.dataset.scheme,
            objectives=objectives,
            ks=config.evaluation.ks if 3 in config.evaluation.ks else [3] + list(config.evaluation.ks),
            relevance_mode=config.evaluation.relevance_mode,
            num_workers=self.settings.num_workers,
        )
        return {name: report.mean(name) for name in report.metric_names}
