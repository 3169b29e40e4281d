"""
Predict Intents Use Case
Writes the predicted intent distribution of every session in a split
together with the intent-prediction metrics
"""
import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from ..dto.reports import IntentPredictionResult
from ..dto.requests import PredictIntentsRequest
from ..services.model_runtime import EnsembleRuntime, configure_determinism
from .train_ensemble_use_case import checkpoint_path
from ...config.run_config import IntentMode, RunConfig
from ...config.settings import RuntimeSettings
from ...domain.exceptions import IntelValidationError
from ...domain.repositories.idataset_repository import ISessionRepository
from ...domain.services.ranking_metrics import intent_macro_f1, intent_ndcg
from ...infrastructure.checkpoints.checkpoint_store import load_checkpoint

logger = logging.getLogger(__name__)

INTENTS_NAME = "intents.jsonl"


class PredictIntentsUseCase:
    """Intent predictions of a trained run (or the historical average)"""

    def __init__(self, session_repo: ISessionRepository, runtime_settings: Optional[RuntimeSettings] = None):
        self.session_repo = session_repo
        self.settings = runtime_settings or RuntimeSettings()

    def execute(self, config: RunConfig, request: Optional[PredictIntentsRequest] = None) -> IntentPredictionResult:
        request = request or PredictIntentsRequest()
        mode = config.model.intent_mode
        if mode == IntentMode.NONE:
            raise IntelValidationError("Intent mode 'none' predicts no intents")

        dataset = self.session_repo.load()
        samples = dataset.split(request.split)
        runtime = EnsembleRuntime(config, dataset, device=self.settings.device)
        if mode == IntentMode.LEARNED:
            path = Path(request.checkpoint) if request.checkpoint else checkpoint_path(config, config.training.seeds[0])
            archive = load_checkpoint(path, expected_fingerprint=config.fingerprint())
            configure_determinism(int(archive.get("seed", 0)), self.settings.deterministic)
            runtime.load_state_dicts(archive)

        runtime.train(False)
        out_path = config.output_dir / INTENTS_NAME
        out_path.parent.mkdir(parents=True, exist_ok=True)
        ndcgs, f1s = [], []
        with torch.no_grad(), open(out_path, "w", encoding="utf-8", newline="\n") as f:
            for chunk, batch in runtime.batches(samples, config.training.batch_size):
                _, predicted = runtime.session_intents(batch)
                predicted = predicted.double().cpu().numpy()
                for b, sample in enumerate(chunk):
                    probs = predicted[b] / predicted[b].sum()
                    ndcg = intent_ndcg(sample.intent, probs)
                    f1 = intent_macro_f1(sample.intent, probs, config.evaluation.intent_f1_threshold)
                    ndcgs.append(ndcg)
                    f1s.append(f1)
                    f.write(json.dumps({
                        "session_id": sample.session_id,
                        "predicted": probs.tolist(),
                        "true": sample.intent.to_list(),
                        "intent_ndcg": ndcg,
                        "intent_macro_f1": f1,
                    }) + "\n")

        result = IntentPredictionResult(
            intents_path=out_path,
            mode=mode.value,
            num_sessions=len(samples),
            intent_ndcg=float(np.mean(ndcgs)),
            intent_macro_f1=float(np.mean(f1s)),
        )
        logger.info(
            f"Predicted intents ({mode.value}) for {len(samples)} sessions: "
            f"Intent-NDCG@10={result.intent_ndcg:.4f} Intent-MacroF1={result.intent_macro_f1:.4f} -> {out_path}"
        )
        return result
