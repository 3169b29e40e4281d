"""
Model Runtime
Builds the intent predictor and ensemble network for a run configuration,
feeds them padded session batches and turns their outputs into losses,
rankings and predicted intents. Shared by the train, evaluate and
predict-intents use cases.
"""
import logging
import random
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import torch

from ...config.run_config import IntentMode, LossFamily, RunConfig, TrainingMethod, WeightHeadType
from ...domain.entities.dataset import SessionDataset
from ...domain.entities.session import HistoryWindow, SessionSample, context_dim
from ...domain.exceptions import IntelRuntimeError, IntelValidationError
from ...domain.services.ambiguity import (
    bpr_ambiguity, intent_kl, joint_loss, mse_ambiguity, pl_ambiguity
)
from ...domain.services.history_builder import build_history_windows
from ...domain.services.rank_aggregation import rank_by_scores
from ...domain.services.ranking_losses import bpr_loss, mse_loss, pl_loss
from ...domain.value_objects.intent import IntentDistribution
from ...domain.value_objects.scores import SIMPLEX_TOLERANCE
from ...infrastructure.models.batching import PairBatch, SessionBatch, collate_pairs, collate_sessions
from ...infrastructure.models.ensemble_network import AblationFlags, EnsembleNetwork
from ...infrastructure.models.intent_predictor import IntentPredictor

logger = logging.getLogger(__name__)


def _masked_mean(values: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Mean over the masked-in rows; 0 when the mask is empty"""
    kept = torch.where(mask, values, torch.zeros_like(values))
    return kept.sum() / mask.sum().clamp(min=1).to(values.dtype)


def configure_determinism(seed: int, deterministic: bool = True) -> None:
    """Seed every generator; single-threaded deterministic kernels when requested"""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    if deterministic:
        torch.use_deterministic_algorithms(True)
        torch.set_num_threads(1)


@dataclass
class ForwardOutput:
    """Network outputs for one batch"""
    weights: torch.Tensor                       # (B, N, K)
    ensemble: torch.Tensor                      # (B, N)
    intent: torch.Tensor                        # (B, D) intent fed to the ensemble
    predicted_intent: Optional[torch.Tensor]    # (B, D) learned or historical prediction


@dataclass
class LossBreakdown:
    """Batch means of the joint objective's components"""
    l_ens: torch.Tensor
    ambiguity: torch.Tensor
    l_int: torch.Tensor
    joint: torch.Tensor

    def as_floats(self) -> Dict[str, float]:
        return {
            "l_ens": float(self.l_ens.detach()),
            "ambiguity": float(self.ambiguity.detach()),
            "l_int": float(self.l_int.detach()),
            "joint": float(self.joint.detach()),
        }


@dataclass
class RankingOutput:
    """Rankings of a split plus what is needed to check and report them"""
    rankings: Dict[str, np.ndarray]
    predicted_intents: Dict[str, IntentDistribution]
    weight_rows: int
    simplex_violations: int


class EnsembleRuntime:
    """One configured pair of networks bound to a dataset"""

    def __init__(
        self,
        config: RunConfig,
        dataset: SessionDataset,
        windows: Optional[Dict[str, HistoryWindow]] = None,
        device: str = "cpu"
    ):
        self.config = config
        self.dataset = dataset
        self.device = torch.device(device)
        self.windows = windows if windows is not None else build_history_windows(
            dataset.samples,
            dataset.scheme,
            config.dataset.history_sessions,
            config.dataset.history_items,
        )
        self.intent_mode = config.model.intent_mode
        self.predictor = self._build_predictor()
        self.network = self._build_network()

    # ---------- construction ----------

    def _build_predictor(self) -> Optional[IntentPredictor]:
        if self.intent_mode != IntentMode.LEARNED:
            return None
        model = self.config.model
        return IntentPredictor(
            intent_dim=self.dataset.intent_dim,
            context_dim=context_dim(self.dataset.context_extra_dim),
            embed_dim=model.context_embed_dim,
            hidden_dim=model.hidden_dim,
            encoder=model.sequence_encoder,
            encoder_heads=model.encoder_heads,
        ).to(self.device)

    def _build_network(self) -> EnsembleNetwork:
        model = self.config.model
        return EnsembleNetwork(
            num_models=self.dataset.num_models,
            num_categories=self.dataset.num_categories,
            intent_dim=self.dataset.intent_dim,
            embed_dim=model.embed_dim,
            intent_embed_dim=model.intent_embed_dim,
            num_layers=model.num_layers,
            num_heads=model.num_heads,
            ablation=AblationFlags.from_section(model.ablation),
            weight_head=model.weight_head,
            list_level=self.config.training.method == TrainingMethod.AWELV,
        ).to(self.device)

    def parameters(self) -> List[torch.nn.Parameter]:
        params = list(self.network.parameters())
        if self.predictor is not None:
            params += list(self.predictor.parameters())
        return params

    def train(self, mode: bool = True) -> None:
        self.network.train(mode)
        if self.predictor is not None:
            self.predictor.train(mode)

    def state_dicts(self) -> Tuple[Dict[str, torch.Tensor], Optional[Dict[str, torch.Tensor]]]:
        predictor_state = None if self.predictor is None else self.predictor.state_dict()
        return self.network.state_dict(), predictor_state

    def load_state_dicts(self, archive: Dict) -> None:
        self.network.load_state_dict(archive["ensemble"])
        if self.predictor is not None:
            if archive.get("predictor") is None:
                raise IntelValidationError("Checkpoint has no intent predictor but the run needs one")
            self.predictor.load_state_dict(archive["predictor"])

    # ---------- batching ----------

    def collate(self, samples: Sequence[SessionSample]) -> SessionBatch:
        batch = collate_sessions(
            samples,
            self.windows,
            self.dataset.num_categories,
            self.dataset.intent_dim,
            self.dataset.context_extra_dim,
        )
        return batch.to(self.device)

    def batches(
        self,
        samples: Sequence[SessionSample],
        batch_size: int,
        order: Optional[Sequence[int]] = None
    ) -> Iterator[Tuple[List[SessionSample], SessionBatch]]:
        """Sessions in the given index order (default: as given) in chunks of batch_size"""
        indices = list(order) if order is not None else list(range(len(samples)))
        for start in range(0, len(indices), batch_size):
            chunk = [samples[i] for i in indices[start:start + batch_size]]
            yield chunk, self.collate(chunk)

    # ---------- forward ----------

    def session_intents(self, batch: SessionBatch) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        """(intent fed to the ensemble, predicted intent or None)"""
        if self.intent_mode == IntentMode.LEARNED:
            predicted = self.predictor(batch.context, batch.history)
            return predicted, predicted
        if self.intent_mode == IntentMode.HIS_AVG:
            return batch.history.average_intent, batch.history.average_intent
        return torch.zeros_like(batch.true_intent), None

    def forward(self, batch: SessionBatch) -> ForwardOutput:
        intent, predicted = self.session_intents(batch)
        weights, ensemble = self.network.forward_batch(batch, intent)
        return ForwardOutput(weights, ensemble, intent, predicted)

    def losses(
        self,
        batch: SessionBatch,
        output: ForwardOutput,
        pairs: Optional[PairBatch] = None
    ) -> LossBreakdown:
        """l_ens and the ambiguity of the configured family, intent KL and the joint loss"""
        training = self.config.training
        valid = batch.item_valid
        printed = training.printed_form

        if training.loss == LossFamily.MSE:
            targets = batch.levels.clamp(min=0).to(output.ensemble.dtype)
            l_ens = mse_loss(output.ensemble, targets, valid)
            ambiguity = mse_ambiguity(batch.scores, output.ensemble, output.weights, valid).weighted_total
        elif training.loss == LossFamily.BPR:
            if pairs is None:
                raise IntelValidationError("The pair-wise loss needs sampled pairs")
            l_ens = bpr_loss(output.ensemble, pairs.positive, pairs.negative, pairs.valid, allow_empty=True)
            ambiguity = bpr_ambiguity(
                batch.scores, output.ensemble, output.weights,
                pairs.positive, pairs.negative, pairs.valid,
                printed_form=printed, allow_empty=True,
            ).weighted_total
        else:
            l_ens = pl_loss(output.ensemble, batch.pi_order, valid)
            ambiguity = pl_ambiguity(
                batch.scores, output.ensemble, output.weights, batch.pi_order, valid, printed_form=printed
            ).weighted_total

        if self.intent_mode == IntentMode.LEARNED:
            l_int = intent_kl(batch.true_intent, output.predicted_intent).mean()
        else:
            l_int = torch.zeros((), dtype=output.ensemble.dtype, device=output.ensemble.device)

        if training.loss == LossFamily.BPR:
            # sessions without a sampled pair carry no pair-wise signal
            has_pairs = pairs.counts > 0
            l_ens, ambiguity = _masked_mean(l_ens, has_pairs), _masked_mean(ambiguity, has_pairs)
        else:
            l_ens, ambiguity = l_ens.mean(), ambiguity.mean()
        joint = joint_loss(l_ens, ambiguity, l_int, self.config.alpha, training.gamma)
        return LossBreakdown(l_ens, ambiguity, l_int, joint)

    def sample_pairs(self, samples: Sequence[SessionSample], rng: np.random.Generator) -> Optional[PairBatch]:
        if self.config.training.loss != LossFamily.BPR:
            return None
        return collate_pairs(samples, rng).to(self.device)

    # ---------- inference ----------

    @torch.no_grad()
    def rank(self, samples: Sequence[SessionSample], batch_size: Optional[int] = None) -> RankingOutput:
        """Rank every session by its ensemble scores and count weight rows off the simplex"""
        self.train(False)
        batch_size = batch_size or self.config.training.batch_size
        rankings: Dict[str, np.ndarray] = {}
        predicted: Dict[str, IntentDistribution] = {}
        rows = violations = 0
        for chunk, batch in self.batches(samples, batch_size):
            output = self.forward(batch)
            weights = output.weights.double().cpu()
            ensemble = output.ensemble.double().cpu().numpy()
            for b, sample in enumerate(chunk):
                n = len(sample.record.candidates)
                rankings[sample.session_id] = rank_by_scores(ensemble[b, :n], sample.item_ids)
                if output.predicted_intent is not None:
                    predicted[sample.session_id] = IntentDistribution.from_counts(
                        output.predicted_intent[b].double().cpu().numpy()
                    )
                rows += n
                violations += count_simplex_violations(weights[b, :n])
        return RankingOutput(rankings, predicted, rows, violations)

    def require_simplex(self, output: RankingOutput, context: str) -> None:
        """Weights of the simplex head must all lie on the probability simplex"""
        if self.config.model.weight_head != WeightHeadType.SIMPLEX:
            return
        if output.simplex_violations:
            raise IntelRuntimeError(
                f"{context}: {output.simplex_violations}/{output.weight_rows} weight rows left the simplex"
            )
        logger.debug(f"{context}: all {output.weight_rows} weight rows on the simplex")


def count_simplex_violations(weights: torch.Tensor, tolerance: float = SIMPLEX_TOLERANCE) -> int:
    """Rows with a negative entry or a sum off 1 by more than the tolerance"""
    if weights.numel() == 0:
        return 0
    negative = (weights < 0).any(-1)
    off_sum = (weights.sum(-1) - 1.0).abs() > tolerance
    return int((negative | off_sum).sum())
