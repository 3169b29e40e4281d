"""
Intent-Aware Ensemble Network
Encodes the basic score lists and the item categories with self-attention,
conditions both on the session intent through cross-attention and emits
per-item per-model ensemble weights.

Also serves the list-level variant (one weight row shared by every item)
by mean-pooling the item features before the weight head.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch
import torch.nn as nn

from ...config.run_config import AblationSection, WeightHeadType
from ...domain.exceptions import EmptySessionError, NoInputBranchesError, OutOfVocabularyError, ShapeMismatchError
from .batching import SessionBatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AblationFlags:
    """-Int, -I, -S, -Cross and -Self variants"""
    no_intent: bool = False
    no_category: bool = False
    no_score: bool = False
    no_cross: bool = False
    no_self: bool = False

    def __post_init__(self):
        if self.no_category and self.no_score:
            raise NoInputBranchesError("Dropping both the category and the score branch leaves no input")

    @classmethod
    def from_section(cls, section: AblationSection) -> 'AblationFlags':
        return cls(**section.model_dump())

    @property
    def suffix(self) -> str:
        labels = [
            ("-Int", self.no_intent), ("-I", self.no_category), ("-S", self.no_score),
            ("-Cross", self.no_cross), ("-Self", self.no_self),
        ]
        return "".join(label for label, on in labels if on)


class SelfAttentionStack(nn.Module):
    """T multi-head self-attention layers with residual connections, no positional encoding"""

    def __init__(self, dim: int, num_heads: int, num_layers: int):
        super().__init__()
        self.layers = nn.ModuleList([
            nn.MultiheadAttention(dim, num_heads, dropout=0.0, batch_first=True)
            for _ in range(num_layers)
        ])

    def forward(self, x: torch.Tensor, item_valid: torch.Tensor) -> torch.Tensor:
        padding = ~item_valid
        for attention in self.layers:
            attended, _ = attention(x, x, x, key_padding_mask=padding, need_weights=False)
            x = x + attended
        return x


class IntentCrossAttention(nn.Module):
    """
    The broadcast intent query attends over the N item rows. Row n of the
    output is N * alpha_n * V(r_n), so the rows average to the pooled
    attention output while staying item-specific.
    """

    def __init__(self, dim: int, num_heads: int):
        super().__init__()
        if dim % num_heads:
            raise ShapeMismatchError(f"Embedding size {dim} is not divisible by {num_heads} heads")
        self.num_heads = num_heads
        self.head_dim = dim // num_heads
        self.key = nn.Linear(dim, dim, bias=False)
        self.value = nn.Linear(dim, dim, bias=False)

    def attention_weights(
        self,
        query: torch.Tensor,
        reps: torch.Tensor,
        item_valid: torch.Tensor
    ) -> torch.Tensor:
        """(B, H, N) attention distribution over valid items"""
        batch, n, _ = reps.shape
        q = query.view(batch, self.num_heads, self.head_dim)
        k = self.key(reps).view(batch, n, self.num_heads, self.head_dim)
        logits = torch.einsum("bhd,bnhd->bhn", q, k) / math.sqrt(self.head_dim)
        logits = logits.masked_fill(~item_valid.unsqueeze(1), float("-inf"))
        return torch.softmax(logits, dim=-1)

    def forward(self, query: torch.Tensor, reps: torch.Tensor, item_valid: torch.Tensor) -> torch.Tensor:
        if query.shape[-1] != reps.shape[-1]:
            raise ShapeMismatchError(f"Query size {query.shape[-1]} != representation size {reps.shape[-1]}")
        batch, n, dim = reps.shape
        alpha = self.attention_weights(query, reps, item_valid)
        v = self.value(reps).view(batch, n, self.num_heads, self.head_dim)
        count = item_valid.sum(-1).to(reps.dtype).view(batch, 1, 1, 1)
        out = alpha.permute(0, 2, 1).unsqueeze(-1) * v * count
        return out.reshape(batch, n, dim)


class EnsembleNetwork(nn.Module):
    """Per-item per-model weights over K basic score lists"""

    def __init__(
        self,
        num_models: int,
        num_categories: int,
        intent_dim: int,
        embed_dim: int = 64,
        intent_embed_dim: int = 32,
        num_layers: int = 2,
        num_heads: int = 2,
        ablation: Optional[AblationFlags] = None,
        weight_head: WeightHeadType = WeightHeadType.SIMPLEX,
        list_level: bool = False
    ):
        super().__init__()
        if num_layers < 1:
            raise ShapeMismatchError("At least one self-attention layer is required")
        self.num_models = num_models
        self.num_categories = num_categories
        self.intent_dim = intent_dim
        self.ablation = ablation or AblationFlags()
        self.weight_head = WeightHeadType(weight_head)
        self.list_level = list_level

        branches = 0
        if not self.ablation.no_score:
            self.score_embedding = nn.Linear(2 * num_models, embed_dim)
            self.score_attention = SelfAttentionStack(embed_dim, num_heads, num_layers)
            self.score_cross = IntentCrossAttention(embed_dim, num_heads)
            branches += 1
        if not self.ablation.no_category:
            self.category_embedding = nn.Embedding(num_categories, embed_dim)
            self.category_attention = SelfAttentionStack(embed_dim, num_heads, num_layers)
            self.category_cross = IntentCrossAttention(embed_dim, num_heads)
            branches += 1

        self.intent_projection = nn.Linear(intent_dim, intent_embed_dim, bias=False)
        # W^Q, shared by both cross-attention branches
        self.query_projection = nn.Linear(intent_embed_dim, embed_dim, bias=False)
        self.head = nn.Linear(branches * embed_dim + intent_embed_dim, num_models)

    @staticmethod
    def _require_items(item_valid: torch.Tensor) -> None:
        if item_valid.shape[-1] == 0 or bool((item_valid.sum(-1) == 0).any()):
            raise EmptySessionError("Every session needs at least one candidate")

    def embed_scores(
        self,
        scores: torch.Tensor,
        score_mask: torch.Tensor,
        item_valid: torch.Tensor
    ) -> torch.Tensor:
        """(B, N, d_e) from each item's K scores plus K mask channels"""
        self._require_items(item_valid)
        if scores.shape[-1] != self.num_models:
            raise ShapeMismatchError(f"Expected {self.num_models} score columns, got {scores.shape[-1]}")
        x = self.score_embedding(torch.cat([scores, score_mask.to(scores.dtype)], dim=-1))
        if self.ablation.no_self:
            return x
        return self.score_attention(x, item_valid)

    def embed_categories(self, categories: torch.Tensor, item_valid: torch.Tensor) -> torch.Tensor:
        """(B, N, d_e) from category embedding lookups"""
        self._require_items(item_valid)
        used = categories[item_valid]
        if used.numel() and (int(used.max()) >= self.num_categories or int(used.min()) < 0):
            raise OutOfVocabularyError(
                f"Category id outside [0, {self.num_categories}): {int(used.max())}"
            )
        x = self.category_embedding(categories.masked_fill(~item_valid, 0))
        if self.ablation.no_self:
            return x
        return self.category_attention(x, item_valid)

    def project_intent(self, intent: torch.Tensor) -> torch.Tensor:
        """Int_d = W^i Int, or zeros for the -Int variant"""
        if intent.shape[-1] != self.intent_dim:
            raise ShapeMismatchError(f"Intent has {intent.shape[-1]} cells, expected {self.intent_dim}")
        projected = self.intent_projection(intent)
        if self.ablation.no_intent:
            return torch.zeros_like(projected)
        return projected

    def cross_attend(
        self,
        intent_embedding: torch.Tensor,
        reps: torch.Tensor,
        item_valid: torch.Tensor,
        branch: IntentCrossAttention
    ) -> torch.Tensor:
        if self.ablation.no_cross:
            return reps
        return branch(self.query_projection(intent_embedding), reps, item_valid)

    def compute_weights(
        self,
        branch_outputs: List[torch.Tensor],
        intent_embedding: torch.Tensor,
        item_valid: torch.Tensor
    ) -> torch.Tensor:
        """(B, N, K) weights from W^w [A_s, A_i, Int_d]"""
        n = item_valid.shape[-1]
        broadcast_intent = intent_embedding.unsqueeze(1).expand(-1, n, -1)
        features = torch.cat(branch_outputs + [broadcast_intent], dim=-1)
        if self.list_level:
            valid = item_valid.unsqueeze(-1).to(features.dtype)
            pooled = (features * valid).sum(1) / valid.sum(1).clamp(min=1.0)
            logits = self.head(pooled).unsqueeze(1).expand(-1, n, -1)
        else:
            logits = self.head(features)
        if self.weight_head == WeightHeadType.SIMPLEX:
            return torch.softmax(logits, dim=-1)
        return logits

    def forward(
        self,
        scores: torch.Tensor,
        score_mask: torch.Tensor,
        categories: torch.Tensor,
        item_valid: torch.Tensor,
        intent: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """(weights (B, N, K), ensemble scores (B, N))"""
        intent_embedding = self.project_intent(intent)
        branch_outputs = []
        if not self.ablation.no_score:
            reps = self.embed_scores(scores, score_mask, item_valid)
            branch_outputs.append(self.cross_attend(intent_embedding, reps, item_valid, self.score_cross))
        if not self.ablation.no_category:
            reps = self.embed_categories(categories, item_valid)
            branch_outputs.append(self.cross_attend(intent_embedding, reps, item_valid, self.category_cross))

        weights = self.compute_weights(branch_outputs, intent_embedding, item_valid)
        ensemble = ensemble_scores(weights, scores)
        return weights, ensemble

    def forward_batch(self, batch: SessionBatch, intent: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        return self(batch.scores, batch.score_mask, batch.categories, batch.item_valid, intent)


def ensemble_scores(weights: torch.Tensor, scores: torch.Tensor) -> torch.Tensor:
    """S_n^ens = sum_k w_n^k S_n^k"""
    if weights.shape != scores.shape:
        raise ShapeMismatchError(f"Weight shape {tuple(weights.shape)} != score shape {tuple(scores.shape)}")
    return (weights * scores).sum(-1)
