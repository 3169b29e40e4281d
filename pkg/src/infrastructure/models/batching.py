"""
Session Batching
Pads variable-length sessions and histories into tensors for the networks
"""
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch

from ...domain.entities.session import HistoryWindow, SessionSample, context_dim
from ...domain.services.intent_baseline import historical_average_intent
from ...domain.services.ranking_losses import sample_bpr_pairs
from ...domain.value_objects.intent import flat_intent_index

PAD_LEVEL = -1


def _move(obj, device):
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, torch.Tensor):
            setattr(obj, f.name, value.to(device))
        elif hasattr(value, "__dataclass_fields__"):
            _move(value, device)
    return obj


@dataclass
class HistoryBatch:
    """Padded intent histories. Lengths of 0 mark cold-start sessions."""
    session_intents: torch.Tensor   # (B, T, D)
    session_contexts: torch.Tensor  # (B, T, C)
    session_lengths: torch.Tensor   # (B,)
    item_cells: torch.Tensor        # (B, M) flat intent cell per past positive interaction
    item_lengths: torch.Tensor      # (B,)
    average_intent: torch.Tensor    # (B, D) historical average, uniform when empty


@dataclass
class SessionBatch:
    """Padded candidate lists of B sessions"""
    session_ids: List[str]
    scores: torch.Tensor        # (B, N, K)
    score_mask: torch.Tensor    # (B, N, K)
    categories: torch.Tensor    # (B, N)
    item_valid: torch.Tensor    # (B, N)
    levels: torch.Tensor        # (B, N), PAD_LEVEL on padding
    pi_order: torch.Tensor      # (B, N), padding positions last
    true_intent: torch.Tensor   # (B, D)
    context: torch.Tensor       # (B, C)
    history: HistoryBatch

    @property
    def batch_size(self) -> int:
        return len(self.session_ids)

    def to(self, device) -> 'SessionBatch':
        return _move(self, device)


@dataclass
class PairBatch:
    """Padded BPR pairs, one row per session"""
    positive: torch.Tensor  # (B, P)
    negative: torch.Tensor  # (B, P)
    valid: torch.Tensor     # (B, P)

    @property
    def counts(self) -> torch.Tensor:
        return self.valid.sum(-1)

    def to(self, device) -> 'PairBatch':
        return _move(self, device)


def _collate_history(
    windows: Sequence[HistoryWindow],
    intent_dim: int,
    num_categories: int,
    extra_dim: int,
    dtype: torch.dtype
) -> HistoryBatch:
    batch = len(windows)
    max_sessions = max([1] + [w.num_sessions for w in windows])
    max_items = max([1] + [len(w.past_items) for w in windows])
    ctx_dim = context_dim(extra_dim)

    intents = np.zeros((batch, max_sessions, intent_dim))
    contexts = np.zeros((batch, max_sessions, ctx_dim))
    cells = np.zeros((batch, max_items), dtype=np.int64)
    averages = np.zeros((batch, intent_dim))
    for b, window in enumerate(windows):
        for t, (intent, context) in enumerate(zip(window.past_intents, window.past_contexts)):
            intents[b, t] = intent.probs
            contexts[b, t] = context.to_vector(extra_dim)
        for m, (behavior, category) in enumerate(window.past_items):
            cells[b, m] = flat_intent_index(behavior, category, num_categories)
        averages[b] = historical_average_intent(window, intent_dim).probs

    return HistoryBatch(
        session_intents=torch.as_tensor(intents, dtype=dtype),
        session_contexts=torch.as_tensor(contexts, dtype=dtype),
        session_lengths=torch.as_tensor([w.num_sessions for w in windows], dtype=torch.long),
        item_cells=torch.as_tensor(cells),
        item_lengths=torch.as_tensor([len(w.past_items) for w in windows], dtype=torch.long),
        average_intent=torch.as_tensor(averages, dtype=dtype),
    )


def collate_sessions(
    samples: Sequence[SessionSample],
    windows: Optional[Dict[str, HistoryWindow]],
    num_categories: int,
    intent_dim: int,
    context_extra_dim: int = 0,
    dtype: torch.dtype = torch.float32
) -> SessionBatch:
    """Stack sessions into a padded batch; sessions keep their given order"""
    batch = len(samples)
    max_items = max(len(s.record.candidates) for s in samples)
    num_models = samples[0].scores.num_models

    scores = np.zeros((batch, max_items, num_models))
    mask = np.zeros((batch, max_items, num_models), dtype=bool)
    categories = np.zeros((batch, max_items), dtype=np.int64)
    valid = np.zeros((batch, max_items), dtype=bool)
    levels = np.full((batch, max_items), PAD_LEVEL, dtype=np.int64)
    pi_order = np.tile(np.arange(max_items), (batch, 1))
    intents = np.zeros((batch, intent_dim))
    contexts = np.zeros((batch, context_dim(context_extra_dim)))

    for b, sample in enumerate(samples):
        n = sample.scores.num_items
        scores[b, :n] = sample.scores.values
        mask[b, :n] = sample.scores.mask
        categories[b, :n] = sample.category_ids
        valid[b, :n] = True
        levels[b, :n] = sample.ground_truth.levels
        pi_order[b, :n] = sample.ground_truth.pi_order
        intents[b] = sample.intent.probs
        contexts[b] = sample.record.context.to_vector(context_extra_dim)

    windows = windows or {}
    history = _collate_history(
        [windows.get(s.session_id, HistoryWindow()) for s in samples],
        intent_dim, num_categories, context_extra_dim, dtype,
    )
    return SessionBatch(
        session_ids=[s.session_id for s in samples],
        scores=torch.as_tensor(scores, dtype=dtype),
        score_mask=torch.as_tensor(mask),
        categories=torch.as_tensor(categories),
        item_valid=torch.as_tensor(valid),
        levels=torch.as_tensor(levels),
        pi_order=torch.as_tensor(pi_order),
        true_intent=torch.as_tensor(intents, dtype=dtype),
        context=torch.as_tensor(contexts, dtype=dtype),
        history=history,
    )


def collate_pairs(samples: Sequence[SessionSample], rng: np.random.Generator) -> PairBatch:
    """One freshly sampled BPR pair set per session"""
    pair_sets = [sample_bpr_pairs(s.ground_truth, rng) for s in samples]
    width = max([1] + [len(p) for p in pair_sets])
    positive = np.zeros((len(samples), width), dtype=np.int64)
    negative = np.zeros((len(samples), width), dtype=np.int64)
    valid = np.zeros((len(samples), width), dtype=bool)
    for b, pairs in enumerate(pair_sets):
        count = len(pairs)
        if count:
            positive[b, :count] = pairs.positive_indices
            negative[b, :count] = pairs.negative_indices
            valid[b, :count] = True
    return PairBatch(torch.as_tensor(positive), torch.as_tensor(negative), torch.as_tensor(valid))
