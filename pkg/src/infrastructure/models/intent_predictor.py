"""
Intent Predictor
Predicts the session intent distribution from environment context,
session-level intent history and item-level interaction history:
softmax(W^I [c, h_s, h_i] + b^I)
"""
import logging

import torch
import torch.nn as nn
import torch.nn.functional as F

from ...config.run_config import SequenceEncoderType
from ...domain.exceptions import ShapeMismatchError
from .batching import HistoryBatch

logger = logging.getLogger(__name__)


class SequenceEncoder(nn.Module):
    """
    Final hidden state of a padded sequence batch. GRU by default, a
    single-layer transformer encoder on request. Empty sequences encode
    to the zero vector.
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        kind: SequenceEncoderType = SequenceEncoderType.GRU,
        num_heads: int = 2
    ):
        super().__init__()
        self.kind = SequenceEncoderType(kind)
        self.hidden_dim = hidden_dim
        if self.kind == SequenceEncoderType.GRU:
            self.rnn = nn.GRU(input_dim, hidden_dim, batch_first=True)
        else:
            self.input_projection = nn.Linear(input_dim, hidden_dim)
            layer = nn.TransformerEncoderLayer(
                d_model=hidden_dim,
                nhead=num_heads,
                dim_feedforward=2 * hidden_dim,
                dropout=0.0,
                batch_first=True,
            )
            self.transformer = nn.TransformerEncoder(layer, num_layers=1, enable_nested_tensor=False)

    def forward(self, sequence: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        batch = sequence.shape[0]
        empty = lengths == 0
        safe_lengths = lengths.clamp(min=1)

        if self.kind == SequenceEncoderType.GRU:
            packed = nn.utils.rnn.pack_padded_sequence(
                sequence, safe_lengths.cpu(), batch_first=True, enforce_sorted=False
            )
            _, hidden = self.rnn(packed)
            final = hidden[-1]
        else:
            steps = torch.arange(sequence.shape[1], device=sequence.device)
            padding = steps.unsqueeze(0) >= safe_lengths.unsqueeze(1)
            encoded = self.transformer(self.input_projection(sequence), src_key_padding_mask=padding)
            final = encoded[torch.arange(batch, device=sequence.device), safe_lengths - 1]

        return torch.where(empty.unsqueeze(-1), torch.zeros_like(final), final)


class IntentPredictor(nn.Module):
    """Context encoder, shared intent encoder and two sequential history encoders"""

    def __init__(
        self,
        intent_dim: int,
        context_dim: int,
        embed_dim: int = 32,
        hidden_dim: int = 128,
        encoder: SequenceEncoderType = SequenceEncoderType.GRU,
        encoder_heads: int = 2
    ):
        super().__init__()
        self.intent_dim = intent_dim
        self.context_dim = context_dim
        self.context_encoder = nn.Linear(context_dim, embed_dim)
        # shared between the session level and the item level
        self.intent_encoder = nn.Linear(intent_dim, embed_dim)
        self.session_encoder = SequenceEncoder(2 * embed_dim, hidden_dim, encoder, encoder_heads)
        self.item_encoder = SequenceEncoder(embed_dim, hidden_dim, encoder, encoder_heads)
        self.output = nn.Linear(embed_dim + 2 * hidden_dim, intent_dim)

    def encode_context(self, context: torch.Tensor) -> torch.Tensor:
        if context.shape[-1] != self.context_dim:
            raise ShapeMismatchError(f"Context has {context.shape[-1]} features, expected {self.context_dim}")
        return self.context_encoder(context)

    def encode_session_history(
        self,
        intents: torch.Tensor,
        contexts: torch.Tensor,
        lengths: torch.Tensor
    ) -> torch.Tensor:
        """h_s over the embedded (intent, context) of past sessions"""
        steps = torch.cat([self.intent_encoder(intents), self.encode_context(contexts)], dim=-1)
        return self.session_encoder(steps, lengths)

    def encode_item_history(self, cells: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        """h_i over one-hot intent cells of past positive interactions"""
        one_hot = F.one_hot(cells, self.intent_dim).to(self.intent_encoder.weight.dtype)
        return self.item_encoder(self.intent_encoder(one_hot), lengths)

    def logits(self, context: torch.Tensor, history: HistoryBatch) -> torch.Tensor:
        c = self.encode_context(context)
        h_s = self.encode_session_history(
            history.session_intents, history.session_contexts, history.session_lengths
        )
        h_i = self.encode_item_history(history.item_cells, history.item_lengths)
        return self.output(torch.cat([c, h_s, h_i], dim=-1))

    def forward(self, context: torch.Tensor, history: HistoryBatch) -> torch.Tensor:
        """(B, D) intent distributions"""
        return torch.softmax(self.logits(context, history), dim=-1)
