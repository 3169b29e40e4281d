"""
Historical Average Intent
Predicts the current intent as the mean of realized past-session intents
"""
import numpy as np

from ..entities.session import HistoryWindow
from ..value_objects.intent import IntentDistribution


def historical_average_intent(window: HistoryWindow, dim: int) -> IntentDistribution:
    """Mean of the window's past intents; uniform when the window is empty"""
    if window.is_empty:
        return IntentDistribution.uniform(dim)
    stacked = np.stack([intent.probs for intent in window.past_intents])
    return IntentDistribution.from_counts(stacked.mean(axis=0))
