"""
History Builder Service
Builds the intent-history window of every session from the same user's earlier sessions
"""
from collections import defaultdict
from typing import Dict, List, Sequence

from ..entities.session import HistoryWindow, SessionSample
from ..value_objects.behavior import BehaviorScheme


def build_history_windows(
    samples: Sequence[SessionSample],
    scheme: BehaviorScheme,
    max_sessions: int = 20,
    max_items: int = 100
) -> Dict[str, HistoryWindow]:
    """
    Map session_id -> HistoryWindow of at most max_sessions sessions that
    strictly precede it in time. Past realized intents are used because
    those sessions have concluded when the target session starts.
    """
    by_user: Dict[str, List[SessionSample]] = defaultdict(list)
    for sample in samples:
        by_user[sample.record.user_id].append(sample)

    windows: Dict[str, HistoryWindow] = {}
    for user_samples in by_user.values():
        user_samples.sort(key=lambda s: (s.record.timestamp, s.session_id))
        for position, target in enumerate(user_samples):
            past = [
                s for s in user_samples[max(0, position - max_sessions):position]
                if s.record.timestamp < target.record.timestamp
            ]
            items = []
            for sample in past:
                categories = sample.record.category_of()
                for interaction in sorted(sample.record.positive_interactions, key=lambda i: i.timestamp):
                    items.append((scheme.behavior_index(interaction.level), categories[interaction.item_id]))
            windows[target.session_id] = HistoryWindow(
                past_intents=tuple(s.intent for s in past),
                past_contexts=tuple(s.record.context for s in past),
                past_items=tuple(items),
                max_sessions=max_sessions,
                max_items=max_items,
            )
    return windows
