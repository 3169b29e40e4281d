"""
Synthetic Dataset Generator
Desk-scale multi-behavior sessions with drifting user intents and
behavior-specialized basic scorers.

Each user carries a latent intent over (behavior x category) cells that
drifts from session to session; evening sessions lean toward the strongest
behavior. Basic scorer k targets one behavior: it scores every pool item by
the true session propensity of that behavior plus its own Gaussian noise,
so a noiseless scorer ranks exactly by that propensity.
"""
import logging
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from ...config.run_config import SyntheticSection
from ...domain.exceptions import ConfigValidationError
from ...domain.services.session_builder import EVENT_COLUMNS
from ...domain.value_objects.basic_lists import BasicListSet, ScoredItem
from ...domain.value_objects.behavior import BehaviorScheme
from ...utils.timezone_utils import local_midnight_epoch

logger = logging.getLogger(__name__)

EVENING_HOURS = range(18, 24)
SECONDS_PER_HOUR = 3600


@dataclass
class SyntheticDataset:
    """Raw generator output before the ingestion pipeline"""
    events: pd.DataFrame
    lists: BasicListSet
    model_ids: Tuple[str, ...]
    scorer_behaviors: Tuple[int, ...]
    item_categories: Dict[str, int]
    # (session_id, item_id) -> behavior index with the highest session propensity
    driving_behavior: Dict[Tuple[str, str], int] = field(default_factory=dict)
    # (session_id, item_id) -> true per-behavior propensity in that session
    propensity: Dict[Tuple[str, str], Tuple[float, ...]] = field(default_factory=dict)


class SyntheticGenerator:
    """Seed-deterministic generator of interactions and basic lists"""

    def __init__(self, config: SyntheticSection, scheme: BehaviorScheme, timezone: str = "UTC"):
        self.config = config
        self.scheme = scheme
        self.timezone = timezone
        try:
            self.start = date.fromisoformat(config.start_date)
        except ValueError:
            raise ConfigValidationError(["synthetic.start_date"], f"not an ISO date: {config.start_date}")

    @property
    def num_behaviors(self) -> int:
        return self.scheme.num_behaviors

    def model_ids(self) -> Tuple[Tuple[str, ...], Tuple[int, ...]]:
        behaviors = tuple(k % self.num_behaviors for k in range(self.config.num_models))
        names = []
        for k, b in enumerate(behaviors):
            name = f"{self.scheme.positive_behaviors[b].name}_model"
            if self.config.num_models > self.num_behaviors:
                name = f"{name}_{k}"
            names.append(name)
        return tuple(names), behaviors

    def _propensity(self, base: np.ndarray, intent: np.ndarray, categories: np.ndarray) -> np.ndarray:
        """(items, behaviors) probability of each behavior under an intent"""
        cells = self.num_behaviors * self.config.num_categories
        affinity = intent.reshape(self.num_behaviors, self.config.num_categories)[:, categories].T
        return 1.0 - np.exp(-base * affinity * cells)

    def generate(self) -> SyntheticDataset:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        n_behaviors = self.num_behaviors
        n_cells = n_behaviors * cfg.num_categories
        model_ids, scorer_behaviors = self.model_ids()

        item_ids = [f"i{n:05d}" for n in range(cfg.num_items)]
        item_categories = np.arange(cfg.num_items) % cfg.num_categories
        rng.shuffle(item_categories)
        # stronger behaviors are rarer
        base = rng.beta(2.0, 5.0, size=(cfg.num_items, n_behaviors)) / (1.0 + np.arange(n_behaviors))

        rows: List[Dict] = []
        lists = BasicListSet(model_ids=model_ids)
        driving: Dict[Tuple[str, str], int] = {}
        propensity: Dict[Tuple[str, str], Tuple[float, ...]] = {}

        for u in range(cfg.num_users):
            user_id = f"u{u:05d}"
            intent = rng.dirichlet(np.full(n_cells, cfg.intent_concentration))
            days = np.sort(rng.choice(cfg.num_days, size=cfg.sessions_per_user, replace=False))

            for day_offset in days:
                intent = (1.0 - cfg.intent_drift) * intent + cfg.intent_drift * rng.dirichlet(
                    np.full(n_cells, cfg.intent_concentration)
                )
                hour = int(rng.integers(0, 24))
                session_intent = intent.reshape(n_behaviors, cfg.num_categories).copy()
                if hour in EVENING_HOURS:
                    session_intent[-1] *= cfg.evening_buy_boost
                session_intent = (session_intent / session_intent.sum()).ravel()

                day = self.start + timedelta(days=int(day_offset))
                session_id = f"{user_id}:{day.isoformat()}"
                start = local_midnight_epoch(day, self.timezone) + hour * SECONDS_PER_HOUR

                # pool biased toward the categories of the session intent
                category_mass = session_intent.reshape(n_behaviors, cfg.num_categories).sum(axis=0)
                item_weights = category_mass[item_categories] + 1.0 / cfg.num_items
                pool = rng.choice(
                    cfg.num_items, size=cfg.pool_size, replace=False, p=item_weights / item_weights.sum()
                )
                pool_categories = item_categories[pool]

                session_prop = self._propensity(base[pool], session_intent, pool_categories)

                for position, n in enumerate(pool):
                    level = 0
                    for b in reversed(range(n_behaviors)):
                        if rng.random() < session_prop[position, b]:
                            level = b + 1
                            break
                    item_id = item_ids[n]
                    driving[(session_id, item_id)] = int(np.argmax(session_prop[position]))
                    propensity[(session_id, item_id)] = tuple(float(p) for p in session_prop[position])
                    # examine first, then the strongest positive behavior
                    levels = [0] if level == 0 else [0, level]
                    for step, event_level in enumerate(levels):
                        rows.append({
                            "user_id": user_id,
                            "item_id": item_id,
                            "category_id": int(item_categories[n]),
                            "behavior": self.scheme.from_level(event_level).name,
                            "level": event_level,
                            "timestamp": float(start + position * 10.0 + step),
                        })

                for k, model_id in enumerate(model_ids):
                    noise = cfg.noise_for(k)
                    scores = session_prop[:, scorer_behaviors[k]] + noise * rng.standard_normal(cfg.pool_size)
                    order = sorted(range(cfg.pool_size), key=lambda p: (-scores[p], item_ids[pool[p]]))
                    lists.add(session_id, model_id, [
                        ScoredItem(item_ids[pool[p]], float(scores[p])) for p in order[:cfg.list_length]
                    ])

        events = pd.DataFrame(rows, columns=EVENT_COLUMNS)
        logger.info(
            f"Generated {cfg.num_users} users, {len(lists.session_ids)} sessions, "
            f"{int((events['level'] >= 1).sum())} positive interactions"
        )
        return SyntheticDataset(
            events=events,
            lists=lists,
            model_ids=model_ids,
            scorer_behaviors=scorer_behaviors,
            item_categories={item_ids[n]: int(item_categories[n]) for n in range(cfg.num_items)},
            driving_behavior=driving,
            propensity=propensity,
        )
