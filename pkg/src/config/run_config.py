"""
Run Configuration
YAML experiment configuration parsed into Pydantic models
"""
import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..domain.exceptions import ConfigValidationError
from ..domain.value_objects.behavior import BehaviorScheme

logger = logging.getLogger(__name__)

# Ambiguity weight per loss family when the config leaves alpha unset
DEFAULT_ALPHA = {"mse": 1e-5, "bpr": 1e-5, "pl": 1e-4}
DEFAULT_GAMMA = 0.1


class LossFamily(str, Enum):
    MSE = "mse"
    BPR = "bpr"
    PL = "pl"


class TrainingMethod(str, Enum):
    INTEL = "intel"    # item-level weights conditioned on intents
    AWELV = "awelv"    # list-level weights, list-wise loss, no intents


class IntentMode(str, Enum):
    LEARNED = "learned"
    HIS_AVG = "his_avg"
    NONE = "none"


class WeightHeadType(str, Enum):
    SIMPLEX = "simplex"
    UNCONSTRAINED = "unconstrained"


class SequenceEncoderType(str, Enum):
    GRU = "gru"
    TRANSFORMER = "transformer"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", use_enum_values=False)


class DataSection(_Section):
    """Input and intermediate files plus session construction rules"""
    interactions_path: Optional[str] = None
    basic_lists_path: Optional[str] = None
    sessions_path: str = "data/sessions.jsonl"
    timezone: str = "UTC"
    session_rule: str = "calendar_day"
    min_positive: int = Field(default=3, ge=1)
    min_category_items: int = Field(default=1, ge=1)
    top_m: int = Field(default=30, ge=1)
    test_days: int = Field(default=7, ge=1)
    validation_days: int = Field(default=3, ge=1)

    @field_validator("session_rule")
    @classmethod
    def _known_rule(cls, value: str) -> str:
        if value not in ("calendar_day", "visit_id"):
            raise ValueError("session_rule must be 'calendar_day' or 'visit_id'")
        return value


class DatasetSection(_Section):
    """Dataset dimensions"""
    behaviors: List[str] = Field(default_factory=lambda: ["examine", "click", "buy"])
    num_categories: Optional[int] = Field(default=None, ge=1)
    model_ids: Optional[List[str]] = None
    context_extra_dim: int = Field(default=0, ge=0)
    history_sessions: int = Field(default=20, ge=1)
    history_items: int = Field(default=100, ge=1)

    @field_validator("behaviors")
    @classmethod
    def _valid_scheme(cls, value: List[str]) -> List[str]:
        BehaviorScheme(value)
        return [v.strip().lower() for v in value]

    @property
    def scheme(self) -> BehaviorScheme:
        return BehaviorScheme(self.behaviors)


class SyntheticSection(_Section):
    """Synthetic dataset generator parameters"""
    num_users: int = Field(default=2000, ge=1)
    num_items: int = Field(default=5000, ge=2)
    num_categories: int = Field(default=8, ge=1)
    num_models: int = Field(default=2, ge=2)
    sessions_per_user: int = Field(default=8, ge=1)
    num_days: int = Field(default=30, ge=11)
    pool_size: int = Field(default=40, ge=2)
    list_length: int = Field(default=30, ge=1)
    intent_drift: float = Field(default=0.3, ge=0.0, le=1.0)
    intent_concentration: float = Field(default=0.5, gt=0.0)
    noise: Union[float, List[float]] = 0.15
    evening_buy_boost: float = Field(default=1.5, gt=0.0)
    start_date: str = "2023-09-01"
    seed: int = 0

    @field_validator("noise")
    @classmethod
    def _non_negative_noise(cls, value):
        values = value if isinstance(value, list) else [value]
        if any(v < 0 for v in values):
            raise ValueError("noise must be non-negative")
        return value

    def noise_for(self, k: int) -> float:
        if isinstance(self.noise, list):
            if len(self.noise) != self.num_models:
                raise ValueError("noise list length must equal num_models")
            return float(self.noise[k])
        return float(self.noise)

    @model_validator(mode="after")
    def _consistent(self) -> 'SyntheticSection':
        if isinstance(self.noise, list) and len(self.noise) != self.num_models:
            raise ValueError("noise list length must equal num_models")
        if self.pool_size > self.num_items:
            raise ValueError("pool_size cannot exceed num_items")
        if self.sessions_per_user > self.num_days:
            raise ValueError("sessions_per_user cannot exceed num_days (one session per day)")
        return self


class AblationSection(_Section):
    """Structural ablations of the ensemble network"""
    no_intent: bool = False
    no_category: bool = False
    no_score: bool = False
    no_cross: bool = False
    no_self: bool = False

    @model_validator(mode="after")
    def _one_branch(self) -> 'AblationSection':
        if self.no_category and self.no_score:
            raise ValueError("no_category and no_score cannot both be set")
        return self


class ModelSection(_Section):
    """Network dimensions and variants"""
    embed_dim: int = Field(default=64, ge=1)
    intent_embed_dim: int = Field(default=32, ge=1)
    hidden_dim: int = Field(default=128, ge=1)
    context_embed_dim: int = Field(default=32, ge=1)
    num_layers: int = Field(default=2, ge=1)
    num_heads: int = Field(default=2, ge=1)
    sequence_encoder: SequenceEncoderType = SequenceEncoderType.GRU
    encoder_heads: int = Field(default=2, ge=1)
    intent_mode: IntentMode = IntentMode.LEARNED
    weight_head: WeightHeadType = WeightHeadType.SIMPLEX
    ablation: AblationSection = Field(default_factory=AblationSection)

    @model_validator(mode="after")
    def _divisible_heads(self) -> 'ModelSection':
        if self.embed_dim % self.num_heads:
            raise ValueError("embed_dim must be divisible by num_heads")
        if self.sequence_encoder == SequenceEncoderType.TRANSFORMER and self.hidden_dim % self.encoder_heads:
            raise ValueError("hidden_dim must be divisible by encoder_heads")
        return self


class TrainingSection(_Section):
    """Optimization settings"""
    method: TrainingMethod = TrainingMethod.INTEL
    loss: LossFamily = LossFamily.PL
    alpha: Optional[float] = Field(default=None, ge=0.0)
    gamma: float = Field(default=DEFAULT_GAMMA, ge=0.0)
    learning_rate: float = Field(default=1e-3, ge=0.0)
    weight_decay: float = Field(default=0.0, ge=0.0)
    batch_size: int = Field(default=512, ge=1)
    max_epochs: int = Field(default=100, ge=1)
    patience: int = Field(default=10, ge=1)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    printed_form: bool = False


class EvaluationSection(_Section):
    """Metric settings"""
    ks: List[int] = Field(default_factory=lambda: [3, 5, 10], min_length=1)
    objectives: Optional[List[str]] = None
    relevance_mode: str = "threshold"
    intent_f1_threshold: Optional[float] = Field(default=None, gt=0.0)
    baselines: List[str] = Field(default_factory=lambda: ["borda", "rra"])

    @field_validator("relevance_mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("threshold", "exact"):
            raise ValueError("relevance_mode must be 'threshold' or 'exact'")
        return value

    @field_validator("ks")
    @classmethod
    def _positive_ks(cls, value: List[int]) -> List[int]:
        if any(k < 1 for k in value):
            raise ValueError("every cutoff must be >= 1")
        return value


class OutputSection(_Section):
    dir: str = "outputs"
    run_name: Optional[str] = None


class RunConfig(_Section):
    """Complete experiment configuration"""
    data: DataSection = Field(default_factory=DataSection)
    dataset: DatasetSection = Field(default_factory=DatasetSection)
    synthetic: SyntheticSection = Field(default_factory=SyntheticSection)
    model: ModelSection = Field(default_factory=ModelSection)
    training: TrainingSection = Field(default_factory=TrainingSection)
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _defaults_and_method(self) -> 'RunConfig':
        if self.training.alpha is None:
            self.training.alpha = DEFAULT_ALPHA[self.training.loss.value]
        if self.training.method == TrainingMethod.AWELV:
            self.training.loss = LossFamily.PL
            self.model.intent_mode = IntentMode.NONE
        return self

    @property
    def alpha(self) -> float:
        return float(self.training.alpha)

    @property
    def run_name(self) -> str:
        """Name of the variant, used as output directory and report name"""
        if self.output.run_name:
            return self.output.run_name
        if self.training.method == TrainingMethod.AWELV:
            return "aWELv"
        name = f"IntEL-{self.training.loss.value.upper()}"
        if self.model.intent_mode != IntentMode.LEARNED:
            name += f"-{self.model.intent_mode.value}"
        ablation = self.model.ablation
        for flag, suffix in (
            (ablation.no_intent, "-Int"), (ablation.no_category, "-I"), (ablation.no_score, "-S"),
            (ablation.no_cross, "-Cross"), (ablation.no_self, "-Self"),
        ):
            if flag:
                name += suffix
        return name

    @property
    def output_dir(self) -> Path:
        return Path(self.output.dir) / self.run_name

    def fingerprint(self) -> str:
        """SHA-256 of the fields that shape the trained model"""
        shaping = {
            "dataset": self.dataset.model_dump(mode="json"),
            "model": self.model.model_dump(mode="json"),
            "method": self.training.method.value,
            "loss": self.training.loss.value,
        }
        canonical = json.dumps(shaping, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _set_path(target: Dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = target
    for key in keys[:-1]:
        child = node.get(key)
        if child is None:
            child = node[key] = {}
        if not isinstance(child, dict):
            raise ConfigValidationError([dotted], f"'{key}' is not a section")
        node = child
    node[keys[-1]] = value


def apply_overrides(raw: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply 'section.key=value' overrides; values are parsed as YAML scalars"""
    for override in overrides or ():
        if "=" not in override:
            raise ConfigValidationError([override], "overrides must look like section.key=value")
        dotted, text = override.split("=", 1)
        _set_path(raw, dotted.strip(), yaml.safe_load(text))
    return raw


def build_run_config(raw: Optional[Dict[str, Any]] = None, overrides: Sequence[str] = ()) -> RunConfig:
    raw = apply_overrides(dict(raw or {}), overrides)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        fields = [".".join(str(part) for part in error["loc"]) or "<root>" for error in e.errors()]
        raise ConfigValidationError(fields, str(e)) from e


def load_run_config(path: Union[str, Path], overrides: Sequence[str] = ()) -> RunConfig:
    """Read a YAML run configuration and apply flag overrides"""
    path = Path(path)
    if not path.exists():
        raise ConfigValidationError(["--config"], f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    if not isinstance(raw, dict):
        raise ConfigValidationError(["<root>"], "Config file must contain a mapping")
    config = build_run_config(raw, overrides)
    logger.info(f"Loaded run config {path} ({config.run_name}, fingerprint {config.fingerprint()[:12]})")
    return config
