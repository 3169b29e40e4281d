"""
Application Layer Request DTOs
Per-command arguments that are not part of the run configuration
"""
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator


class EvaluateRequest(BaseModel):
    """Request to evaluate a trained ensemble and/or unsupervised baselines"""
    checkpoint: Optional[Path] = Field(None, description="Checkpoint to evaluate; default is every seed of the run")
    baselines: List[str] = Field(default_factory=list, description="Baselines such as single:0, borda, rra")
    skip_model: bool = Field(default=False, description="Evaluate only the baselines")
    split: str = Field(default="test", description="Split to evaluate on")

    @field_validator("split")
    @classmethod
    def validate_split(cls, v):
        if v not in ("validation", "test"):
            raise ValueError("split must be 'validation' or 'test'")
        return v


class VerifyTheoremsRequest(BaseModel):
    """Request to check the loss decompositions on random instances"""
    trials: int = Field(default=1000, ge=1, description="Random instances per decomposition")
    seed: int = Field(default=0, description="Master seed")
    output_dir: Path = Field(default=Path("outputs/theorems"), description="Report directory")
    delta_cap: float = Field(default=0.3, ge=0.0, le=1.0, description="Upper bound on the weight spread")
    model_counts: List[int] = Field(default_factory=lambda: [2, 3, 5], min_length=1)
    max_items: int = Field(default=50, ge=2, description="Largest list for the point- and pair-wise checks")
    max_items_listwise: int = Field(default=20, ge=2, description="Largest list for the list-wise check")
    sweep_steps: int = Field(default=11, ge=2, description="Steps of the spread annealing sweep")

    @field_validator("model_counts")
    @classmethod
    def validate_model_counts(cls, v):
        if any(k < 1 for k in v):
            raise ValueError("model counts must be >= 1")
        return v


class AggregateRequest(BaseModel):
    """Request to aggregate per-seed metrics into one report"""
    inputs: List[Path] = Field(..., min_length=1, description="metrics.json files or run directories")
    output: Path = Field(..., description="Aggregated metrics.json path")
    name: Optional[str] = Field(None, description="Name of the aggregated run")
    comparison: Optional[Path] = Field(None, description="Optional CSV comparing the inputs metric by metric")


class PredictIntentsRequest(BaseModel):
    """Request to write predicted intents of the evaluated sessions"""
    checkpoint: Optional[Path] = Field(None, description="Checkpoint; default is the first seed of the run")
    split: str = Field(default="test")

    @field_validator("split")
    @classmethod
    def validate_split(cls, v):
        if v not in ("train", "validation", "test"):
            raise ValueError("split must be 'train', 'validation' or 'test'")
        return v


class AggregateRankingsRequest(BaseModel):
    """Request to rank sessions with one unsupervised aggregation method"""
    method: str = Field(..., description="single:k, borda or rra")
    output: Path = Field(..., description="rankings.jsonl path")
    split: Optional[str] = Field(None, description="Restrict to one split; default is every session")

    @field_validator("split")
    @classmethod
    def validate_split(cls, v):
        if v is not None and v not in ("train", "validation", "test"):
            raise ValueError("split must be 'train', 'validation' or 'test'")
        return v
