"""Run configuration: JSON file + CLI overrides, snapshotted beside outputs."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ValidationError

# Stable ids so adding a stage never shifts another stage's seed.
STAGE_IDS = {"split": 1, "cv": 2, "grid": 3, "train": 4}


@dataclass
class RunConfig:
    # inputs
    messages: str | None = None
    ohlc: str | None = None
    ohlc_date_format: str = "iso"
    labelled: str | None = None
    model_path: str | None = None
    predictions: str | None = None
    runs: list[str] = field(default_factory=list)
    # fetch
    symbol: str | None = None
    endpoint: str | None = None
    allow_network: bool = False
    fetch_start: str | None = None
    fetch_end: str | None = None
    # labelling
    scheme: str = "binary"
    threshold: float = 0.5
    alignment: str = "same-day"
    prev_reference: str = "close"
    tz_offset: float = 0.0
    # preprocessing
    disabled_stages: list[str] = field(default_factory=list)
    squeeze_limit: int = 2
    # features and model
    vectorizer: str = "tfidf"
    min_df: int = 1
    max_features: int | None = None
    model: str = "nb"
    model_params: dict[str, Any] = field(default_factory=dict)
    # evaluation
    split_train: int = 90
    split_test: int = 10
    stratify: bool = False
    cv_folds: int = 5
    grid: dict[str, Any] = field(
        default_factory=lambda: {"vectorizers": ["count", "tfidf"], "models": ["nb", "lr"], "params": {}}
    )
    grid_cv: bool = False
    tau: float = 0.75
    window_days: int = 14
    window_label: str = "1y"
    # run
    output_dir: str = "runs/default"
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def override(self, **values: Any) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in values.items() if v is not None})

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1, sort_keys=True) + "\n"

    def sub_seed(self, stage: str) -> int:
        """Per-stage seed derived from the global seed."""
        return derive_seed(self.seed, stage)


def derive_seed(seed: int, stage: str) -> int:
    return int(np.random.SeedSequence([seed, STAGE_IDS[stage]]).generate_state(1)[0])
