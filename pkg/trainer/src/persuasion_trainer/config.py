"""Training configuration: a JSON/flags hybrid resolved per model family."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass


class ConfigError(ValueError):
    pass


MODEL_IDS = (
    "bert-base-uncased",
    "xlm-roberta-base",
    "bert-base-multilingual-uncased",
)

# reference batch sizes for the full-scale runs; toy runs override
DEFAULT_BATCH_SIZES = {
    "bert-base-uncased": 128,
    "xlm-roberta-base": 64,
    "bert-base-multilingual-uncased": 64,
}


@dataclass(frozen=True)
class TrainConfig:
    model_id: str
    epochs: int = 10
    learning_rate: float = 2e-5
    batch_size: int | None = None  # None -> family default
    max_sequence_length: int = 128
    seed: int = 0
    toy_fraction: float = 1.0

    def __post_init__(self):
        if self.model_id not in MODEL_IDS:
            raise ConfigError(f"model_id must be one of {MODEL_IDS}, got {self.model_id!r}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_sequence_length < 8:
            raise ConfigError("max_sequence_length must be >= 8")
        if not (0.0 < self.toy_fraction <= 1.0):
            raise ConfigError("toy_fraction must be in (0, 1]")

    @property
    def resolved_batch_size(self) -> int:
        return self.batch_size or DEFAULT_BATCH_SIZES[self.model_id]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_file(cls, path, **overrides) -> "TrainConfig":
        with open(path, "rb") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("config file must be a JSON object")
        obj.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(f"bad config field: {exc}") from exc
