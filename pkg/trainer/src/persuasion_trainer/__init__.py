"""Fine-tuning and prediction export for persuasion-technique models."""

from .config import ConfigError, TrainConfig
from .data import FormatError, Record, load_leaf_order, load_records, save_logit_matrix
from .trainer import TrainingError, predict, train

__version__ = "0.1.0"
