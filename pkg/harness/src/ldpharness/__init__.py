"""Training harness for locally differentially private image benchmarks."""

from .data import DatasetError, SplitArrays, load_dataset, read_image
from .model import DeskClassifier, build_model
from .train import HarnessConfig, TrainingDiverged, train_and_evaluate

__version__ = "0.1.0"

__all__ = [
    "DatasetError",
    "DeskClassifier",
    "HarnessConfig",
    "SplitArrays",
    "TrainingDiverged",
    "build_model",
    "load_dataset",
    "read_image",
    "train_and_evaluate",
]
