"""Partition-of-unity neural network classifiers with interpretable gates."""

from .data import Dataset, StandardizationStats, load_builtin, load_csv, load_mnist, make_synthetic, standardize, stratified_split
from .gates import GateSpec, activation_eval, gate_eval, gate_grad, gate_param_count
from .partition import LossConfig, PartitionModel, class_probs, nll_loss, partition_forward, predict, stick_breaking_check
from .training import PunnClassifier, RunMetrics, TrainConfig, evaluate, grid_eval, multi_seed, train
from .baseline import SoftmaxMlp, softmax

__all__ = [
    "Dataset", "StandardizationStats", "load_builtin", "load_csv", "load_mnist",
    "make_synthetic", "standardize", "stratified_split",
    "GateSpec", "activation_eval", "gate_eval", "gate_grad", "gate_param_count",
    "LossConfig", "PartitionModel", "class_probs", "nll_loss",
    "partition_forward", "predict", "stick_breaking_check",
    "PunnClassifier", "RunMetrics", "TrainConfig", "evaluate", "grid_eval",
    "multi_seed", "train",
    "SoftmaxMlp", "softmax",
]

__version__ = "0.1.0"
