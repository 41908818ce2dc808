"""Learning and auditing scoring functions under AUC- and ROC-based fairness constraints."""

from .constraints import GammaConstraint, MixtureConstraint, is_relevant, make_named, mixture_form
from .core_data import CellCounts, Dataset, cell_counts, split
from .errors import (
    ConfigurationError,
    DegenerateRateError,
    DomainError,
    FairRankError,
    NonFiniteError,
    SchemaError,
    ShapeError,
    UndefinedStatisticError,
)
from .metrics import EmpiricalCdf, RocCurve, auc, c_vector, delta, roc_point
from .model import MlpScorer, load_checkpoint, save_checkpoint
from .trainer import AucTrainConfig, RocTrainConfig, evaluate, train_auc, train_roc

__version__ = "0.1.0"

__all__ = [
    "AucTrainConfig", "CellCounts", "ConfigurationError", "Dataset", "DegenerateRateError",
    "DomainError", "EmpiricalCdf", "FairRankError", "GammaConstraint", "MixtureConstraint",
    "MlpScorer", "NonFiniteError", "RocCurve", "RocTrainConfig", "SchemaError", "ShapeError",
    "UndefinedStatisticError", "auc", "c_vector", "cell_counts", "delta", "evaluate",
    "is_relevant", "load_checkpoint", "make_named", "mixture_form", "roc_point",
    "save_checkpoint", "split", "train_auc", "train_roc",
]
