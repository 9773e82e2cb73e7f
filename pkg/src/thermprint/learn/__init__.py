"""Material classifiers over dissipation vectors."""
from .base import DegenerateModelError
from .evaluation import EvalReport, cross_validate, evaluate, hamming_loss, kfold_split, predict
from .features import (
    CONTEXTS,
    GENDERS,
    EncodingError,
    LabeledSample,
    encode_dataset,
    encode_features,
    load_manifest,
    parse_manifest,
)
from .forest import ForestModel, Tree, train_forest
from .mlp import MlpModel, train_mlp
from .persist import dumps, load_model, loads, save_model
from .svm import SvmModel, train_svm

TRAINERS = {"forest": train_forest, "svm": train_svm, "mlp": train_mlp}

__all__ = [
    "CONTEXTS", "GENDERS", "DegenerateModelError", "EncodingError", "EvalReport",
    "ForestModel", "LabeledSample", "MlpModel", "SvmModel", "TRAINERS", "Tree",
    "cross_validate", "dumps", "encode_dataset", "encode_features", "evaluate",
    "hamming_loss", "kfold_split", "load_manifest", "load_model", "loads",
    "parse_manifest", "predict", "save_model", "train_forest", "train_mlp", "train_svm",
]
