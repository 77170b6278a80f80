"""Supervised dictionary learning with label-embedded sparse codes, trained by
ADMM (codes) and block coordinate descent (bases), plus the sparse
representation classifier (SRC) baseline."""

from .classifiers import Prediction, predict_ledl, src_classify
from .data import (ConfigError, DataError, HyperParams, ModelBundle, TrainState,
                   build_discriminative_codes, build_label_matrix, l2_normalize_columns,
                   make_blobs, split_dataset)
from .dictionary import sweep
from .experiment import ExperimentConfig, ExperimentResult, export_metrics, run_experiment
from .io import load_dataset, load_model, save_model
from .sparse_coding import encode_l1, soft_threshold, solve_spd, update_auxiliary, update_codes
from .trainer import FitReport, fit

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataError", "ExperimentConfig", "ExperimentResult", "FitReport",
    "HyperParams", "ModelBundle", "Prediction", "TrainState", "build_discriminative_codes",
    "build_label_matrix", "encode_l1", "export_metrics", "fit", "l2_normalize_columns",
    "load_dataset", "load_model", "make_blobs", "predict_ledl", "run_experiment", "save_model",
    "soft_threshold", "solve_spd", "split_dataset", "src_classify", "sweep", "update_auxiliary",
    "update_codes",
]
