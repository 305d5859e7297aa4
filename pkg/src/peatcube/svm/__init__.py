"""Kernel machines: SMO-trained SVC/SVR with grid-search cross-validation."""

from .classify import (
    BinarySvc,
    PairMachine,
    SvcModel,
    class_pairs,
    decision_values,
    predict_svc,
    smo_train_binary,
    train_svc,
)
from .gridsearch import (
    CLASSIFY,
    REGRESS,
    GridSpec,
    grid_search_cv,
)
from .io import load_svc, load_svr, save_svc, save_svr
from .kernels import LINEAR, RBF, KernelSpec, gram, gram_self
from .preprocessing import Standardizer, fit_standardizer
from .regress import SvrModel, predict_svr, smo_train_svr, train_svr
from .solver import BACKEND, solve_classifier, solve_regressor

__all__ = [
    "BACKEND",
    "BinarySvc",
    "CLASSIFY",
    "GridSpec",
    "KernelSpec",
    "LINEAR",
    "PairMachine",
    "RBF",
    "REGRESS",
    "Standardizer",
    "SvcModel",
    "SvrModel",
    "class_pairs",
    "decision_values",
    "fit_standardizer",
    "gram",
    "gram_self",
    "grid_search_cv",
    "load_svc",
    "load_svr",
    "predict_svc",
    "predict_svr",
    "save_svc",
    "save_svr",
    "smo_train_binary",
    "smo_train_svr",
    "solve_classifier",
    "solve_regressor",
    "train_svc",
    "train_svr",
]
