"""Z-scoring, KNN, SMO-trained RBF SVM and 80-20 grid search."""

from .knn import DEFAULT_K_GRID, KnnModel, knn_fit, knn_predict
from .scaling import Scaler, apply_scaler, fit_scaler
from .search import CLASSIFIERS, DEFAULT_GRIDS, GridResult, GridSearchError, fit_classifier, grid_search, predict
from .svm import (
    DEFAULT_C_GRID,
    SvmBinary,
    SvmConvergenceError,
    SvmError,
    SvmOvo,
    dual_objective,
    full_alpha,
    rbf_kernel,
    svm_ovo_predict,
    svm_ovo_train,
    train_svm_binary,
)

__all__ = [
    "CLASSIFIERS",
    "DEFAULT_C_GRID",
    "DEFAULT_GRIDS",
    "DEFAULT_K_GRID",
    "GridResult",
    "GridSearchError",
    "KnnModel",
    "Scaler",
    "SvmBinary",
    "SvmConvergenceError",
    "SvmError",
    "SvmOvo",
    "apply_scaler",
    "dual_objective",
    "fit_classifier",
    "fit_scaler",
    "full_alpha",
    "grid_search",
    "knn_fit",
    "knn_predict",
    "predict",
    "rbf_kernel",
    "svm_ovo_predict",
    "svm_ovo_train",
    "train_svm_binary",
]
