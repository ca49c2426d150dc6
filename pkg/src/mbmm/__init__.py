"""Soft clustering with mixtures of multivariate beta distributions."""

from ._accel import backend
from .distribution import MBParams, log_normalizer, log_pdf, pdf, sample
from .metrics import adjusted_mutual_information, adjusted_rand_index, contingency
from .mixture import (
    FitConfig,
    FitError,
    FitReport,
    MixtureModel,
    complete_data_log_likelihood,
    e_step,
    expected_log_likelihood,
    fit,
    kl_distance,
    kl_distances,
    mixture_log_pdf,
    observed_log_likelihood,
    predict,
    predict_proba,
    sample_mixture,
    update_weights,
)
from .specfun import digamma, log_gamma

__all__ = [
    "FitConfig", "FitError", "FitReport", "MBParams", "MixtureModel",
    "adjusted_mutual_information", "adjusted_rand_index", "backend",
    "complete_data_log_likelihood", "contingency", "digamma", "e_step",
    "expected_log_likelihood", "fit", "kl_distance", "kl_distances", "log_gamma",
    "log_normalizer", "log_pdf", "mixture_log_pdf", "observed_log_likelihood",
    "pdf", "predict", "predict_proba", "sample", "sample_mixture", "update_weights",
]
