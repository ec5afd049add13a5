"""Numerical toolkit for rank-one flows, their spectral Riesz products and
exponential-staircase experiments."""

__version__ = "0.1.0"

from .clt import clt_experiment, clt_statistic, ks_normal, theta_eval, theta_expand
from .criteria import bourgain_beta, deviation_Dm, singularity_scan, weak_limit_check
from .flowspec import RankOneSpec, SpecError, StageError, ValidityReport, check_finiteness
from .kernel import FejerKernel
from .phase import PhaseTable
from .riesz import PartialProduct, ft_exact, pk_eval
from .staircase import StaircaseParams, Variant, omega, preset
from .tower import autocorrelation, compare_ft, occurrence_heights
from .words import certify_distinct, enumerate_words, min_gap

__all__ = [
    "FejerKernel", "PartialProduct", "PhaseTable", "RankOneSpec", "SpecError", "StageError",
    "StaircaseParams", "ValidityReport", "Variant", "autocorrelation", "bourgain_beta",
    "certify_distinct", "check_finiteness", "clt_experiment", "clt_statistic", "compare_ft",
    "deviation_Dm", "enumerate_words", "ft_exact", "ks_normal", "min_gap", "occurrence_heights",
    "omega", "pk_eval", "preset", "singularity_scan", "theta_eval", "theta_expand",
    "weak_limit_check",
]
