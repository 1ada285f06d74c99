"""Statistically validated lead-lag networks from lagged mutual information."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .exceptions import EmptyInputError, InfolagError, InsufficientDataError, NumericalError, ParseError
from .inference import (
    DirectedNetwork,
    LagSweepResult,
    PairScore,
    ScoreTable,
    bonferroni_threshold,
    fdr_select,
    is_subnetwork,
    lag_sweep,
    score_pairs,
    validate_links,
)
from .infotheory import contingency, lz_entropy_rate, mutual_information, plugin_entropy
from .marketdata import LaggedPair, PriceMatrix, ReturnMatrix, build_lagged_pair, ingest_csv, log_returns
from .nullmodels import gamma_null, gamma_quantile, lagged_pearson, mi_pvalue, shuffle_surrogates
from .symbolize import quantile_symbolize, symbolize_matrix

__all__ = [
    "BACKEND",
    "DirectedNetwork",
    "EmptyInputError",
    "InfolagError",
    "InsufficientDataError",
    "LagSweepResult",
    "LaggedPair",
    "NumericalError",
    "PairScore",
    "ParseError",
    "PriceMatrix",
    "ReturnMatrix",
    "ScoreTable",
    "bonferroni_threshold",
    "build_lagged_pair",
    "contingency",
    "fdr_select",
    "gamma_null",
    "gamma_quantile",
    "ingest_csv",
    "is_subnetwork",
    "lag_sweep",
    "lagged_pearson",
    "log_returns",
    "lz_entropy_rate",
    "mi_pvalue",
    "mutual_information",
    "plugin_entropy",
    "quantile_symbolize",
    "score_pairs",
    "shuffle_surrogates",
    "symbolize_matrix",
    "validate_links",
]
