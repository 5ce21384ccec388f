"""Nearest-neighbor xi correlation on coordinate-wise ranks: estimators,
null variance constants, an asymptotic independence test and simulation
tools."""

from .asymptotics import (
    SigmaConstants,
    o_const,
    q_const,
    reg_incomplete_beta,
    sigma_sq,
    union_volume,
)
from .data import Dataset, DegenerateReport, from_arrays, load_csv, validate, write_csv
from .errors import (
    ConstantResponse,
    DataError,
    MissingColumn,
    NonFinite,
    NonNumericCell,
    NonPsdCovariance,
    PrecisionNotReached,
    XicoError,
)
from .estimator import XiEstimate, xi_ac, xi_batch, xi_rank
from .estimators import RankTransformer, XiCorrelation, XiIndependenceTest
from .inference import TestResult, independence_test, normal_cdf
from .nng import GraphFunctionals, NngGraph, build_nng, graph_functionals
from .ranks import EmpiricalCdf, RankVectors, rank_matrix, response_ecdf

__version__ = "0.1.0"
