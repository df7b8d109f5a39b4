"""Exact p-adic encoding, ultrametric classification and dendrogram invariants."""

from .classifier import (
    CANONICAL,
    INF,
    PAPER_BINARY,
    ClusterHierarchy,
    Disc,
    classify,
    disc_distance,
    encode_dendrogram,
    median_vertex,
    stabilize,
    star_tree,
    subdivide,
)
from .dendrogram import FlagGraph, ProjectiveDendrogram, betti, cycle_rank, edges
from .errors import (
    DegenerateError,
    IndistinguishableError,
    InvalidInputError,
    NonDiscreteError,
    NotInImageError,
    PadicError,
    PrecisionError,
    UnsupportedOperationError,
)
from .invariants import BalanceReport, balance_report, branch_weights, dagger_tree
from .padic_core import (
    POLYNOMIAL,
    TEICHMULLER,
    FieldDescriptor,
    PAdicNumber,
    add_sub,
    difference_valuation,
    format_padic,
    norm,
    parse_padic,
    valuation,
)
from .strings import (
    AlphabetCode,
    baire_distance,
    build_code,
    decode_string,
    encode_string,
    preset,
)
from .timeseries import (
    CurveData,
    DendrogramSeries,
    balance_series,
    classify_flow,
    estimate_velocity,
    geodesic_endpoints,
    invariant_branch,
    mumford_curve,
    recenter,
    tate_curve,
)

__version__ = "0.1.0"
