"""heterolab: homophily/heterophily metrics, synthetic graph generators,
a numpy GCN/MLP training pipeline, and Monte Carlo checks of when mean
aggregation helps node classification."""

from heterolab.errors import BundleError, NumericalError, ValidationError
from heterolab.graph import DegreeSummary, LabeledGraph, build_graph, degree_summary, neighbors
from heterolab.metrics import CcnsMatrix, NeighborHistogram, ccns, homophily_ratio, neighbor_histogram

__version__ = "0.1.0"

__all__ = [
    "BundleError",
    "CcnsMatrix",
    "DegreeSummary",
    "LabeledGraph",
    "NeighborHistogram",
    "NumericalError",
    "ValidationError",
    "build_graph",
    "ccns",
    "degree_summary",
    "homophily_ratio",
    "neighbor_histogram",
    "neighbors",
]
