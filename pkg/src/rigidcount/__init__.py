"""Count the complex realizations of generically rigid planar graphs."""

from .decomposition import CountCertificate, CountResult, borcea_streinu_bound, count_c
from .graph import Graph, parse_graph
from .homotopy import NumericCount, TrackerConfig, count_realizations, verify_against_decomposition
from .rigidity import RigidityReport, is_globally_rigid, is_rigid, rigidity_report

__all__ = [
    "CountCertificate",
    "CountResult",
    "Graph",
    "NumericCount",
    "RigidityReport",
    "TrackerConfig",
    "borcea_streinu_bound",
    "count_c",
    "count_realizations",
    "is_globally_rigid",
    "is_rigid",
    "parse_graph",
    "rigidity_report",
    "verify_against_decomposition",
]
