"""potline: exact solvers and solution-preserving reductions for
P-matrix LCPs, unique sink orientations, piecewise-linear contraction
maps, and potential-line search problems."""

from .problems import (
    Certificate,
    ContractionInstance,
    LcpInstance,
    LineInstance,
    OpdcInstance,
    UsoInstance,
    cert,
    verify,
)
from .solvers import aldous, approx_find_fp, brute_force, find_fp, follow_line, lemke

__all__ = [
    "Certificate",
    "ContractionInstance",
    "LcpInstance",
    "LineInstance",
    "OpdcInstance",
    "UsoInstance",
    "cert",
    "verify",
    "lemke",
    "follow_line",
    "aldous",
    "find_fp",
    "approx_find_fp",
    "brute_force",
]
