"""
Exact diagram calculus: uni-trivalent diagrams modulo AS/IHX, formal
Gaussian integration over diagram variables, diagrams on strands with the
PBW isomorphism, BCH tree gluing, and the checks behind surgery invariance.
"""
from __future__ import annotations

from .algebra import apply, exp_union, log_union, pair, relabel, Relabeling
from .basis import build_basis, reduce
from .bch import bch_trees, m_via_bch, m_via_operator
from .diagram import DiagramError, VertexlessLoopError, dual, strut, ytree
from .gaussian import (DegenerateCovarianceError, Gaussian, divergence,
                       extract_gaussian, integrate)
from .grammar import ParseError, format_sum, parse_sum
from .series import Caps, DSum
from .skeleton import chi, sigma

__all__ = [
    "apply", "exp_union", "log_union", "pair", "relabel", "Relabeling",
    "build_basis", "reduce", "bch_trees", "m_via_bch", "m_via_operator",
    "DiagramError", "VertexlessLoopError", "dual", "strut", "ytree",
    "DegenerateCovarianceError", "Gaussian", "divergence", "extract_gaussian",
    "integrate", "ParseError", "format_sum", "parse_sum", "Caps", "DSum",
    "chi", "sigma",
]
