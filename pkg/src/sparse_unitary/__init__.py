"""Implement sparse unitaries by simulating their Hermitian dilation.

A row- and column-sparse unitary ``U`` is embedded in ``H = [[0, U], [U^H, 0]]``;
evolving under ``H`` for time ``pi/2`` maps ``|1>|psi>`` to ``-i |0> U|psi>``.
``H`` is split into one-sparse terms that are exponentiated exactly and
recombined with a product formula whose error is certified against a dense
reference.
"""
from .decompose import OneSparseTerm, build_graph, edge_color, exp_term, split_one_sparse
from .dilation import (Dilation, analytic_evolution, apply_via_dilation, certify, compile_dilation,
                       dilate)
from .estimator import SparseUnitaryTransformer
from .io import read_matrix_market, read_state, write_matrix_market, write_state
from .sparse import (RowOracle, SparseMatrix, apply, check_unitary, distance, random_sparse_unitary,
                     row_nonzeros, spectral_norm, to_dense)
from .trotter import (FactoredEvolution, apply_factored, measured_error, product_formula,
                      trotterize)

__version__ = "0.1.0"

__all__ = [
    "Dilation", "FactoredEvolution", "OneSparseTerm", "RowOracle", "SparseMatrix",
    "SparseUnitaryTransformer", "analytic_evolution", "apply", "apply_factored",
    "apply_via_dilation", "build_graph", "certify", "check_unitary", "compile_dilation", "dilate",
    "distance", "edge_color", "exp_term", "measured_error", "product_formula",
    "random_sparse_unitary", "read_matrix_market", "read_state", "row_nonzeros",
    "spectral_norm", "split_one_sparse", "to_dense", "trotterize", "write_matrix_market",
    "write_state",
]
