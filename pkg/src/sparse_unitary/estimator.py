"""scikit-learn style front end: fit compiles a sparse unitary, transform applies it."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dilation import certify, compile_dilation
from .sparse import RowOracle, SparseMatrix, as_sparse

METHODS = ("analytic", "trotter", "exact")


def check_operator(u) -> SparseMatrix:
    """Validate and coerce a square operator given sparse, dense or as a row oracle."""
    if isinstance(u, (SparseMatrix, RowOracle)) or sp.issparse(u):
        return as_sparse(u)
    a = np.asarray(u)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator contains NaN or infinite entries")
    return SparseMatrix.from_dense(a)


def check_states(X, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce ``X`` to a complex ``(n_states, dim)`` array; also report whether it was 1-D."""
    a = np.asarray(X, dtype=np.complex128)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"expected a state or a 2-D array of states, got {a.ndim} dimensions")
    if a.shape[1] != dim:
        raise ValueError(f"states have dimension {a.shape[1]}, operator has dimension {dim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("states contain NaN or infinite amplitudes")
    return a, single


class SparseUnitaryTransformer(TransformerMixin, BaseEstimator):
    """Apply a sparse unitary to batches of states through its Hermitian dilation.

    Parameters
    ----------
    method : {"analytic", "trotter", "exact"}
        How ``exp(-i H pi/2)`` is realised.
    epsilon : float
        Target operator-norm error for ``method="trotter"``.
    order : {1, 2}
        Product-formula order.
    keep_phase : bool
        Keep the ``-i`` global phase instead of stripping it.

    Attributes
    ----------
    evolution_ : DilationEvolution
    certified_error_ : float
        Spectral distance of the compiled evolution from ``-i H``.
    n_features_in_ : int
    """

    def __init__(self, method="trotter", epsilon=1e-3, order=2, keep_phase=False):
        self.method = method
        self.epsilon = epsilon
        self.order = order
        self.keep_phase = keep_phase

    def fit(self, U, y=None):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        u = check_operator(U)
        self.evolution_ = compile_dilation(u, self.method, self.epsilon, self.order)
        self.certified_error_ = certify(self.evolution_)
        self.n_features_in_ = u.dim
        return self

    def transform(self, X):
        """Return ``U x`` for every row ``x`` of ``X``."""
        check_is_fitted(self, "evolution_")
        a, single = check_states(X, self.n_features_in_)
        out = self.evolution_.apply(a.T, keep_phase=self.keep_phase).T
        return out[0] if single else out

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = True
        return tags
