"""Sparse complex matrices, row oracles and the dense verification bridge.

Matrices are immutable and stored in canonical CSR form (sorted column
indices, no duplicates, no entries below :data:`DROP_TOL`).  Every operator
norm in the package is computed on dense arrays, so :func:`to_dense` refuses
anything above :data:`DENSE_CAP`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

DROP_TOL = 1e-14
DENSE_CAP = 4096
POWER_ITER_CAP = 10_000


class DimensionError(ValueError):
    """Raised on mismatched or oversized dimensions."""


class ConvergenceError(RuntimeError):
    pass


class SparseMatrix:
    """Square complex sparse matrix with at most a few nonzeros per row.

    Parameters
    ----------
    dim : int
        Matrix dimension ``N``.
    rows, cols, amps : sequences
        Coordinate triples. Duplicate ``(row, col)`` pairs are rejected,
        entries with ``|amp| < DROP_TOL`` are dropped.
    """

    __slots__ = ("dim", "_csr", "_csc")

    def __init__(self, dim: int, rows=(), cols=(), amps=()):
        dim = int(dim)
        if dim < 1:
            raise DimensionError(f"dimension must be positive, got {dim}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        amps = np.asarray(amps, dtype=np.complex128).ravel()
        if not (len(rows) == len(cols) == len(amps)):
            raise ValueError("rows, cols and amps must have equal length")
        if len(rows) and (rows.min() < 0 or rows.max() >= dim
                          or cols.min() < 0 or cols.max() >= dim):
            raise IndexError(f"entry index out of range for dimension {dim}")
        keys = rows * dim + cols
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate (row, col) entries")
        keep = np.abs(amps) >= DROP_TOL
        coo = sp.coo_array((amps[keep], (rows[keep], cols[keep])), shape=(dim, dim))
        self._csr = _canonical(coo.tocsr())
        self._csc = None
        self.dim = dim

    @classmethod
    def _from_csr(cls, csr) -> "SparseMatrix":
        out = cls.__new__(cls)
        out.dim = csr.shape[0]
        csr = sp.csr_array(csr, dtype=np.complex128)
        csr.data[np.abs(csr.data) < DROP_TOL] = 0
        out._csr = _canonical(csr)
        out._csc = None
        return out

    @classmethod
    def from_scipy(cls, m) -> "SparseMatrix":
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {m.shape}")
        return cls._from_csr(sp.csr_array(m))

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {a.shape}")
        rows, cols = np.nonzero(np.abs(a) >= DROP_TOL)
        return cls(a.shape[0], rows, cols, a[rows, cols])

    @classmethod
    def identity(cls, dim: int) -> "SparseMatrix":
        idx = np.arange(dim)
        return cls(dim, idx, idx, np.ones(dim))

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    def to_scipy(self):
        """Return a copy of the canonical CSR storage."""
        return self._csr.copy()

    def entries(self) -> list[tuple[int, int, complex]]:
        """All stored entries, sorted by ``(row, col)``."""
        coo = self._csr.tocoo()
        return [(int(r), int(c), complex(a)) for r, c, a in zip(coo.row, coo.col, coo.data)]

    def row_nonzeros(self, i: int) -> list[tuple[int, complex]]:
        _check_index(i, self.dim)
        lo, hi = self._csr.indptr[i], self._csr.indptr[i + 1]
        return [(int(c), complex(a)) for c, a in
                zip(self._csr.indices[lo:hi], self._csr.data[lo:hi])]

    def col_nonzeros(self, j: int) -> list[tuple[int, complex]]:
        _check_index(j, self.dim)
        if self._csc is None:
            self._csc = self._csr.tocsc()
            self._csc.sort_indices()
        lo, hi = self._csc.indptr[j], self._csc.indptr[j + 1]
        return [(int(r), complex(a)) for r, a in
                zip(self._csc.indices[lo:hi], self._csc.data[lo:hi])]

    def __getitem__(self, key) -> complex:
        i, j = key
        return complex(self._csr[i, j])

    def row_counts(self) -> np.ndarray:
        return np.diff(self._csr.indptr)

    def col_counts(self) -> np.ndarray:
        return np.bincount(self._csr.indices, minlength=self.dim)

    @property
    def sparsity(self) -> int:
        """Maximum nonzero count over all rows and columns."""
        if self.nnz == 0:
            return 0
        return int(max(self.row_counts().max(), self.col_counts().max()))

    def conj_transpose(self) -> "SparseMatrix":
        return SparseMatrix._from_csr(self._csr.conj().T.tocsr())

    adjoint = conj_transpose

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            if other.dim != self.dim:
                raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return SparseMatrix._from_csr(self._csr @ other._csr)
        return self._csr @ other

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        a, b = self._csr, other._csr
        return (self.dim == other.dim and np.array_equal(a.indptr, b.indptr)
                and np.array_equal(a.indices, b.indices) and np.array_equal(a.data, b.data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseMatrix(dim={self.dim}, nnz={self.nnz}, sparsity={self.sparsity})"


def _canonical(csr):
    csr.eliminate_zeros()
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


def _check_index(i, dim):
    if not 0 <= i < dim:
        raise IndexError(f"index {i} out of range for dimension {dim}")


@dataclass(frozen=True)
class RowOracle:
    """Procedural matrix: ``row_fn(i)`` lists the nonzero ``(col, amp)`` of row ``i``.

    Returned lists are normalised (sorted, drop tolerance applied) and checked
    for distinct columns on every query.
    """

    dim: int
    row_fn: Callable[[int], Iterable[tuple[int, complex]]]

    def row_nonzeros(self, i: int) -> list[tuple[int, complex]]:
        _check_index(i, self.dim)
        out = sorted(((int(c), complex(a)) for c, a in self.row_fn(i) if abs(a) >= DROP_TOL),
                     key=lambda e: e[0])
        cols = [c for c, _ in out]
        if len(set(cols)) != len(cols):
            raise ValueError(f"row oracle returned duplicate columns in row {i}")
        if cols and (cols[0] < 0 or cols[-1] >= self.dim):
            raise IndexError(f"row oracle returned a column out of range in row {i}")
        return out

    def materialize(self) -> SparseMatrix:
        rows, cols, amps = [], [], []
        for i in range(self.dim):
            for c, a in self.row_nonzeros(i):
                rows.append(i)
                cols.append(c)
                amps.append(a)
        return SparseMatrix(self.dim, rows, cols, amps)


def as_sparse(m) -> SparseMatrix:
    """Coerce a SparseMatrix, RowOracle, scipy sparse matrix or dense array."""
    if isinstance(m, SparseMatrix):
        return m
    if isinstance(m, RowOracle):
        return m.materialize()
    if sp.issparse(m):
        return SparseMatrix.from_scipy(m)
    return SparseMatrix.from_dense(m)


def row_nonzeros(m, i: int) -> list[tuple[int, complex]]:
    return m.row_nonzeros(i)


def to_dense(m, cap: int = DENSE_CAP) -> np.ndarray:
    if isinstance(m, np.ndarray):
        return m
    m = as_sparse(m)
    if m.dim > cap:
        raise DimensionError(f"dimension {m.dim} exceeds dense cap {cap}")
    return m._csr.toarray()


def spectral_norm(a, tol: float = 1e-10, max_iter: int = POWER_ITER_CAP,
                  start: np.ndarray | None = None) -> float:
    """Largest singular value by power iteration on ``A^H A``.

    Stops once the Rayleigh quotient of ``A^H A`` changes by less than
    ``tol`` relative to itself.  Every 50 iterations without convergence the
    iteration operator is squared (up to ``(A^H A)^1024``), which keeps
    clustered top singular values from stalling the iteration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = to_dense(a)
    n = a.shape[1]
    if n == 0 or not np.any(a):
        return 0.0
    gram = a.conj().T @ a
    op, power = gram / np.linalg.norm(gram), 1
    if start is None:
        rng = np.random.default_rng(0x5EED)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    else:
        x = np.array(start, dtype=np.complex128)
    x /= np.linalg.norm(x)
    lam = -1.0
    for it in range(1, max_iter + 1):
        y = op @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # start vector in the null space; restart from the heaviest column
            y = np.zeros(n, dtype=np.complex128)
            y[np.argmax(np.linalg.norm(a, axis=0))] = 1.0
            ny = 1.0
        x = y / ny
        new = float(np.real(np.vdot(x, gram @ x)))
        if abs(new - lam) <= tol * abs(new):
            return math.sqrt(max(new, 0.0))
        lam = new
        if it % 50 == 0 and power < 1024:
            op = op @ op
            op /= np.linalg.norm(op)
            power *= 2
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def distance(a, b, phase_invariant: bool = False, tol: float = 1e-10) -> float:
    """Spectral-norm distance, optionally minimised over a global phase on ``b``."""
    a, b = to_dense(a), to_dense(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not phase_invariant:
        return spectral_norm(a - b, tol)
    return min_phase_distance(a, b, tol)[0]


def min_phase_distance(a: np.ndarray, b: np.ndarray, tol: float = 1e-10,
                       grid: int = 720) -> tuple[float, float]:
    """Return ``(min_phi ||a - e^{i phi} b||, phi)``.

    A coarse grid at loose tolerance brackets the minimum, golden-section
    search refines it, and the result is re-evaluated at ``tol``.
    """
    phis = 2 * np.pi * np.arange(grid) / grid
    coarse = [spectral_norm(a - np.exp(1j * phi) * b, 1e-6) for phi in phis]
    k = int(np.argmin(coarse))
    step = 2 * np.pi / grid

    def f(phi):
        return spectral_norm(a - np.exp(1j * phi) * b, 1e-8)

    lo, hi = phis[k] - step, phis[k] + step
    g = (math.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(60):
        if hi - lo < 1e-12:
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = f(d)
    candidates = [phis[k], 0.5 * (lo + hi)]
    vals = [spectral_norm(a - np.exp(1j * phi) * b, tol) for phi in candidates]
    best = int(np.argmin(vals))
    return vals[best], float(candidates[best] % (2 * np.pi))


@dataclass(frozen=True)
class UnitarityReport:
    is_unitary: bool
    max_col_defect: float
    max_row_defect: float


def _gram_defect(g) -> float:
    g = sp.csr_array(g)
    diag = g.diagonal()
    off = g - sp.diags_array(diag, format="csr")
    d1 = float(np.max(np.abs(diag - 1.0))) if len(diag) else 0.0
    d2 = float(np.max(np.abs(off.data))) if off.nnz else 0.0
    return max(d1, d2)


def check_unitary(m, tol: float = 1e-12) -> UnitarityReport:
    """Check ``M^H M = I`` and ``M M^H = I`` entrywise.

    Each defect is the larger of the worst ``| ||v||^2 - 1 |`` over columns
    (rows) and the worst off-diagonal inner product magnitude.
    """
    csr = as_sparse(m)._csr
    col = _gram_defect(csr.conj().T @ csr)
    row = _gram_defect(csr @ csr.conj().T)
    return UnitarityReport(col <= tol and row <= tol, col, row)


def apply(m, v) -> np.ndarray:
    """Sparse matrix-vector product; ``m`` may be a SparseMatrix or RowOracle."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[0] != m.dim:
        raise DimensionError(f"state of dimension {v.shape[0]} for matrix of dimension {m.dim}")
    if isinstance(m, SparseMatrix):
        return m._csr @ v
    out = np.zeros_like(v)
    for i in range(m.dim):
        out[i] = sum(a * v[c] for c, a in m.row_nonzeros(i))
    return out


def combinatorial_blocks(m) -> list[int]:
    """Sizes of the smallest blocks of ``m`` under simultaneous row/column permutation.

    These are the connected components of the undirected graph joining
    ``i`` and ``j`` whenever ``m[i, j]`` or ``m[j, i]`` is nonzero; ``P m P^T``
    is block diagonal with largest block ``k`` exactly when every component
    has at most ``k`` vertices.  Sorted largest first.
    """
    csr = as_sparse(m)._csr
    n = csr.shape[0]
    pattern = sp.csr_array((np.ones(csr.nnz), csr.indices, csr.indptr), shape=(n, n))
    _, labels = connected_components(pattern + pattern.T, directed=False)
    return sorted((int(s) for s in np.bincount(labels)), reverse=True)


def random_sparse_unitary(n: int, d: int, seed: int, max_rounds: int | None = None) -> SparseMatrix:
    """Random ``n x n`` unitary with at most ``d`` nonzeros per row and column.

    Starts from a random phased permutation, then alternates rounds of random
    disjoint 2x2 rotations applied to row pairs (left multiplication) and to
    column pairs (right multiplication); each candidate pair is rotated with
    probability 1/2 so odd supports can form.  A rotation that would push any row
    or column past ``d`` nonzeros is skipped.  Stops once some row holds
    ``d`` nonzeros or after ``max_rounds`` rounds.
    """
    if not 1 <= d <= n:
        raise ValueError(f"infeasible sparsity d={d} for dimension n={n}")
    rng = np.random.default_rng(seed)
    if max_rounds is None:
        max_rounds = 8 * max(1, math.ceil(math.log2(d))) + 16
    perm = rng.permutation(n)
    rows: list[dict[int, complex]] = [{} for _ in range(n)]
    cols: list[dict[int, complex]] = [{} for _ in range(n)]
    for i in range(n):
        a = complex(np.exp(2j * np.pi * rng.random()))
        rows[i][int(perm[i])] = a
        cols[int(perm[i])][i] = a

    def mix(lines, other, i, j):
        # rotate lines i, j; `other` is the transposed view kept in sync
        union = sorted(lines[i].keys() | lines[j].keys())
        if len(union) > d:
            return
        gained = [c for c in union if (c in lines[i]) != (c in lines[j])]
        if any(len(other[c]) + 1 > d for c in gained):
            return
        g = _random_u2(rng)
        li, lj = lines[i], lines[j]
        lines[i] = {c: g[0, 0] * li.get(c, 0) + g[0, 1] * lj.get(c, 0) for c in union}
        lines[j] = {c: g[1, 0] * li.get(c, 0) + g[1, 1] * lj.get(c, 0) for c in union}
        for c in union:
            other[c][i] = lines[i][c]
            other[c][j] = lines[j][c]

    for k in range(max_rounds):
        if max(len(r) for r in rows) >= d:
            break
        lines, other = (rows, cols) if k % 2 == 0 else (cols, rows)
        order = rng.permutation(n)
        for p in range(0, n - 1, 2):
            if rng.random() < 0.5:
                mix(lines, other, int(order[p]), int(order[p + 1]))
    rr, cc, aa = [], [], []
    for i, r in enumerate(rows):
        for c, a in r.items():
            rr.append(i)
            cc.append(c)
            aa.append(a)
    return SparseMatrix(n, rr, cc, aa)


def _random_u2(rng) -> np.ndarray:
    # Haar-ish U(2) bounded away from diagonal/antidiagonal so supports really merge
    theta = rng.uniform(0.2, np.pi / 2 - 0.2)
    a, b, c = 2 * np.pi * rng.random(3)
    ct, st = math.cos(theta), math.sin(theta)
    return np.array([
        [np.exp(1j * a) * ct, np.exp(1j * b) * st],
        [-np.exp(1j * (c - b)) * st, np.exp(1j * (c - a)) * ct],
    ])
