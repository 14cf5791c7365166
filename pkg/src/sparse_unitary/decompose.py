"""Split a sparse Hermitian matrix into one-sparse terms and exponentiate them.

The off-diagonal support of ``h`` is an undirected graph.  A proper edge
colouring partitions its edges into matchings; each matching, together with
the conjugate entries, is a Hermitian matrix made of disjoint 2x2 blocks and
can be exponentiated in closed form.  The diagonal is kept as one extra
term.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .sparse import DROP_TOL, SparseMatrix, as_sparse

HERMITIAN_TOL = 1e-12


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class SparsityGraph:
    dim: int
    edges: tuple[tuple[int, int], ...]
    diagonal: tuple[tuple[int, float], ...]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.dim, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.edges else 0


@dataclass(frozen=True)
class OneSparseTerm:
    """Hermitian term built from disjoint pairs ``(i, j, amp)`` with ``i < j`` plus a diagonal.

    An index sits in at most one pair and carries at most one diagonal
    value.  A pair whose endpoints also carry diagonal values forms a full
    2x2 Hermitian block.
    """

    dim: int
    pairs: tuple[tuple[int, int, complex], ...] = ()
    diag: tuple[tuple[int, float], ...] = ()
    color: int | None = field(default=None, compare=False)

    def __post_init__(self):
        seen = set()
        for i, j, _ in self.pairs:
            if not (0 <= i < j < self.dim):
                raise ValueError(f"pair ({i}, {j}) must satisfy 0 <= i < j < {self.dim}")
            if i in seen or j in seen:
                raise ValueError(f"index reused across pairs in ({i}, {j})")
            seen.update((i, j))
        diag_idx = [i for i, _ in self.diag]
        if len(set(diag_idx)) != len(diag_idx):
            raise ValueError("repeated diagonal index")
        if any(not 0 <= i < self.dim for i in diag_idx):
            raise ValueError("diagonal index out of range")

    def to_sparse(self) -> SparseMatrix:
        rows, cols, amps = [], [], []
        for i, j, a in self.pairs:
            rows += [i, j]
            cols += [j, i]
            amps += [a, a.conjugate()]
        for i, v in self.diag:
            rows.append(i)
            cols.append(i)
            amps.append(v)
        return SparseMatrix(self.dim, rows, cols, amps)

    def norm(self) -> float:
        """Spectral norm, exact from the 2x2 block structure."""
        diag = dict(self.diag)
        best = max((abs(v) for v in diag.values()), default=0.0)
        for i, j, a in self.pairs:
            vi, vj = diag.get(i, 0.0), diag.get(j, 0.0)
            mid, half = 0.5 * (vi + vj), 0.5 * (vi - vj)
            best = max(best, abs(mid) + math.hypot(half, abs(a)))
        return best


def _check_hermitian(h: SparseMatrix, tol: float = HERMITIAN_TOL) -> None:
    diff = h.to_scipy() - h.to_scipy().conj().T
    worst = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    if worst > tol:
        raise NotHermitianError(f"matrix is not Hermitian: max |h - h^H| = {worst:.3e}")


def build_graph(h) -> SparsityGraph:
    h = as_sparse(h)
    _check_hermitian(h)
    edges, diagonal = set(), []
    for i, j, a in h.entries():
        if i == j:
            diagonal.append((i, a.real))
        else:
            edges.add((min(i, j), max(i, j)))
    return SparsityGraph(h.dim, tuple(sorted(edges)), tuple(diagonal))


def edge_color(g: SparsityGraph) -> list[list[tuple[int, int]]]:
    """Greedy proper edge colouring, at most ``2 * max_degree - 1`` colours.

    Edges are taken in lexicographic order and get the smallest colour free
    at both endpoints.
    """
    used: list[set[int]] = [set() for _ in range(g.dim)]
    classes: list[list[tuple[int, int]]] = []
    for i, j in sorted(g.edges):
        taken = used[i] | used[j]
        c = 0
        while c in taken:
            c += 1
        if c == len(classes):
            classes.append([])
        classes[c].append((i, j))
        used[i].add(c)
        used[j].add(c)
    return classes


def split_one_sparse(h) -> list[OneSparseTerm]:
    """One term per colour class (ascending), then the diagonal term if nonzero."""
    h = as_sparse(h)
    g = build_graph(h)
    terms = []
    for color, matching in enumerate(edge_color(g)):
        pairs = tuple((i, j, h[i, j]) for i, j in matching)
        terms.append(OneSparseTerm(h.dim, pairs=pairs, color=color))
    if g.diagonal:
        terms.append(OneSparseTerm(h.dim, diag=g.diagonal))
    return terms


def _exp_block(theta: float, vi: float, vj: float, a: complex) -> np.ndarray:
    """``exp(-i theta [[vi, a], [conj(a), vj]])`` in closed form."""
    mid, half = 0.5 * (vi + vj), 0.5 * (vi - vj)
    w = math.hypot(half, abs(a))
    phase = cmath.exp(-1j * theta * mid)
    if w == 0.0:
        return phase * np.eye(2, dtype=np.complex128)
    c, s = math.cos(theta * w), math.sin(theta * w) / w
    return phase * np.array([
        [c - 1j * s * half, -1j * s * a],
        [-1j * s * a.conjugate(), c + 1j * s * half],
    ])


def exp_term(term: OneSparseTerm, theta: float) -> SparseMatrix:
    """Exact ``exp(-i theta T)``; identity on indices the term does not touch."""
    n = term.dim
    diag = dict(term.diag)
    touched = set()
    rows, cols, amps = [], [], []
    for i, j, a in term.pairs:
        if i not in diag and j not in diag:
            # the common case: pure off-diagonal pair, no trig argument folding
            r, ph = abs(a), cmath.phase(a)
            c, s = math.cos(theta * r), math.sin(theta * r)
            blk = ((c, -1j * cmath.exp(1j * ph) * s), (-1j * cmath.exp(-1j * ph) * s, c))
        else:
            blk = _exp_block(theta, diag.get(i, 0.0), diag.get(j, 0.0), a)
        for (p, q), val in zip(((i, i), (i, j), (j, i), (j, j)),
                               (blk[0][0], blk[0][1], blk[1][0], blk[1][1])):
            if abs(val) >= DROP_TOL:
                rows.append(p)
                cols.append(q)
                amps.append(val)
        touched.update((i, j))
    for i, v in term.diag:
        if i not in touched:
            rows.append(i)
            cols.append(i)
            amps.append(cmath.exp(-1j * theta * v))
            touched.add(i)
    rest = np.setdiff1d(np.arange(n), np.fromiter(touched, dtype=np.int64, count=len(touched)))
    rows.extend(rest.tolist())
    cols.extend(rest.tolist())
    amps.extend([1.0] * len(rest))
    return SparseMatrix(n, rows, cols, amps)
