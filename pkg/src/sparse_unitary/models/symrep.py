"""Young's orthogonal form for irreducible representations of ``S_n``.

The basis of the irrep labelled by a partition is the set of standard Young
tableaux of that shape, in last-letter order: tableaux are compared by the
row of their largest differing letter, lower row first.  The adjacent
transposition ``s_j = (j, j+1)`` acts on each tableau ``T`` through the axial
distance ``rho = content(j+1) - content(j)``:

* ``j`` and ``j+1`` in the same row (``rho = 1``) or column (``rho = -1``):
  ``s_j T = T / rho``;
* otherwise ``s_j`` mixes ``T`` with the tableau ``T'`` that has ``j`` and
  ``j+1`` swapped through the block ``[[1/rho, c], [c, -1/rho]]`` with
  ``c = sqrt(1 - 1/rho^2)``.

So every generator is a direct sum of 1x1 and 2x2 blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..sparse import SparseMatrix, spectral_norm, to_dense

Tableau = tuple[tuple[int, ...], ...]


def check_partition(lam) -> tuple[int, ...]:
    lam = tuple(int(x) for x in lam)
    if not lam or any(x <= 0 for x in lam) or any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"not a partition (non-increasing positive integers): {lam}")
    return lam


def partitions(n: int):
    """All partitions of ``n`` in reverse lexicographic order."""
    def rec(rest, cap):
        if rest == 0:
            yield ()
            return
        for k in range(min(rest, cap), 0, -1):
            for tail in rec(rest - k, k):
                yield (k,) + tail
    yield from rec(n, n)


def hook_length_dimension(lam) -> int:
    lam = check_partition(lam)
    n = sum(lam)
    conj = [sum(1 for r in lam if r > c) for c in range(lam[0])]
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(n) // hooks


@lru_cache(maxsize=None)
def standard_tableaux(lam: tuple[int, ...]) -> tuple[Tableau, ...]:
    """Standard tableaux of shape ``lam`` in last-letter order."""
    lam = check_partition(lam)
    n = sum(lam)
    if n == 1:
        return (((1,),),)
    out = []
    # removable corners, bottom row first
    for i in reversed(range(len(lam))):
        if i + 1 < len(lam) and lam[i + 1] == lam[i]:
            continue
        smaller = list(lam)
        smaller[i] -= 1
        if smaller[i] == 0:
            smaller.pop()
        for t in standard_tableaux(tuple(smaller)):
            rows = [list(r) for r in t]
            if i == len(rows):
                rows.append([])
            rows[i].append(n)
            out.append(tuple(tuple(r) for r in rows))
    return tuple(out)


def _positions(t: Tableau) -> dict[int, tuple[int, int]]:
    return {v: (i, j) for i, row in enumerate(t) for j, v in enumerate(row)}


def axial_distance(t: Tableau, j: int) -> int:
    """``content(j+1) - content(j)`` where content is column minus row."""
    pos = _positions(t)
    (r1, c1), (r2, c2) = pos[j], pos[j + 1]
    return (c2 - r2) - (c1 - r1)


def _swap(t: Tableau, j: int) -> Tableau:
    sw = {j: j + 1, j + 1: j}
    return tuple(tuple(sw.get(v, v) for v in row) for row in t)


def symrep_generator(lam, j: int) -> SparseMatrix:
    """Matrix of the transposition ``(j, j+1)`` in the orthogonal form, ``1 <= j < n``."""
    lam = check_partition(lam)
    n = sum(lam)
    if not 1 <= j < n:
        raise ValueError(f"generator index j={j} out of range 1..{n - 1}")
    basis = standard_tableaux(lam)
    index = {t: k for k, t in enumerate(basis)}
    rows, cols, amps = [], [], []
    for k, t in enumerate(basis):
        rho = axial_distance(t, j)
        rows.append(k)
        cols.append(k)
        amps.append(1.0 / rho)
        if abs(rho) > 1:
            rows.append(k)
            cols.append(index[_swap(t, j)])
            amps.append(math.sqrt(1.0 - 1.0 / rho ** 2))
    return SparseMatrix(len(basis), rows, cols, amps)


@dataclass
class SymRepReport:
    partition: tuple[int, ...]
    dim: int
    failures: list[tuple[str, int, int, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def symrep_check(lam, tol: float = 1e-10) -> SymRepReport:
    """Check the Coxeter relations, unitarity and 2-sparsity of every generator.

    Failures are recorded as ``(relation, j, k, residual)``.
    """
    lam = check_partition(lam)
    n = sum(lam)
    gens = {j: symrep_generator(lam, j) for j in range(1, n)}
    dense = {j: to_dense(g) for j, g in gens.items()}
    dim = len(standard_tableaux(lam))
    eye = np.eye(dim)
    report = SymRepReport(lam, dim)

    def record(name, j, k, residual):
        if residual > tol:
            report.failures.append((name, j, k, residual))

    for j, g in dense.items():
        record("involution", j, j, spectral_norm(g @ g - eye))
        record("unitary", j, j, spectral_norm(g.conj().T @ g - eye))
        record("sparsity", j, j, float(max(gens[j].row_counts().max() - 2, 0)))
    for j in range(1, n - 1):
        a, b = dense[j], dense[j + 1]
        record("braid", j, j + 1, spectral_norm(a @ b @ a - b @ a @ b))
    for j in range(1, n):
        for k in range(j + 2, n):
            a, b = dense[j], dense[k]
            record("commute", j, k, spectral_norm(a @ b - b @ a))
    return report
