"""Hermitian dilation of a sparse matrix and the ancilla protocol built on it.

For an ``N x N`` matrix ``U`` the dilation is the ``2N x 2N`` Hermitian matrix
``[[0, U], [U^H, 0]]``.  The ancilla is the high-order index bit: indices
``k < N`` carry ancilla ``|0>``, indices ``k >= N`` carry ancilla ``|1>``.

When ``U`` is unitary the dilation squares to the identity, so
``exp(-i H theta) = cos(theta) I - i sin(theta) H`` and at ``theta = pi/2``
the input placed on the ancilla-``|1>`` block comes out as ``-i U psi`` on
the ancilla-``|0>`` block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .sparse import DimensionError, SparseMatrix, as_sparse, check_unitary, distance, to_dense
from .trotter import FactoredEvolution, apply_factored, dense_evolution, trotterize

UNITARY_TOL = 1e-12
INVOLUTION_TOL = 1e-10
ANALYTIC_LEAK_TOL = 1e-10
HALF_PI = math.pi / 2


class NotInvolutoryError(ValueError):
    """The dilation does not square to the identity, so the cos/sin form is invalid."""


class NotUnitaryError(ValueError):
    pass


class LeakageError(RuntimeError):
    """Amplitude left on the ancilla-|1> block beyond the allowed threshold."""


@dataclass(frozen=True)
class Dilation:
    source_dim: int
    h: SparseMatrix
    involutory: bool

    @property
    def dim(self) -> int:
        return self.h.dim


def dilate(u) -> Dilation:
    """Build ``[[0, u], [u^H, 0]]``.

    ``u`` need not be unitary.  If it is (at ``1e-12``), the involution
    ``h @ h = I`` is verified and recorded.
    """
    u = as_sparse(u)
    n = u.dim
    csr = u.to_scipy()
    h = SparseMatrix.from_scipy(sp.block_array([[None, csr], [csr.conj().T, None]], format="csr"))
    involutory = False
    if check_unitary(u, UNITARY_TOL).is_unitary:
        sq = (h @ h).to_scipy() - sp.eye_array(2 * n, format="csr")
        defect = float(np.max(np.abs(sq.data))) if sq.nnz else 0.0
        if defect > INVOLUTION_TOL:
            raise AssertionError(f"dilation of a unitary is not involutory: defect {defect:.3e}")
        involutory = True
    return Dilation(n, h, involutory)


def analytic_evolution(d: Dilation, theta: float) -> np.ndarray:
    """``cos(theta) I - i sin(theta) H`` for an involutory dilation."""
    if not d.involutory:
        raise NotInvolutoryError("analytic evolution requires h @ h = I (source matrix not unitary)")
    return math.cos(theta) * np.eye(d.dim) - 1j * math.sin(theta) * to_dense(d.h)


def embed(psi, n: int) -> np.ndarray:
    """Place ``psi`` on the ancilla-|1> block (the NOT on a fresh ancilla)."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape[0] != n:
        raise DimensionError(f"state of dimension {psi.shape[0]} for matrix of dimension {n}")
    out = np.zeros((2 * n,) + psi.shape[1:], dtype=np.complex128)
    out[n:] = psi
    return out


def read_out(phi, n: int, keep_phase: bool = False) -> tuple[np.ndarray, float]:
    """Split an evolved dilated state into ``(ancilla-|0> block, leaked norm)``.

    Unless ``keep_phase`` is set the ``-i`` picked up by the evolution is
    removed by multiplying by ``i``.
    """
    top, bottom = phi[:n], phi[n:]
    leak = float(np.max(np.linalg.norm(bottom.reshape(n, -1), axis=0)))
    return (top if keep_phase else 1j * top), leak


@dataclass(frozen=True)
class DilationEvolution:
    """A compiled realisation of ``exp(-i H pi/2)`` for the dilation of one matrix."""

    dilation: Dilation
    method: str
    leak_tol: float
    factored: FactoredEvolution | None = None
    dense: np.ndarray | None = None

    def evolve(self, psi_dilated):
        if self.factored is not None:
            return apply_factored(self.factored, psi_dilated)
        return self.dense @ psi_dilated

    def apply(self, psi, keep_phase: bool = False) -> np.ndarray:
        n = self.dilation.source_dim
        out, leak = read_out(self.evolve(embed(psi, n)), n, keep_phase)
        scale = float(np.max(np.linalg.norm(np.asarray(psi).reshape(n, -1), axis=0)))
        if leak > self.leak_tol * scale:
            raise LeakageError(
                f"{leak:.3e} amplitude left on the ancilla-|1> block (allowed {self.leak_tol:.1e})")
        return out


def compile_dilation(u, method: str = "analytic", epsilon: float = 1e-3, order: int = 2,
                     require_unitary: bool = True, leak_tol: float | None = None) -> DilationEvolution:
    """Prepare ``exp(-i H pi/2)`` for the dilation of ``u``.

    ``method="analytic"`` uses the cos/sin closed form, ``"trotter"`` a
    certified product formula at error ``epsilon`` and ``"exact"`` the dense
    exponential (the only route for non-unitary ``u`` besides trotter).
    """
    d = dilate(u)
    if require_unitary and not d.involutory:
        raise NotUnitaryError(f"matrix is not unitary at tolerance {UNITARY_TOL:g}")
    if method == "analytic":
        return DilationEvolution(d, method, ANALYTIC_LEAK_TOL if leak_tol is None else leak_tol,
                                 dense=analytic_evolution(d, HALF_PI))
    if method == "trotter":
        f = trotterize(d.h, HALF_PI, epsilon, order)
        return DilationEvolution(d, method, epsilon if leak_tol is None else leak_tol, factored=f)
    if method == "exact":
        return DilationEvolution(d, method, ANALYTIC_LEAK_TOL if leak_tol is None else leak_tol,
                                 dense=dense_evolution(d.h, HALF_PI))
    raise ValueError(f"unknown method {method!r}; expected 'analytic', 'trotter' or 'exact'")


def apply_via_dilation(u, psi, method: str = "analytic", epsilon: float = 1e-3, order: int = 2,
                       keep_phase: bool = False) -> np.ndarray:
    """Compute ``U psi`` (up to the stripped global phase) through the dilation."""
    return compile_dilation(u, method, epsilon, order).apply(psi, keep_phase)


def certify(evolution: DilationEvolution, phase_invariant: bool = False) -> float:
    """Spectral distance between the compiled evolution and ``-i H``."""
    d = evolution.dilation
    target = -1j * to_dense(d.h) if d.involutory else dense_evolution(d.h, HALF_PI)
    got = evolution.factored.to_dense() if evolution.factored is not None else evolution.dense
    return distance(got, target, phase_invariant=phase_invariant)

