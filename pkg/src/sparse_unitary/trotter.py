"""Product-formula approximations of ``exp(-i h t)`` from exact one-sparse factors."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .decompose import exp_term, split_one_sparse
from .io import read_matrix_market, write_matrix_market
from .sparse import DENSE_CAP, DimensionError, SparseMatrix, as_sparse, spectral_norm, to_dense

R_CAP = 2 ** 20
MAX_PROBES = 20
SEARCH_TOL = 1e-6
CERTIFY_TOL = 1e-10


class TrotterCapError(RuntimeError):
    """The requested error cannot be met with at most ``R_CAP`` repetitions."""


@dataclass(frozen=True)
class FactoredEvolution:
    """``r`` repetitions of an ordered slice of exactly unitary sparse factors.

    The full factor sequence is ``slice_factors`` repeated ``r`` times and is
    applied left to right, i.e. ``slice_factors[0]`` acts first.
    """

    dim: int
    slice_factors: tuple[SparseMatrix, ...]
    r: int
    order: int
    target_t: float
    term_count: int
    epsilon: float | None = None
    certified_error: float | None = field(default=None, compare=False)

    @property
    def factors(self) -> list[SparseMatrix]:
        return list(self.slice_factors) * self.r

    def __len__(self) -> int:
        return len(self.slice_factors) * self.r

    def slice_dense(self) -> np.ndarray:
        out = np.eye(self.dim, dtype=np.complex128)
        for f in self.slice_factors:
            out = f @ out
        return out

    def to_dense(self) -> np.ndarray:
        """Dense product of all factors (by repeated squaring of one slice)."""
        if self.dim > DENSE_CAP:
            raise DimensionError(f"dimension {self.dim} exceeds dense cap {DENSE_CAP}")
        return np.linalg.matrix_power(self.slice_dense(), self.r)

    def with_error(self, err: float | None) -> "FactoredEvolution":
        return FactoredEvolution(self.dim, self.slice_factors, self.r, self.order,
                                 self.target_t, self.term_count, self.epsilon, err)


def _slice_factors(terms, dt: float, order: int) -> tuple[SparseMatrix, ...]:
    if order == 1:
        return tuple(exp_term(t, dt) for t in terms)
    if order == 2:
        if not terms:
            return ()
        half = [exp_term(t, dt / 2) for t in terms[:-1]]
        return tuple(half + [exp_term(terms[-1], dt)] + half[::-1])
    raise ValueError(f"order must be 1 or 2, got {order}")


def product_formula(h, t: float, r: int, order: int = 1) -> FactoredEvolution:
    """Order-1 or symmetric order-2 product formula with a fixed repetition count."""
    h = as_sparse(h)
    if r < 1:
        raise ValueError(f"repetition count must be positive, got {r}")
    terms = split_one_sparse(h)
    return FactoredEvolution(h.dim, _slice_factors(terms, t / r, order), r, order, t, len(terms))


def dense_evolution(h, t: float) -> np.ndarray:
    """Reference ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    a = to_dense(h)
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def initial_repetitions(terms, t: float, epsilon: float) -> int:
    """First-order bound ``ceil((M t L)^2 / eps)``, ``L`` the largest term norm."""
    lam = max((term.norm() for term in terms), default=0.0)
    r0 = math.ceil((len(terms) * abs(t) * lam) ** 2 / epsilon)
    return int(min(max(r0, 1), R_CAP))


def trotterize(h, t: float, epsilon: float, order: int = 1, certify: bool = True) -> FactoredEvolution:
    """Product formula for ``exp(-i h t)`` with the smallest ``r`` meeting ``epsilon``.

    With ``certify`` (and ``h`` within the dense cap) the analytic starting
    point is tightened by bisection against the dense reference; otherwise
    the analytic ``r`` is returned uncertified.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    h = as_sparse(h)
    terms = split_one_sparse(h)
    r0 = initial_repetitions(terms, t, epsilon)
    if len(terms) <= 1:
        # a single exactly exponentiated term has no splitting error
        r0 = 1
    if not certify or h.dim > DENSE_CAP:
        return FactoredEvolution(h.dim, _slice_factors(terms, t / r0, order), r0,
                                 order, t, len(terms), epsilon)

    exact = dense_evolution(h, t)
    probes = 0

    def attempt(r, tol=SEARCH_TOL):
        nonlocal probes
        probes += 1
        f = FactoredEvolution(h.dim, _slice_factors(terms, t / r, order), r,
                              order, t, len(terms), epsilon)
        return f, spectral_norm(f.to_dense() - exact, tol)

    hi = r0
    best, err = attempt(hi)
    while err > epsilon:
        if hi >= R_CAP:
            raise TrotterCapError(
                f"epsilon={epsilon:g} not reached at r={hi} (error {err:.3e})")
        hi = min(2 * hi, R_CAP)
        best, err = attempt(hi)
    # geometric bisection while the bracket spans more than a factor 4, then plain
    lo = 0
    while hi - lo > 1 and probes < MAX_PROBES:
        if lo == 0 or hi > 4 * lo:
            mid = math.isqrt(max(lo, 1) * hi)
        else:
            mid = (lo + hi) // 2
        mid = min(max(mid, lo + 1), hi - 1)
        f, e = attempt(mid)
        if e <= epsilon:
            hi, best = mid, f
        else:
            lo = mid
    best, err = attempt(best.r, CERTIFY_TOL)
    while err > epsilon:
        # the loose search tolerance misjudged a borderline r
        best, err = attempt(best.r + 1, CERTIFY_TOL)
    return best.with_error(err)


def apply_factored(f: FactoredEvolution, v) -> np.ndarray:
    """Apply every factor in sequence; ``v`` may hold states as columns."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[0] != f.dim:
        raise DimensionError(f"state of dimension {v.shape[0]} for evolution of dimension {f.dim}")
    out = v
    for _ in range(f.r):
        for factor in f.slice_factors:
            out = factor @ out
    return out


def measured_error(f: FactoredEvolution, h) -> float:
    """``|| product of factors - exp(-i h t) ||`` in spectral norm."""
    return spectral_norm(f.to_dense() - dense_evolution(h, f.target_t))


def save_manifest(f: FactoredEvolution, path, factor_dir=None, extra: dict | None = None) -> dict:
    """Write the slice factors as Matrix Market files and a JSON manifest.

    ``factor_files`` lists one slice in application order; the full sequence
    is that list repeated ``r`` times.  Paths are relative to the manifest.
    """
    path = os.fspath(path)
    base = os.path.dirname(os.path.abspath(path))
    stem = os.path.splitext(os.path.basename(path))[0]
    factor_dir = factor_dir or os.path.join(base, f"{stem}_factors")
    os.makedirs(factor_dir, exist_ok=True)
    names, written = [], {}
    for factor in f.slice_factors:
        key = id(factor)
        if key not in written:
            fp = os.path.join(factor_dir, f"factor_{len(written):04d}.mtx")
            write_matrix_market(factor, fp)
            written[key] = os.path.relpath(fp, base)
        names.append(written[key])
    manifest = {
        "dim": f.dim,
        "t": f.target_t,
        "order": f.order,
        "r": f.r,
        "term_count": f.term_count,
        "epsilon": f.epsilon,
        "certified_error": f.certified_error,
        "factor_files": names,
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def load_manifest(path) -> FactoredEvolution:
    path = os.fspath(path)
    with open(path) as fh:
        m = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    cache: dict[str, SparseMatrix] = {}
    factors = []
    for name in m["factor_files"]:
        if name not in cache:
            cache[name] = read_matrix_market(os.path.join(base, name))
        factors.append(cache[name])
    if any(fac.dim != m["dim"] for fac in factors):
        raise DimensionError(f"{path}: factor dimension does not match manifest dim {m['dim']}")
    return FactoredEvolution(int(m["dim"]), tuple(factors), int(m["r"]), int(m["order"]),
                             float(m["t"]), int(m["term_count"]), m.get("epsilon"),
                             m.get("certified_error"))
