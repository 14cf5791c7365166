"""Hadamard-coined discrete-time quantum walk on the cycle ``Z/nZ``.

Basis state ``|x, i>`` (site ``x``, coin ``i``) has index ``2 x + i``.  One
step applies a Hadamard to the coin and then shifts coin-0 amplitude one
site left and coin-1 amplitude one site right.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..dilation import compile_dilation
from ..sparse import DimensionError, SparseMatrix


def walk_index(x: int, coin: int, n: int) -> int:
    if coin not in (0, 1):
        raise ValueError(f"coin must be 0 or 1, got {coin}")
    return 2 * (x % n) + coin


def walk_step(n: int) -> SparseMatrix:
    """``Shift @ (I_n kron Hadamard)`` as a ``2n x 2n`` matrix with 2 nonzeros per row and column."""
    if n < 2:
        raise ValueError(f"torus size must be at least 2, got {n}")
    r = 1 / math.sqrt(2)
    rows, cols, amps = [], [], []
    for x in range(n):
        left, right = walk_index(x - 1, 0, n), walk_index(x + 1, 1, n)
        # column |x,0> -> (|x-1,0> + |x+1,1>)/sqrt2, column |x,1> -> (|x-1,0> - |x+1,1>)/sqrt2
        rows += [left, right, left, right]
        cols += [2 * x, 2 * x, 2 * x + 1, 2 * x + 1]
        amps += [r, r, r, -r]
    return SparseMatrix(2 * n, rows, cols, amps)


def site_distribution(v) -> np.ndarray:
    """Probability of each site, summed over the coin."""
    p = np.abs(np.asarray(v)) ** 2
    return p.reshape(-1, 2).sum(axis=1)


def start_state(n: int, x: int = 0, coin: int = 0) -> np.ndarray:
    v = np.zeros(2 * n, dtype=np.complex128)
    v[walk_index(x, coin, n)] = 1.0
    return v


@dataclass(frozen=True)
class WalkResult:
    state: np.ndarray
    distribution: np.ndarray


def walk_run(n: int, v0, steps: int, method: str = "direct", epsilon: float = 1e-4,
             order: int = 2) -> WalkResult:
    """Evolve ``v0`` for ``steps`` walk steps, directly or through the dilation circuit."""
    v = np.asarray(v0, dtype=np.complex128)
    if v.shape != (2 * n,):
        raise DimensionError(f"state of shape {v.shape} for a walk on {n} sites")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    u = walk_step(n)
    if method == "direct":
        apply = u.__matmul__
    elif method == "dilation":
        apply = compile_dilation(u, "trotter", epsilon, order).apply
    else:
        raise ValueError(f"unknown method {method!r}; expected 'direct' or 'dilation'")
    for _ in range(steps):
        v = apply(v)
    return WalkResult(v, site_distribution(v))


def load_walk_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    try:
        n, steps = int(cfg["n"]), int(cfg["steps"])
        start = cfg.get("start", {})
        x, coin = int(start.get("x", 0)), int(start.get("coin", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed walk config ({exc})") from None
    return {"n": n, "steps": steps, "x": x, "coin": coin}
