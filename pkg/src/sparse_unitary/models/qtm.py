"""Quantum Turing machines truncated to a finite tape window.

A configuration is ``(p, q, s)``: head position ``p`` in ``[-t, t]``, internal
state ``q`` and tape contents ``s`` over cells ``-t .. t``.  The flat index is
mixed radix with the tape as the low-order digits (base ``|alphabet|``,
little endian, cell ``-t`` first) and ``(p + t, q)`` as the high-order digits.

Transitions that would carry the head outside the window are dropped, so the
truncated matrix loses norm on boundary columns.  Running with head start
at 0 for ``s < t`` steps never touches the boundary.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..dilation import compile_dilation
from ..sparse import SparseMatrix

DIRECTIONS = {"L": -1, "R": 1, "S": 0}
NORM_TOL = 1e-10
SIZE_CAP = 10 ** 6
STATE_CAP = 2 ** 24


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class TransitionRule:
    """Amplitude table ``delta[(q, sigma, q2, sigma2, dir)]``.

    ``dir`` is ``"L"`` or ``"R"``, or ``"S"`` when ``allow_stay`` is set.
    Missing keys have amplitude 0.
    """

    states: tuple
    alphabet: tuple
    blank: object
    delta: dict = field(hash=False)
    allow_stay: bool = False

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if len(set(self.states)) != len(self.states) or not self.states:
            raise RuleError("states must be a nonempty list of distinct labels")
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise RuleError("alphabet must be a nonempty list of distinct symbols")
        if self.blank not in self.alphabet:
            raise RuleError(f"blank symbol {self.blank!r} not in alphabet")
        allowed = ("L", "R", "S") if self.allow_stay else ("L", "R")
        for key in self.delta:
            q, sig, q2, sig2, d = key
            if q not in self.states or q2 not in self.states:
                raise RuleError(f"unknown state in transition {key}")
            if sig not in self.alphabet or sig2 not in self.alphabet:
                raise RuleError(f"unknown symbol in transition {key}")
            if d not in allowed:
                raise RuleError(f"direction {d!r} not allowed in transition {key}")

    @classmethod
    def from_json(cls, obj) -> "TransitionRule":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            delta = {}
            for e in obj["delta"]:
                key = (e["q"], e["sigma"], e["q2"], e["sigma2"], e["dir"])
                if key in delta:
                    raise RuleError(f"duplicate transition {key}")
                re, im = e["amp"]
                delta[key] = complex(re, im)
            return cls(obj["states"], obj["alphabet"], obj["blank"], delta,
                       bool(obj.get("allow_stay", False)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, RuleError):
                raise
            raise RuleError(f"malformed transition rule JSON: {exc}") from None

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "alphabet": list(self.alphabet),
            "blank": self.blank,
            "allow_stay": self.allow_stay,
            "delta": [
                {"q": q, "sigma": s, "q2": q2, "sigma2": s2, "dir": d, "amp": [a.real, a.imag]}
                for (q, s, q2, s2, d), a in self.delta.items()
            ],
        }

    def check_normalized(self, tol: float = NORM_TOL) -> None:
        """Raise :class:`RuleError` naming the first ``(q, sigma)`` whose outgoing norm is not 1."""
        norms = {(q, s): 0.0 for q in self.states for s in self.alphabet}
        for (q, s, *_), a in self.delta.items():
            norms[q, s] += abs(a) ** 2
        for (q, s), n2 in norms.items():
            if abs(n2 - 1.0) > tol:
                raise RuleError(f"outgoing amplitudes of (q={q!r}, sigma={s!r}) "
                                f"have squared norm {n2:.12g}, expected 1")

    def _indexed(self):
        qi = {q: k for k, q in enumerate(self.states)}
        si = {s: k for k, s in enumerate(self.alphabet)}
        return [(qi[q], si[s], qi[q2], si[s2], DIRECTIONS[d], complex(a))
                for (q, s, q2, s2, d), a in self.delta.items() if a != 0]


def move_right_rule(states=("q0",), alphabet=(0, 1)) -> TransitionRule:
    delta = {(q, s, q, s, "R"): 1.0 for q in states for s in alphabet}
    return TransitionRule(states, alphabet, alphabet[0], delta)


def hadamard_head_rule(alphabet=(0,)) -> TransitionRule:
    """Two-state head that flips a Hadamard coin each step and never writes.

    ``q0`` is always entered moving left and ``q1`` moving right.
    """
    r = 1 / math.sqrt(2)
    delta = {}
    for s in alphabet:
        delta["q0", s, "q0", s, "L"] = r
        delta["q0", s, "q1", s, "R"] = r
        delta["q1", s, "q0", s, "L"] = r
        delta["q1", s, "q1", s, "R"] = -r
    return TransitionRule(("q0", "q1"), alphabet, alphabet[0], delta)


def random_unidirectional_rule(n_states: int, n_symbols: int, seed: int) -> TransitionRule:
    """Random well-formed rule in which every state is entered from one fixed side.

    Such a machine is unitary exactly when the ``(q, sigma) -> (q2, sigma2)``
    amplitude matrix is, so a Haar-random unitary gives a valid rule.
    """
    rng = np.random.default_rng(seed)
    k = n_states * n_symbols
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / math.sqrt(2)
    qm, rm = np.linalg.qr(z)
    v = qm * (np.diag(rm) / np.abs(np.diag(rm)))
    states = tuple(f"q{i}" for i in range(n_states))
    alphabet = tuple(range(n_symbols))
    enter = rng.choice(["L", "R"], size=n_states)
    delta = {}
    for q in range(n_states):
        for s in range(n_symbols):
            for q2 in range(n_states):
                for s2 in range(n_symbols):
                    a = complex(v[q2 * n_symbols + s2, q * n_symbols + s])
                    delta[states[q], s, states[q2], s2, str(enter[q2])] = a
    return TransitionRule(states, alphabet, 0, delta)


def qtm_dimension(t: int, n_states: int, n_symbols: int) -> int:
    return (2 * t + 1) * n_states * n_symbols ** (2 * t + 1)


class TruncatedQTM:
    """Index codec and transition action for one rule at truncation radius ``t``."""

    def __init__(self, rule: TransitionRule, t: int):
        if t < 0:
            raise ValueError(f"radius must be nonnegative, got {t}")
        self.rule = rule
        self.t = t
        self.n_states = len(rule.states)
        self.n_symbols = len(rule.alphabet)
        self.cells = 2 * t + 1
        self.tape_size = self.n_symbols ** self.cells
        self.dim = qtm_dimension(t, self.n_states, self.n_symbols)
        self._moves = rule._indexed()

    def encode(self, p: int, q, tape) -> int:
        """Flat index of head ``p``, state ``q`` and ``tape`` (symbols for cells ``-t..t``)."""
        if not -self.t <= p <= self.t:
            raise ValueError(f"head position {p} outside [-{self.t}, {self.t}]")
        if len(tape) != self.cells:
            raise ValueError(f"tape must cover {self.cells} cells")
        qi = self.rule.states.index(q)
        code = sum(self.rule.alphabet.index(s) * self.n_symbols ** k for k, s in enumerate(tape))
        return ((p + self.t) * self.n_states + qi) * self.tape_size + code

    def decode(self, index: int) -> tuple[int, object, tuple]:
        if not 0 <= index < self.dim:
            raise IndexError(f"index {index} out of range for dimension {self.dim}")
        head, code = divmod(int(index), self.tape_size)
        pos, qi = divmod(head, self.n_states)
        tape = []
        for _ in range(self.cells):
            code, digit = divmod(code, self.n_symbols)
            tape.append(self.rule.alphabet[digit])
        return pos - self.t, self.rule.states[qi], tuple(tape)

    def initial_index(self, tape=(), state=None) -> int:
        """Head at cell 0 in ``state`` (default: first state); ``tape`` starts at cell 0."""
        tape = tuple(tape)
        if len(tape) > self.t + 1:
            raise ValueError(f"input of length {len(tape)} does not fit in cells 0..{self.t}")
        cells = [self.rule.blank] * self.cells
        for k, sym in enumerate(tape):
            if sym not in self.rule.alphabet:
                raise ValueError(f"input symbol {sym!r} not in alphabet")
            cells[self.t + k] = sym
        return self.encode(0, self.rule.states[0] if state is None else state, cells)

    def _split(self, idx):
        head, code = np.divmod(idx, self.tape_size)
        pos, qi = np.divmod(head, self.n_states)
        return pos - self.t, qi, code

    def act(self, idx: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Apply the truncated matrix to the vector with support ``idx`` and values ``amps``.

        Returns the result in the same ``(indices, values)`` form, indices
        sorted and unique.
        """
        idx = np.asarray(idx, dtype=np.int64)
        amps = np.asarray(amps, dtype=np.complex128)
        pos, qi, code = self._split(idx)
        place = self.n_symbols ** (pos + self.t)
        sym = (code // place) % self.n_symbols
        out_i, out_a = [], []
        for q, s, q2, s2, d, a in self._moves:
            sel = (qi == q) & (sym == s) & (np.abs(pos + d) <= self.t)
            if not sel.any():
                continue
            p2 = pos[sel] + d
            code2 = code[sel] + (s2 - s) * place[sel]
            out_i.append(((p2 + self.t) * self.n_states + q2) * self.tape_size + code2)
            out_a.append(a * amps[sel])
        if not out_i:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.complex128)
        cat_i, cat_a = np.concatenate(out_i), np.concatenate(out_a)
        uniq, inv = np.unique(cat_i, return_inverse=True)
        vals = np.zeros(len(uniq), dtype=np.complex128)
        np.add.at(vals, inv, cat_a)
        return uniq, vals

    def to_sparse(self, cap: int = SIZE_CAP) -> SparseMatrix:
        if self.dim > cap:
            raise ValueError(f"truncated dimension {self.dim} exceeds size cap {cap}")
        cols = np.arange(self.dim, dtype=np.int64)
        pos, qi, code = self._split(cols)
        place = self.n_symbols ** (pos + self.t)
        sym = (code // place) % self.n_symbols
        rows_all, cols_all, amps_all = [], [], []
        for q, s, q2, s2, d, a in self._moves:
            sel = (qi == q) & (sym == s) & (np.abs(pos + d) <= self.t)
            p2 = pos[sel] + d
            rows_all.append(((p2 + self.t) * self.n_states + q2) * self.tape_size
                            + code[sel] + (s2 - s) * place[sel])
            cols_all.append(cols[sel])
            amps_all.append(np.full(int(sel.sum()), a))
        rows = np.concatenate(rows_all) if rows_all else np.zeros(0, dtype=np.int64)
        cc = np.concatenate(cols_all) if cols_all else np.zeros(0, dtype=np.int64)
        aa = np.concatenate(amps_all) if amps_all else np.zeros(0, dtype=np.complex128)
        # distinct (q2, s2, d) may land on the same configuration only when
        # they agree, and the table has unique keys, so coordinates are unique
        return SparseMatrix(self.dim, rows, cc, aa)

    def embed_into(self, idx: np.ndarray, other: "TruncatedQTM") -> tuple[np.ndarray, np.ndarray]:
        """Map configuration indices to the codec of ``other``.

        Returns ``(mapped, ok)``; configurations that do not exist in the
        other window (head outside it, or non-blank tape outside it) have
        ``ok`` false.
        """
        pos, qi, code = self._split(np.asarray(idx, dtype=np.int64))
        blank = self.rule.alphabet.index(self.rule.blank)
        digits = [(code // self.n_symbols ** k) % self.n_symbols for k in range(self.cells)]
        ok = np.abs(pos) <= other.t
        code2 = np.zeros_like(code)
        for k, dig in enumerate(digits):
            cell = k - self.t
            if abs(cell) <= other.t:
                code2 += dig * other.n_symbols ** (cell + other.t)
            else:
                ok &= dig == blank
        for cell in range(-other.t, other.t + 1):
            if abs(cell) > self.t:
                code2 += blank * other.n_symbols ** (cell + other.t)
        mapped = ((np.clip(pos, -other.t, other.t) + other.t) * other.n_states + qi) \
            * other.tape_size + code2
        return mapped, ok


def qtm_truncate(rule: TransitionRule, t: int, cap: int = SIZE_CAP) -> SparseMatrix:
    """Truncated transition matrix on the ``(2t+1) |Q| |Sigma|^(2t+1)`` configurations."""
    if t < 1:
        raise ValueError(f"radius must be at least 1, got {t}")
    return TruncatedQTM(rule, t).to_sparse(cap)


@dataclass(frozen=True)
class QTMValidation:
    interior_unitary: bool
    interior_defect: float
    boundary_defect: float
    probe_t: int


def qtm_validate(rule: TransitionRule, probe_t: int = 2, tol: float = 1e-10) -> QTMValidation:
    """Check normalisation, then orthonormality of the interior columns at radius ``probe_t``.

    Interior columns have ``|p| <= probe_t - 1``; their transitions never
    leave the window, so they must be orthonormal for a unitary machine.
    """
    if probe_t < 1:
        raise ValueError("probe_t must be at least 1")
    rule.check_normalized()
    qtm = TruncatedQTM(rule, probe_t)
    m = qtm.to_sparse().to_scipy().tocsc()
    pos = qtm._split(np.arange(qtm.dim))[0]
    interior = np.flatnonzero(np.abs(pos) <= probe_t - 1)
    boundary = np.flatnonzero(np.abs(pos) == probe_t)

    def defect(cols):
        if len(cols) == 0:
            return 0.0
        sub = m[:, cols]
        g = (sub.conj().T @ sub).toarray()
        return float(np.max(np.abs(g - np.eye(len(cols)))))

    inner = defect(interior)
    return QTMValidation(inner <= tol, inner, defect(boundary), probe_t)


def qtm_step_bound(t: int, cutoff: float = 1e-18) -> float:
    """Per-step truncation error bound ``2 * sum_{n >= t} (pi/2)^n / n!``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = math.pi / 2
    total, n = 0.0, t
    while True:
        term = math.exp(n * math.log(x) - math.lgamma(n + 1))
        total += term
        if term < cutoff and n > x:
            break
        n += 1
    return 2 * total


def qtm_run(rule: TransitionRule, tape=(), state=None, steps: int = 1, t: int | None = None,
            method: str = "direct", epsilon: float = 1e-4, order: int = 2,
            state_cap: int = STATE_CAP) -> np.ndarray:
    """Run ``steps`` transitions from head position 0 and return the radius-``t`` state.

    ``direct`` applies the truncated matrix at radius ``t`` (default
    ``steps + 1``).  ``dilation`` applies the dilation of the radius-``2t``
    truncation ``steps`` times through a certified product formula and maps
    the result back to radius ``t``.  The returned vector is not
    renormalised; its norm deficit is checked against ``steps`` times the
    per-step bound (plus ``steps * epsilon`` for ``dilation``).
    """
    if t is None:
        t = steps + 1
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if steps >= t:
        raise ValueError(f"steps={steps} must be smaller than the radius t={t}")
    qtm = TruncatedQTM(rule, t)
    if qtm.dim > state_cap:
        raise ValueError(f"state dimension {qtm.dim} exceeds cap {state_cap}")
    start = qtm.initial_index(tape, state)
    allowed = steps * qtm_step_bound(t)

    if method == "direct":
        idx, amps = np.array([start]), np.array([1.0 + 0j])
        for _ in range(steps):
            idx, amps = qtm.act(idx, amps)
        out = np.zeros(qtm.dim, dtype=np.complex128)
        out[idx] = amps
    elif method == "dilation":
        big = TruncatedQTM(rule, 2 * t)
        u = big.to_sparse()
        circuit = compile_dilation(u, "trotter", epsilon, order, require_unitary=False,
                                   leak_tol=epsilon + qtm_step_bound(t))
        v = np.zeros(big.dim, dtype=np.complex128)
        v[big.initial_index(tape, state)] = 1.0
        for _ in range(steps):
            v = circuit.apply(v)
        allowed += steps * epsilon
        nz = np.flatnonzero(np.abs(v) > 0)
        mapped, ok = big.embed_into(nz, qtm)
        out = np.zeros(qtm.dim, dtype=np.complex128)
        out[mapped[ok]] = v[nz[ok]]
    else:
        raise ValueError(f"unknown method {method!r}; expected 'direct' or 'dilation'")

    deficit = abs(1.0 - float(np.linalg.norm(out)))
    if deficit > allowed + 1e-12:
        raise RuntimeError(f"norm deviation {deficit:.3e} exceeds truncation budget {allowed:.3e}")
    return out


def shared_support_distance(a: np.ndarray, t_a: int, b: np.ndarray, t_b: int,
                            rule: TransitionRule) -> float:
    """2-norm distance between two runs at radii ``t_a <= t_b`` in the larger codec.

    Amplitude of ``a`` is mapped into the radius-``t_b`` window; anything of
    ``b`` with no counterpart contributes in full.
    """
    small, large = TruncatedQTM(rule, t_a), TruncatedQTM(rule, t_b)
    nz = np.flatnonzero(a)
    mapped, ok = small.embed_into(nz, large)
    if not ok.all():
        raise ValueError("smaller window must embed into the larger one")
    diff = b.copy()
    diff[mapped] -= a[nz]
    return float(np.linalg.norm(diff))

