"""File formats: Matrix Market (coordinate, complex general) and JSON state vectors."""
from __future__ import annotations

import json
import os

import numpy as np

from .sparse import SparseMatrix

HEADER = "%%MatrixMarket matrix coordinate complex general"


class FormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    x = float(x)
    # integral values print without the trailing ".0"; both forms parse back exactly
    if x.is_integer() and abs(x) < 2 ** 53:
        return str(int(x))
    return repr(x)


def write_matrix_market(m: SparseMatrix, path: str | os.PathLike) -> None:
    """Write ``m`` with 1-based indices, entries sorted by ``(row, col)``.

    Values use ``repr`` which round-trips doubles exactly.
    """
    lines = [HEADER, f"{m.dim} {m.dim} {m.nnz}"]
    for r, c, a in m.entries():
        lines.append(f"{r + 1} {c + 1} {_fmt(a.real)} {_fmt(a.imag)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix_market(path: str | os.PathLike) -> SparseMatrix:
    with open(path) as fh:
        text = fh.read()
    return parse_matrix_market(text, source=str(path))


def parse_matrix_market(text: str, source: str = "<string>") -> SparseMatrix:
    lines = text.splitlines()
    if not lines:
        raise FormatError(f"{source}: empty file")
    head = lines[0].split()
    if (len(head) != 5 or head[0].lower() != "%%matrixmarket"
            or head[1].lower() != "matrix" or head[2].lower() != "coordinate"):
        raise FormatError(f"{source}: unrecognized header {lines[0]!r}")
    field, symmetry = head[3].lower(), head[4].lower()
    if field not in ("complex", "real", "integer"):
        raise FormatError(f"{source}: unsupported field {field!r}")
    if symmetry != "general":
        raise FormatError(f"{source}: unsupported symmetry {symmetry!r}")

    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise FormatError(f"{source}: missing size line")
    try:
        nrows, ncols, nnz = (int(x) for x in body[0].split())
    except ValueError:
        raise FormatError(f"{source}: malformed size line {body[0]!r}") from None
    if nrows != ncols or nrows < 1:
        raise FormatError(f"{source}: matrix must be square and nonempty, got {nrows}x{ncols}")
    if len(body) - 1 != nnz:
        raise FormatError(f"{source}: expected {nnz} entries, found {len(body) - 1}")

    width = 4 if field == "complex" else 3
    rows, cols, amps, seen = [], [], [], set()
    for lineno, ln in enumerate(body[1:], start=1):
        parts = ln.split()
        if len(parts) != width:
            raise FormatError(f"{source}: entry {lineno} has {len(parts)} fields, expected {width}")
        r, c = int(parts[0]) - 1, int(parts[1]) - 1
        if not (0 <= r < nrows and 0 <= c < ncols):
            raise FormatError(f"{source}: entry {lineno} index ({r + 1}, {c + 1}) out of bounds")
        if (r, c) in seen:
            raise FormatError(f"{source}: duplicate coordinate ({r + 1}, {c + 1})")
        seen.add((r, c))
        im = float(parts[3]) if field == "complex" else 0.0
        rows.append(r)
        cols.append(c)
        amps.append(complex(float(parts[2]), im))
    return SparseMatrix(nrows, rows, cols, amps)


def state_to_json(v) -> dict:
    v = np.asarray(v, dtype=np.complex128)
    return {"dim": int(v.shape[0]), "amps": [[float(a.real), float(a.imag)] for a in v]}


def state_from_json(obj) -> np.ndarray:
    if isinstance(obj, list):
        obj = {"dim": len(obj), "amps": obj}
    try:
        dim, amps = int(obj["dim"]), obj["amps"]
    except (KeyError, TypeError):
        raise FormatError("state JSON needs 'dim' and 'amps' fields") from None
    if len(amps) != dim:
        raise FormatError(f"state JSON declares dim {dim} but has {len(amps)} amplitudes")
    return np.array([complex(re, im) for re, im in amps], dtype=np.complex128)


def read_state(path) -> np.ndarray:
    with open(path) as fh:
        return state_from_json(json.load(fh))


def write_state(v, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_json(v), fh)
        fh.write("\n")
