"""Text formats: Matrix Market coordinate files and a rank-tagged tensor format.

Both formats are 1-based on disk.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import BoolMatrix, BoolTensor, RealMatrix


class FormatError(ValueError):
    pass


def write_mtx(path, m, comment: str | None = None) -> Path:
    """Write a BoolMatrix (pattern) or RealMatrix (real) in coordinate form."""
    path = Path(path)
    lines = []
    if isinstance(m, BoolMatrix):
        lines.append("%%MatrixMarket matrix coordinate pattern general")
        if comment:
            lines.extend(f"% {c}" for c in comment.splitlines())
        lines.append(f"{m.n_rows} {m.n_cols} {m.nnz}")
        lines.extend(f"{r + 1} {c + 1}" for r, c in zip(m.rows.tolist(), m.cols.tolist()))
    elif isinstance(m, RealMatrix):
        lines.append("%%MatrixMarket matrix coordinate real general")
        if comment:
            lines.extend(f"% {c}" for c in comment.splitlines())
        lines.append(f"{m.n_rows} {m.n_cols} {len(m.values)}")
        lines.extend(f"{r + 1} {c + 1} {v!r}" for r, c, v in zip(m.rows, m.cols, m.values))
    else:
        raise TypeError(f"cannot write {type(m).__name__} as Matrix Market")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_mtx(path):
    """Read a coordinate Matrix Market file written by :func:`write_mtx` or other tools."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].lower().startswith("%%matrixmarket"):
        raise FormatError(f"{path}: missing MatrixMarket banner")
    banner = text[0].lower().split()
    if len(banner) < 5 or banner[1] != "matrix" or banner[2] != "coordinate":
        raise FormatError(f"{path}: only 'matrix coordinate' files are supported")
    field, symmetry = banner[3], banner[4]
    if symmetry != "general":
        raise FormatError(f"{path}: symmetry {symmetry!r} not supported")
    body = [ln for ln in text[1:] if ln.strip() and not ln.startswith("%")]
    n_rows, n_cols, nnz = (int(x) for x in body[0].split())
    entries = [ln.split() for ln in body[1:]]
    if len(entries) != nnz:
        raise FormatError(f"{path}: header says {nnz} entries, found {len(entries)}")
    rows = np.array([int(e[0]) - 1 for e in entries], dtype=np.int64)
    cols = np.array([int(e[1]) - 1 for e in entries], dtype=np.int64)
    if field == "pattern":
        return BoolMatrix((n_rows, n_cols), rows, cols)
    vals = np.array([float(e[2]) for e in entries])
    dense = np.zeros((n_rows, n_cols))
    dense[rows, cols] = vals
    return RealMatrix.from_dense(dense)


def write_tensor(path, t: BoolTensor, comment: str | None = None) -> Path:
    """Write a tensor as ``dims: p1 .. pn`` followed by one 1-based tuple per line."""
    path = Path(path)
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append("dims: " + " ".join(str(d) for d in t.dims))
    lines.extend(" ".join(str(i + 1) for i in row) for row in t.coords.tolist())
    path.write_text("\n".join(lines) + "\n")
    return path


def read_tensor(path) -> BoolTensor:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("dims:"):
        raise FormatError(f"{path}: first line must be 'dims: p1 ... pn'")
    dims = [int(x) for x in lines[0][len("dims:"):].split()]
    coords = []
    for n, ln in enumerate(lines[1:], start=2):
        tup = [int(x) - 1 for x in ln.split()]
        if len(tup) != len(dims):
            raise FormatError(f"{path}:{n}: expected {len(dims)} indices, got {len(tup)}")
        coords.append(tup)
    return BoolTensor(dims, np.array(coords, dtype=np.int64).reshape(-1, len(dims)))
