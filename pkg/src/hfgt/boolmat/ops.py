"""Boolean and real operators on sparse matrices and tensors.

Mode arguments are 0-based (numpy axis convention). Linear indexing for
matricization and vectorization is column-major over the permuted extents,
i.e. the permute-then-reshape convention.
"""
from __future__ import annotations

from math import prod
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from .core import BoolMatrix, BoolTensor, DimensionError, ModeError, RealMatrix

Boolean = Union[BoolMatrix, BoolTensor]


# ---------------------------------------------------------------------------
# elementwise


def _linear(x: Boolean) -> np.ndarray:
    if isinstance(x, BoolMatrix):
        return x.linear_index()
    if x.nnz == 0:
        return np.zeros(0, dtype=np.int64)
    return np.ravel_multi_index(tuple(x.coords.T), x.dims)


def _rebuild(like: Boolean, lin: np.ndarray) -> Boolean:
    if isinstance(like, BoolMatrix):
        r, c = np.divmod(lin, max(like.n_cols, 1))
        return BoolMatrix(like.shape, r, c)
    coords = np.stack(np.unravel_index(lin, like.dims), axis=1) if lin.size else None
    return BoolTensor(like.dims, coords)


def _same_shape(a: Boolean, b: Boolean, op: str):
    if type(a) is not type(b):
        raise DimensionError(f"{op}: cannot mix {type(a).__name__} and {type(b).__name__}")
    sa = a.shape if isinstance(a, BoolMatrix) else a.dims
    sb = b.shape if isinstance(b, BoolMatrix) else b.dims
    if sa != sb:
        raise DimensionError(f"{op}: shape mismatch {sa} vs {sb}")


def bool_add(a: Boolean, b: Boolean) -> Boolean:
    """Elementwise OR."""
    _same_shape(a, b, "bool_add")
    return _rebuild(a, np.union1d(_linear(a), _linear(b)))


def bool_sub(a: Boolean, b: Boolean) -> Boolean:
    """Elementwise AND-NOT: ones of `a` not present in `b`."""
    _same_shape(a, b, "bool_sub")
    return _rebuild(a, np.setdiff1d(_linear(a), _linear(b), assume_unique=True))


def bool_elem_mult(a: Boolean, b: Boolean) -> Boolean:
    """Elementwise AND (Hadamard product over {0,1})."""
    _same_shape(a, b, "bool_elem_mult")
    return _rebuild(a, np.intersect1d(_linear(a), _linear(b), assume_unique=True))


def bool_sum(items: Sequence[Boolean]) -> Boolean:
    """OR-reduce a non-empty sequence of equally shaped operands."""
    items = list(items)
    if not items:
        raise ValueError("bool_sum needs at least one operand")
    for other in items[1:]:
        _same_shape(items[0], other, "bool_sum")
    lin = np.unique(np.concatenate([_linear(x) for x in items]))
    return _rebuild(items[0], lin)


# ---------------------------------------------------------------------------
# products


def bool_matmul(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    """Boolean matrix product: C(i,k) = OR_j a(i,j) AND b(j,k)."""
    if a.n_cols != b.n_rows:
        raise DimensionError(f"bool_matmul: inner dimensions {a.shape} x {b.shape}")
    return saturate(a.tocsr() @ b.tocsr())


def int_matmul(a: BoolMatrix, b: BoolMatrix) -> sp.csr_matrix:
    """Integer (real) product of two Boolean matrices, without saturation."""
    if a.n_cols != b.n_rows:
        raise DimensionError(f"int_matmul: inner dimensions {a.shape} x {b.shape}")
    return (a.tocsr() @ b.tocsr()).tocsr()


def saturate(m) -> BoolMatrix:
    """Map every nonzero of a real/integer matrix to one."""
    if isinstance(m, RealMatrix):
        m = m.tocsr()
    if isinstance(m, np.ndarray):
        return BoolMatrix.from_dense(m != 0)
    return BoolMatrix.from_sparse(sp.csr_matrix(m))


def kron(a, b):
    """Kronecker product; C(p*i + k, q*j + l) = a(i, j) * b(k, l) (0-based)."""
    if isinstance(a, BoolMatrix) and isinstance(b, BoolMatrix):
        p, q = b.shape
        rows = (a.rows[:, None] * p + b.rows[None, :]).ravel()
        cols = (a.cols[:, None] * q + b.cols[None, :]).ravel()
        return BoolMatrix((a.n_rows * p, a.n_cols * q), rows, cols)
    if isinstance(a, (BoolMatrix, RealMatrix)) and isinstance(b, (BoolMatrix, RealMatrix)):
        return RealMatrix.from_sparse(sp.kron(a.tocsr(), b.tocsr()))
    raise TypeError("kron expects BoolMatrix or RealMatrix operands")


def khatri_rao(a, b):
    """Column-wise Kronecker product: column j is a[:, j] kron b[:, j]."""
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"khatri_rao: column counts {a.shape[1]} vs {b.shape[1]}")
    m, n = a.shape
    p = b.shape[0]
    if isinstance(a, BoolMatrix) and isinstance(b, BoolMatrix):
        ac, bc = a.tocsr().tocsc(), b.tocsr().tocsc()
        rows, cols = [], []
        for j in range(n):
            ra = ac.indices[ac.indptr[j]:ac.indptr[j + 1]]
            rb = bc.indices[bc.indptr[j]:bc.indptr[j + 1]]
            if ra.size and rb.size:
                r = (ra[:, None] * p + rb[None, :]).ravel()
                rows.append(r)
                cols.append(np.full(r.size, j))
        if not rows:
            return BoolMatrix((m * p, n))
        return BoolMatrix((m * p, n), np.concatenate(rows), np.concatenate(cols))
    ad, bd = a.to_dense().astype(float), b.to_dense().astype(float)
    out = (ad[:, None, :] * bd[None, :, :]).reshape(m * p, n)
    return RealMatrix.from_dense(out)


def hstack(blocks: Sequence[BoolMatrix]) -> BoolMatrix:
    return vstack([b.T for b in blocks]).T


def vstack(blocks: Sequence[BoolMatrix]) -> BoolMatrix:
    n_cols = blocks[0].n_cols
    if any(b.n_cols != n_cols for b in blocks):
        raise DimensionError("vstack: column counts differ")
    offset, rows, cols = 0, [], []
    for b in blocks:
        rows.append(b.rows + offset)
        cols.append(b.cols)
        offset += b.n_rows
    return BoolMatrix((offset, n_cols), np.concatenate(rows), np.concatenate(cols))


def outer_product(vectors: Sequence) -> BoolTensor:
    """Outer product of Boolean vectors: B(i1..in) = prod_k v_k(i_k)."""
    if len(vectors) < 2:
        raise ValueError("outer_product needs at least two vectors")
    supports, dims = [], []
    for v in vectors:
        if isinstance(v, BoolMatrix):
            if v.n_cols != 1:
                raise DimensionError("outer_product expects column vectors")
            supports.append(v.rows)
            dims.append(v.n_rows)
        else:
            v = np.asarray(v).ravel()
            supports.append(np.flatnonzero(v))
            dims.append(v.size)
    if any(s.size == 0 for s in supports):
        return BoolTensor(dims)
    grids = np.meshgrid(*supports, indexing="ij")
    return BoolTensor(dims, np.stack([g.ravel() for g in grids], axis=1))


# ---------------------------------------------------------------------------
# reshaping


def _check_partition(rank: int, row_modes, col_modes):
    row_modes, col_modes = list(row_modes), list(col_modes)
    if sorted(row_modes + col_modes) != list(range(rank)):
        raise ModeError(f"modes {row_modes} | {col_modes} do not partition range({rank})")
    return row_modes, col_modes


def _ravel_f(coords: np.ndarray, dims) -> np.ndarray:
    if not len(dims):
        return np.zeros(coords.shape[0], dtype=np.int64)
    return np.ravel_multi_index(tuple(coords.T), tuple(dims), order="F")


def _unravel_f(lin: np.ndarray, dims) -> np.ndarray:
    if not len(dims):
        return np.zeros((lin.size, 0), dtype=np.int64)
    return np.stack(np.unravel_index(lin, tuple(dims), order="F"), axis=1)


def matricize(t: BoolTensor, row_modes, col_modes) -> BoolMatrix:
    """Unfold `t` into a matrix whose rows index `row_modes` and columns `col_modes`.

    Within each group the first listed mode varies fastest.
    """
    row_modes, col_modes = _check_partition(t.rank, row_modes, col_modes)
    rdims = [t.dims[m] for m in row_modes]
    cdims = [t.dims[m] for m in col_modes]
    shape = (prod(rdims), prod(cdims))
    if t.nnz == 0:
        return BoolMatrix(shape)
    rows = _ravel_f(t.coords[:, row_modes], rdims)
    cols = _ravel_f(t.coords[:, col_modes], cdims)
    return BoolMatrix(shape, rows, cols)


def tensorize(m: BoolMatrix, dims, row_modes, col_modes) -> BoolTensor:
    """Inverse of :func:`matricize` for the same `dims` and mode partition."""
    dims = tuple(int(d) for d in dims)
    row_modes, col_modes = _check_partition(len(dims), row_modes, col_modes)
    rdims = [dims[k] for k in row_modes]
    cdims = [dims[k] for k in col_modes]
    if m.shape != (prod(rdims), prod(cdims)):
        raise DimensionError(f"matrix shape {m.shape} inconsistent with dims {dims}")
    if m.nnz == 0:
        return BoolTensor(dims)
    coords = np.empty((m.nnz, len(dims)), dtype=np.int64)
    coords[:, row_modes] = _unravel_f(m.rows, rdims)
    coords[:, col_modes] = _unravel_f(m.cols, cdims)
    return BoolTensor(dims, coords)


def vec(x: Boolean) -> BoolMatrix:
    """Column-major vectorization into a column vector."""
    if isinstance(x, BoolMatrix):
        x = BoolTensor.from_matrix(x)
    return matricize(x, list(range(x.rank)), [])


def vec_inv(v: BoolMatrix, dims) -> BoolTensor:
    """Fold a column vector back into a tensor with extents `dims`."""
    if v.n_cols != 1:
        raise DimensionError("vec_inv expects a column vector")
    dims = tuple(int(d) for d in dims)
    if v.n_rows != prod(dims):
        raise DimensionError(f"length {v.n_rows} != prod{dims}")
    return tensorize(v, dims, list(range(len(dims))), [])


def vec_inv_mode(t: BoolTensor, dims, mode: int) -> BoolTensor:
    """Split mode `mode` of `t` into the extents `dims` (column-major)."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= mode < t.rank:
        raise ModeError(f"mode {mode} out of range for rank {t.rank}")
    if t.dims[mode] != prod(dims):
        raise DimensionError(f"extent {t.dims[mode]} != prod{dims}")
    new_dims = t.dims[:mode] + dims + t.dims[mode + 1:]
    if t.nnz == 0:
        return BoolTensor(new_dims)
    split = _unravel_f(t.coords[:, mode], dims)
    coords = np.concatenate([t.coords[:, :mode], split, t.coords[:, mode + 1:]], axis=1)
    return BoolTensor(new_dims, coords)


def tensor_transpose(t: BoolTensor) -> BoolTensor:
    """Reverse the order of all modes."""
    return BoolTensor(t.dims[::-1], t.coords[:, ::-1])


def n_mode_product(t: BoolTensor, b, mode: int, semantics: str = "boolean"):
    """Contract mode `mode` of `t` against the rows of matrix `b`.

    With ``semantics="boolean"`` the sum is an OR and a BoolTensor is
    returned; with ``"real"`` a dense ndarray holding the real sums.
    """
    if not 0 <= mode < t.rank:
        raise ModeError(f"mode {mode} out of range for rank {t.rank}")
    b_rows, q = b.shape if not isinstance(b, np.ndarray) else b.shape
    if t.dims[mode] != b_rows:
        raise DimensionError(f"mode extent {t.dims[mode]} != matrix rows {b_rows}")
    new_dims = t.dims[:mode] + (q,) + t.dims[mode + 1:]

    if semantics == "real":
        bd = b if isinstance(b, np.ndarray) else b.to_dense()
        out = np.tensordot(t.to_dense(dtype=float), np.asarray(bd, dtype=float), axes=([mode], [0]))
        return np.moveaxis(out, -1, mode)
    if semantics != "boolean":
        raise ValueError(f"unknown semantics {semantics!r}")
    if isinstance(b, np.ndarray):
        b = BoolMatrix.from_dense(b)
    elif isinstance(b, RealMatrix):
        b = saturate(b)
    if t.nnz == 0 or b.nnz == 0:
        return BoolTensor(new_dims)
    csr = b.tocsr()
    counts = np.diff(csr.indptr)[t.coords[:, mode]]
    keep = counts > 0
    src = t.coords[keep]
    counts = counts[keep]
    if src.shape[0] == 0:
        return BoolTensor(new_dims)
    rep = np.repeat(src, counts, axis=0)
    starts = csr.indptr[src[:, mode]]
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    rep[:, mode] = csr.indices[np.repeat(starts, counts) + offsets]
    return BoolTensor(new_dims, rep)
