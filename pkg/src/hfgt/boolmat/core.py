"""Immutable sparse containers for exact {0,1} matrices and tensors.

All storage is 0-based. Coordinates are kept in canonical row-major
(lexicographic) order so that equality and hashing are structural.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class ModeError(ValueError):
    """Row/column modes do not partition the tensor modes."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


class BoolMatrix:
    """Sparse Boolean matrix stored as a sorted set of (row, col) coordinates.

    Parameters
    ----------
    shape : (int, int)
    rows, cols : array_like of int
        0-based coordinates of the entries equal to one. Duplicates are
        merged; order does not matter.
    """

    __slots__ = ("_shape", "_rows", "_cols", "_csr")

    def __init__(self, shape, rows=(), cols=()):
        n_rows, n_cols = (int(shape[0]), int(shape[1]))
        if n_rows < 0 or n_cols < 0:
            raise DimensionError(f"negative shape {shape}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise DimensionError("rows and cols must have equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols:
                raise DimensionError(f"coordinate out of range for shape {(n_rows, n_cols)}")
            lin = np.unique(rows * n_cols + cols)
            rows, cols = np.divmod(lin, n_cols)
        self._shape = (n_rows, n_cols)
        self._rows = _frozen(rows)
        self._cols = _frozen(cols)
        self._csr = None

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, shape) -> "BoolMatrix":
        return cls(shape)

    @classmethod
    def ones(cls, shape) -> "BoolMatrix":
        n, m = shape
        r, c = np.divmod(np.arange(n * m, dtype=np.int64), max(m, 1))
        return cls(shape, r, c)

    @classmethod
    def identity(cls, n: int) -> "BoolMatrix":
        idx = np.arange(n)
        return cls((n, n), idx, idx)

    @classmethod
    def from_dense(cls, a) -> "BoolMatrix":
        a = np.asarray(a)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got ndim={a.ndim}")
        r, c = np.nonzero(a)
        return cls(a.shape, r, c)

    @classmethod
    def from_sparse(cls, m) -> "BoolMatrix":
        coo = sp.coo_matrix(m)
        keep = coo.data != 0
        return cls(coo.shape, coo.row[keep], coo.col[keep])

    @classmethod
    def basis(cls, i: int, n: int) -> "BoolMatrix":
        """Elementary column vector with a one at 0-based position `i`."""
        return cls((n, 1), [i], [0])

    @classmethod
    def ones_vector(cls, n: int) -> "BoolMatrix":
        return cls.ones((n, 1))

    @classmethod
    def from_support(cls, indices: Iterable[int], n: int) -> "BoolMatrix":
        idx = np.fromiter(indices, dtype=np.int64)
        return cls((n, 1), idx, np.zeros_like(idx))

    # accessors ---------------------------------------------------------
    @property
    def shape(self):
        return self._shape

    @property
    def n_rows(self) -> int:
        return self._shape[0]

    @property
    def n_cols(self) -> int:
        return self._shape[1]

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def cols(self) -> np.ndarray:
        return self._cols

    @property
    def nnz(self) -> int:
        return int(self._rows.size)

    def coords(self) -> list[tuple[int, int]]:
        return list(zip(self._rows.tolist(), self._cols.tolist()))

    def linear_index(self) -> np.ndarray:
        """Row-major linear indices of the entries (sorted ascending)."""
        return self._rows * self._shape[1] + self._cols

    def __getitem__(self, key) -> bool:
        i, j = key
        if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
            raise IndexError(key)
        lin = i * self.n_cols + j
        pos = np.searchsorted(self.linear_index(), lin)
        return bool(pos < self.nnz and self.linear_index()[pos] == lin)

    def tocsr(self) -> sp.csr_matrix:
        if self._csr is None:
            data = np.ones(self.nnz, dtype=np.int64)
            self._csr = sp.csr_matrix((data, (self._rows, self._cols)), shape=self._shape)
        return self._csr

    def to_dense(self, dtype=np.int8) -> np.ndarray:
        a = np.zeros(self._shape, dtype=dtype)
        a[self._rows, self._cols] = 1
        return a

    @property
    def T(self) -> "BoolMatrix":
        return BoolMatrix((self.n_cols, self.n_rows), self._cols, self._rows)

    def is_vector(self) -> bool:
        return self.n_cols == 1

    def support(self) -> np.ndarray:
        """Row positions of a column vector's ones."""
        if self.n_cols != 1:
            raise DimensionError("support() needs a column vector")
        return self._rows

    def row_sums(self) -> np.ndarray:
        return np.bincount(self._rows, minlength=self.n_rows)

    def col_sums(self) -> np.ndarray:
        return np.bincount(self._cols, minlength=self.n_cols)

    # equality ----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, BoolMatrix):
            return NotImplemented
        return (
            self._shape == other._shape
            and np.array_equal(self._rows, other._rows)
            and np.array_equal(self._cols, other._cols)
        )

    def __hash__(self):
        return hash((self._shape, self._rows.tobytes(), self._cols.tobytes()))

    def __repr__(self):
        return f"BoolMatrix(shape={self._shape}, nnz={self.nnz})"


class BoolTensor:
    """Sparse Boolean tensor of arbitrary rank.

    `coords` is an (nnz, rank) integer array of 0-based coordinates whose
    value is one; rows are kept lexicographically sorted and unique.
    """

    __slots__ = ("_dims", "_coords")

    def __init__(self, dims: Sequence[int], coords=None):
        dims = tuple(int(d) for d in dims)
        if any(d < 0 for d in dims):
            raise DimensionError(f"negative extent in {dims}")
        n = len(dims)
        if coords is None:
            coords = np.zeros((0, n), dtype=np.int64)
        coords = np.asarray(coords, dtype=np.int64)
        if coords.size == 0:
            coords = coords.reshape(0, n)
        if coords.ndim != 2 or coords.shape[1] != n:
            raise DimensionError(f"coordinate arity must equal rank {n}")
        if coords.shape[0]:
            if (coords < 0).any() or (coords >= np.asarray(dims)).any():
                raise DimensionError(f"coordinate out of range for dims {dims}")
            coords = np.unique(coords, axis=0)
        self._dims = dims
        self._coords = _frozen(coords.reshape(-1, n))

    @classmethod
    def from_dense(cls, a) -> "BoolTensor":
        a = np.asarray(a)
        return cls(a.shape, np.argwhere(a != 0))

    @classmethod
    def from_matrix(cls, m: BoolMatrix) -> "BoolTensor":
        return cls(m.shape, np.stack([m.rows, m.cols], axis=1))

    @property
    def dims(self):
        return self._dims

    @property
    def rank(self) -> int:
        return len(self._dims)

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def nnz(self) -> int:
        return int(self._coords.shape[0])

    def __getitem__(self, key) -> bool:
        key = tuple(int(k) for k in key)
        if len(key) != self.rank:
            raise IndexError(key)
        if not self.nnz:
            return False
        return bool((self._coords == np.asarray(key)).all(axis=1).any())

    def to_dense(self, dtype=np.int8) -> np.ndarray:
        a = np.zeros(self._dims, dtype=dtype)
        if self.nnz:
            a[tuple(self._coords.T)] = 1
        return a

    def to_matrix(self) -> BoolMatrix:
        if self.rank != 2:
            raise DimensionError(f"rank-{self.rank} tensor is not a matrix")
        return BoolMatrix(self._dims, self._coords[:, 0], self._coords[:, 1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoolTensor):
            return NotImplemented
        return self._dims == other._dims and np.array_equal(self._coords, other._coords)

    def __hash__(self):
        return hash((self._dims, self._coords.tobytes()))

    def __repr__(self):
        return f"BoolTensor(dims={self._dims}, nnz={self.nnz})"


@dataclass(frozen=True)
class RealMatrix:
    """Sparse real matrix without stored zeros; used for weighted quantities."""

    n_rows: int
    n_cols: int
    rows: tuple
    cols: tuple
    values: tuple

    @classmethod
    def from_dense(cls, a) -> "RealMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        r, c = np.nonzero(a)
        order = np.lexsort((c, r))
        r, c = r[order], c[order]
        return cls(a.shape[0], a.shape[1], tuple(r.tolist()), tuple(c.tolist()),
                   tuple(a[r, c].tolist()))

    @classmethod
    def from_sparse(cls, m) -> "RealMatrix":
        return cls.from_dense(sp.csr_matrix(m).toarray())

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def tocsr(self) -> sp.csr_matrix:
        return sp.csr_matrix((np.asarray(self.values, dtype=float),
                              (np.asarray(self.rows, dtype=np.int64),
                               np.asarray(self.cols, dtype=np.int64))),
                             shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.tocsr().toarray()
