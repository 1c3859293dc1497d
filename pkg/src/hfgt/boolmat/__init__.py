"""Exact sparse Boolean matrix and tensor kernels."""
from .core import BoolMatrix, BoolTensor, DimensionError, ModeError, RealMatrix
from .io import FormatError, read_mtx, read_tensor, write_mtx, write_tensor
from .ops import (
    bool_add,
    bool_elem_mult,
    bool_matmul,
    bool_sub,
    bool_sum,
    hstack,
    int_matmul,
    khatri_rao,
    kron,
    matricize,
    n_mode_product,
    outer_product,
    saturate,
    tensor_transpose,
    tensorize,
    vec,
    vec_inv,
    vec_inv_mode,
    vstack,
)

__all__ = [
    "BoolMatrix", "BoolTensor", "RealMatrix", "DimensionError", "ModeError", "FormatError",
    "bool_add", "bool_sub", "bool_elem_mult", "bool_matmul", "bool_sum", "int_matmul",
    "saturate", "kron", "khatri_rao", "hstack", "vstack", "outer_product", "matricize",
    "tensorize", "vec", "vec_inv", "vec_inv_mode", "n_mode_product", "tensor_transpose",
    "read_mtx", "write_mtx", "read_tensor", "write_tensor",
]
