"""Hetero-functional incidence tensors and the adjacency they induce.

Tensor axes are (operand, buffer, capability) for the third-order forms and
(operand, buffer, process, resource) for the fourth-order forms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjacency import HfgtGraph
from .boolmat import (
    BoolMatrix,
    BoolTensor,
    DimensionError,
    bool_elem_mult,
    bool_matmul,
    bool_sum,
    hstack,
    int_matmul,
    kron,
    matricize,
    outer_product,
    saturate,
    tensorize,
    vec,
    vec_inv_mode,
    vstack,
)
from .model import SystemModel, check_projector


@dataclass(frozen=True)
class OperandIncidence:
    mu_minus: BoolMatrix
    mu_plus: BoolMatrix
    gamma_minus: BoolMatrix
    gamma_plus: BoolMatrix
    minus: BoolMatrix
    plus: BoolMatrix


def refine_incidence(M_gamma: BoolMatrix, n_Peta: int) -> BoolMatrix:
    """Replicate each holding column once per transportation process."""
    return kron(M_gamma, BoolMatrix.ones((1, n_Peta)))


def assemble_MLP(mu_minus, mu_plus, gamma_minus, gamma_plus, n_Peta: int) -> OperandIncidence:
    for a, b in ((mu_minus, mu_plus), (gamma_minus, gamma_plus), (mu_minus, gamma_minus)):
        if a.n_rows != b.n_rows:
            raise DimensionError("operand counts differ between incidence blocks")
    if mu_minus.shape != mu_plus.shape or gamma_minus.shape != gamma_plus.shape:
        raise DimensionError("negative and positive incidence blocks differ in shape")
    return OperandIncidence(
        mu_minus, mu_plus, gamma_minus, gamma_plus,
        minus=hstack([mu_minus, refine_incidence(gamma_minus, n_Peta)]),
        plus=hstack([mu_plus, refine_incidence(gamma_plus, n_Peta)]),
    )


def build_MLP(model: SystemModel) -> OperandIncidence:
    return assemble_MLP(model.M_LPmu_minus, model.M_LPmu_plus,
                        model.M_LPgamma_minus, model.M_LPgamma_plus, model.n_Peta)


def _build_X(model: SystemModel, i: int, y: int, sign: str) -> BoolMatrix:
    if not 0 <= i < model.n_L:
        raise IndexError(f"operand index {i} out of range")
    if not 0 <= y < model.n_BS:
        raise IndexError(f"buffer index {y} out of range")
    M_mu = model.M_LPmu_minus if sign == "-" else model.M_LPmu_plus
    M_gamma = model.M_LPgamma_minus if sign == "-" else model.M_LPgamma_plus
    e_i = BoolMatrix.basis(i, model.n_L)

    if y < model.n_M:
        top = bool_matmul(bool_matmul(M_mu.T, e_i), BoolMatrix.basis(y, model.n_M).T)
        top = hstack([top, BoolMatrix((model.n_Pmu, model.n_R - model.n_M))])
    else:
        # independent buffers host no transformation
        top = BoolMatrix((model.n_Pmu, model.n_R))

    e_y, ones = BoolMatrix.basis(y, model.n_BS), BoolMatrix.ones_vector(model.n_BS)
    ends = kron(e_y, ones) if sign == "-" else kron(ones, e_y)
    bottom = kron(kron(bool_matmul(M_gamma.T, e_i), ends), BoolMatrix.ones((1, model.n_R)))
    return vstack([top, bottom])


def build_X_minus(i: int, y1: int, model: SystemModel) -> BoolMatrix:
    """Processes (at any resource) that withdraw operand `i` and start at buffer `y1`."""
    return _build_X(model, i, y1, "-")


def build_X_plus(i: int, y2: int, model: SystemModel) -> BoolMatrix:
    """Processes (at any resource) that inject operand `i` and end at buffer `y2`."""
    return _build_X(model, i, y2, "+")


@dataclass(frozen=True)
class IncidenceTensors:
    M3_minus: BoolTensor
    M3_plus: BoolTensor
    M3u_minus: BoolTensor
    M3u_plus: BoolTensor
    M4_minus: BoolTensor
    M4_plus: BoolTensor
    M2_minus: BoolMatrix
    M2_plus: BoolMatrix

    def signed(self) -> np.ndarray:
        """Integer tensor M+ - M- over (operand, buffer, capability)."""
        return self.M3_plus.to_dense(np.int64) - self.M3_minus.to_dense(np.int64)


def build_M3(model: SystemModel, A_S: BoolMatrix, P_S: BoolMatrix, projected: bool, sign: str) -> BoolTensor:
    """Third-order incidence tensor for `sign` in {'-', '+'}.

    The projected form sums e_i o e_y o P_S vec(X); the unprojected form
    keeps the full vectorized axis but masks X by A_S, so only existing and
    available capabilities appear.
    """
    if projected and not check_projector(P_S, A_S):
        raise ValueError("projector does not match the system concept")
    n_ax = P_S.n_rows if projected else A_S.n_rows * A_S.n_cols
    terms = [BoolTensor((model.n_L, model.n_BS, n_ax))]
    for i in range(model.n_L):
        e_i = BoolMatrix.basis(i, model.n_L)
        for y in range(model.n_BS):
            X = _build_X(model, i, y, sign)
            col = bool_matmul(P_S, vec(X)) if projected else vec(bool_elem_mult(X, A_S))
            if col.nnz:
                terms.append(outer_product([e_i, BoolMatrix.basis(y, model.n_BS), col]))
    return bool_sum(terms)


def build_M4(M3u: BoolTensor, n_P: int, n_R: int) -> BoolTensor:
    """Split the vectorized capability axis into (process, resource)."""
    return vec_inv_mode(M3u, (n_P, n_R), 2)


def m4_scalar_law(model: SystemModel, A_S: BoolMatrix, sign: str) -> BoolTensor:
    """Fourth-order tensor entry by entry: M(i, y, w, v) = X_iy(w, v) AND A_S(w, v)."""
    coords = []
    for i in range(model.n_L):
        for y in range(model.n_BS):
            masked = bool_elem_mult(_build_X(model, i, y, sign), A_S)
            for w, v in masked.coords():
                coords.append((i, y, w, v))
    dims = (model.n_L, model.n_BS, model.n_P, model.n_R)
    return BoolTensor(dims, np.array(coords, dtype=np.int64).reshape(-1, 4))


def matricize_M(M3: BoolTensor) -> BoolMatrix:
    """(operand, buffer) rows by capability columns; operand varies fastest."""
    return matricize(M3, [0, 1], [2])


def build_incidence(model: SystemModel) -> IncidenceTensors:
    A_S, P_S = model.A_S, model.capabilities.projector
    m3m = build_M3(model, A_S, P_S, True, "-")
    m3p = build_M3(model, A_S, P_S, True, "+")
    m3um = build_M3(model, A_S, P_S, False, "-")
    m3up = build_M3(model, A_S, P_S, False, "+")
    return IncidenceTensors(
        M3_minus=m3m, M3_plus=m3p, M3u_minus=m3um, M3u_plus=m3up,
        M4_minus=build_M4(m3um, model.n_P, model.n_R),
        M4_plus=build_M4(m3up, model.n_P, model.n_R),
        M2_minus=matricize_M(m3m), M2_plus=matricize_M(m3p),
    )


def adjacency_from_incidence(M2_plus: BoolMatrix, M2_minus: BoolMatrix, semantics: str = "boolean") -> BoolMatrix:
    """A = M+^T M-, as a Boolean product or as a saturated integer product."""
    if M2_plus.shape != M2_minus.shape:
        raise DimensionError(f"incidence shapes differ: {M2_plus.shape} vs {M2_minus.shape}")
    if semantics == "boolean":
        return bool_matmul(M2_plus.T, M2_minus)
    if semantics == "real":
        return saturate(int_matmul(M2_plus.T, M2_minus))
    raise ValueError(f"unknown semantics {semantics!r}")


def dual_adjacency(M2_minus: BoolMatrix, M2_plus: BoolMatrix, n_BS: int, n_L: int) -> BoolTensor:
    """Buffer/operand tensor D(y1, y2, i1, i2): some capability pulls i1 at y1 and injects i2 at y2."""
    if M2_minus.shape != M2_plus.shape:
        raise DimensionError(f"incidence shapes differ: {M2_minus.shape} vs {M2_plus.shape}")
    if M2_minus.n_rows != n_BS * n_L:
        raise DimensionError(f"{M2_minus.n_rows} rows != n_BS * n_L = {n_BS * n_L}")
    D = bool_matmul(M2_minus, M2_plus.T)
    return tensorize(D, (n_BS, n_BS, n_L, n_L), [2, 0], [3, 1])


def graph_incidence(model: SystemModel, tensors: IncidenceTensors | None = None) -> HfgtGraph:
    t = tensors or build_incidence(model)
    A_proj = adjacency_from_incidence(t.M2_plus, t.M2_minus)
    A_full = adjacency_from_incidence(matricize_M(t.M3u_plus), matricize_M(t.M3u_minus))
    return HfgtGraph(model.capabilities, A_full, A_proj, "incidence")
