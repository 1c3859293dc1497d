"""Hetero-functional adjacency matrix: two independent constructions.

The loop path evaluates the five feasibility rules pair by pair; the
tensor path assembles the closed-form feasibility matrices from Kronecker
and outer products. Both index capabilities by ``chi = n_P * v + w``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .boolmat import (
    BoolMatrix,
    DimensionError,
    bool_elem_mult,
    bool_matmul,
    bool_sub,
    bool_sum,
    kron,
    vec,
    vstack,
)
from .model import (
    E_ORDER,
    CapabilitySet,
    ResourceKind,
    SystemModel,
    ValidationError,
    check_projector,
)


class ProjectorMismatch(ValueError):
    pass


def build_Jrho(A_S: BoolMatrix) -> BoolMatrix:
    """All potential capability pairs: vec(A_S) vec(A_S)^T."""
    v = vec(A_S)
    return bool_matmul(v, v.T)


def derive_AP(M_LP_plus: BoolMatrix, M_LP_minus: BoolMatrix) -> BoolMatrix:
    """Functional graph: w1 -> w2 when some output operand of w1 is an input of w2."""
    if M_LP_plus.shape != M_LP_minus.shape:
        raise DimensionError(f"incidence shapes differ: {M_LP_plus.shape} vs {M_LP_minus.shape}")
    return bool_matmul(M_LP_plus.T, M_LP_minus)


def functional_graph(model: SystemModel, A_P: Optional[BoolMatrix] = None) -> BoolMatrix:
    """Explicit argument, then model override, then operand-set derivation."""
    if A_P is not None:
        return A_P
    if model.A_P is not None:
        return model.A_P
    from .incidence import build_MLP

    mlp = build_MLP(model)
    return derive_AP(mlp.plus, mlp.minus)


# ---------------------------------------------------------------------------
# loop path


def _endpoints(model: SystemModel, w: int, v: int):
    """(is_transform, origin buffer, destination buffer) of capability (w, v)."""
    kind = model.decode_process(w)
    if kind[0] == "transform":
        return True, v, v
    _, _g, y1, y2 = kind
    return False, y1, y2


def _spatial_rule(e1, v1, e2, v2) -> bool:
    t1, _o1, d1 = e1
    t2, o2, _d2 = e2
    if t1 and t2:
        return v1 == v2                         # I: same transformation resource
    if t1:
        return o2 == v1                         # II: transport leaves the machine
    if t2:
        return d1 == v2                         # III: transport arrives at the machine
    return d1 == o2                             # IV: transports chain end to start


def feasible_pair(model: SystemModel, A_P: BoolMatrix, w1, v1, w2, v2) -> bool:
    """Evaluate the five sequencing rules for capability (w1,v1) followed by (w2,v2)."""
    e1 = _endpoints(model, w1, v1)
    e2 = _endpoints(model, w2, v2)
    return _spatial_rule(e1, v1, e2, v2) and A_P[w1, w2]   # V: functional succession


def build_Krho_loop(model: SystemModel, A_S: BoolMatrix, A_P: BoolMatrix) -> BoolMatrix:
    """Sequence constraints by exhaustive rule evaluation over existing pairs.

    Pairs outside the support of J_rho are left at zero.
    """
    if A_P is None:
        raise ValueError("A_P is required")
    if A_P.shape != (model.n_P, model.n_P):
        raise DimensionError(f"A_P shape {A_P.shape} != {(model.n_P, model.n_P)}")
    caps = CapabilitySet.from_concept(A_S)
    nodes = [(chi, w, v, _endpoints(model, w, v)) for chi, (w, v) in zip(caps.chi.tolist(), caps.pairs())]
    ap = A_P.to_dense().astype(bool)
    n = model.n_P * model.n_R
    rows, cols = [], []
    for chi1, w1, v1, e1 in nodes:
        for chi2, w2, v2, e2 in nodes:
            if not (_spatial_rule(e1, v1, e2, v2) and ap[w1, w2]):
                rows.append(chi1)
                cols.append(chi2)
    return BoolMatrix((n, n), rows, cols)


# ---------------------------------------------------------------------------
# tensor path


@dataclass(frozen=True)
class ConstraintBundle:
    """Feasibility matrices for the five rule types.

    Types I to IV are stored explicitly; type V is kept as A_P and only
    combined with the others entrywise.
    """

    Kbar_I: BoolMatrix
    Kbar_II: BoolMatrix
    Kbar_III: BoolMatrix
    Kbar_IV: BoolMatrix
    A_P: BoolMatrix
    n_R: int

    @property
    def n_P(self) -> int:
        return self.A_P.n_rows

    def spatial(self) -> BoolMatrix:
        return bool_sum([self.Kbar_I, self.Kbar_II, self.Kbar_III, self.Kbar_IV])

    def Kbar_V(self) -> BoolMatrix:
        """(1 1^T) kron A_P, materialized. Intended for small checks only."""
        return kron(BoolMatrix.ones((self.n_R, self.n_R)), self.A_P)

    def Kbar_rho(self) -> BoolMatrix:
        """(I + II + III + IV) AND V, with V evaluated only on the OR's support."""
        s = self.spatial()
        ap = self.A_P.to_dense().astype(bool)
        keep = ap[s.rows % self.n_P, s.cols % self.n_P]
        return BoolMatrix(s.shape, s.rows[keep], s.cols[keep])

    def Krho_on(self, J_rho: BoolMatrix) -> BoolMatrix:
        """NOT Kbar_rho restricted to the support of `J_rho`."""
        return bool_sub(J_rho, self.Kbar_rho())


def _transform_block(model: SystemModel) -> BoolMatrix:
    """[1^{n_Pmu}; 0^{n_Pbar}]"""
    return vstack([BoolMatrix.ones_vector(model.n_Pmu), BoolMatrix((model.n_Pbar, 1))])


def _transport_block(model: SystemModel, origin=None, destination=None) -> BoolMatrix:
    """[0^{n_Pmu}; 1^{n_Pgamma} kron a kron b] with a/b a basis vector or ones."""
    n = model.n_BS
    a = BoolMatrix.basis(origin, n) if origin is not None else BoolMatrix.ones_vector(n)
    b = BoolMatrix.basis(destination, n) if destination is not None else BoolMatrix.ones_vector(n)
    x = kron(kron(BoolMatrix.ones_vector(model.n_Pgamma), a), b)
    return vstack([BoolMatrix((model.n_Pmu, 1)), x])


def _check_order(model: SystemModel):
    kinds = [r.kind for r in model.resources]
    for v in range(model.n_M):
        if kinds[v] is not ResourceKind.MACHINE:
            raise ValidationError(E_ORDER, "machines must lead the resource list")
    for v in range(model.n_M, model.n_BS):
        if kinds[v] is not ResourceKind.BUFFER:
            raise ValidationError(E_ORDER, "independent buffers must follow machines")


def build_Krho_tensor(model: SystemModel, A_P: BoolMatrix) -> ConstraintBundle:
    """Closed-form feasibility matrices from sums of Kronecker/outer products."""
    _check_order(model)
    n_R, N = model.n_R, model.n_P * model.n_R
    if A_P.shape != (model.n_P, model.n_P):
        raise DimensionError(f"A_P shape {A_P.shape} != {(model.n_P, model.n_P)}")
    ones_R = BoolMatrix.ones_vector(n_R)
    top = _transform_block(model)

    def outer(a, b):
        return bool_matmul(a, b.T)

    zero = BoolMatrix((N, N))
    k1 = [outer(kron(BoolMatrix.basis(m, n_R), top), kron(BoolMatrix.basis(m, n_R), top))
          for m in range(model.n_M)]
    k2 = [outer(kron(BoolMatrix.basis(m, n_R), top), kron(ones_R, _transport_block(model, origin=m)))
          for m in range(model.n_M)]
    k3 = [outer(kron(ones_R, _transport_block(model, destination=m)), kron(BoolMatrix.basis(m, n_R), top))
          for m in range(model.n_M)]
    k4 = [outer(kron(ones_R, _transport_block(model, destination=y)),
                kron(ones_R, _transport_block(model, origin=y)))
          for y in range(model.n_BS)]
    return ConstraintBundle(
        Kbar_I=bool_sum([zero] + k1),
        Kbar_II=bool_sum([zero] + k2),
        Kbar_III=bool_sum([zero] + k3),
        Kbar_IV=bool_sum([zero] + k4),
        A_P=A_P,
        n_R=n_R,
    )


# ---------------------------------------------------------------------------
# assembly and projection


def build_Arho(J_rho: BoolMatrix, K_rho: BoolMatrix) -> BoolMatrix:
    return bool_sub(J_rho, K_rho)


def project(A_rho: BoolMatrix, P_S: BoolMatrix, A_S: Optional[BoolMatrix] = None) -> BoolMatrix:
    """Collapse A_rho onto the capability axis: P_S A_rho P_S^T."""
    if A_S is not None and not check_projector(P_S, A_S):
        raise ProjectorMismatch("projector does not select exactly the capabilities of A_S")
    if P_S.n_cols != A_rho.n_rows:
        raise ProjectorMismatch(f"projector width {P_S.n_cols} != adjacency size {A_rho.n_rows}")
    return bool_matmul(bool_matmul(P_S, A_rho), P_S.T)


def dof_rho(A: BoolMatrix) -> int:
    if A.n_rows != A.n_cols:
        raise DimensionError(f"adjacency must be square, got {A.shape}")
    return A.nnz


@dataclass(frozen=True)
class HfgtGraph:
    """Capabilities as nodes and feasible capability pairs as edges."""

    capabilities: CapabilitySet
    A_rho: BoolMatrix
    A_rho_proj: BoolMatrix
    provenance: str

    @property
    def dof_rho(self) -> int:
        return dof_rho(self.A_rho_proj)


def graph_loop(model: SystemModel, A_P: Optional[BoolMatrix] = None) -> HfgtGraph:
    A_P = functional_graph(model, A_P)
    A_S = model.A_S
    J_rho = build_Jrho(A_S)
    A_rho = build_Arho(J_rho, build_Krho_loop(model, A_S, A_P))
    caps = model.capabilities
    return HfgtGraph(caps, A_rho, project(A_rho, caps.projector, A_S), "loop")


def graph_tensor(model: SystemModel, A_P: Optional[BoolMatrix] = None) -> HfgtGraph:
    A_P = functional_graph(model, A_P)
    J_rho = build_Jrho(model.A_S)
    A_rho = bool_elem_mult(J_rho, build_Krho_tensor(model, A_P).Kbar_rho())
    caps = model.capabilities
    return HfgtGraph(caps, A_rho, project(A_rho, caps.projector, model.A_S), "tensor")
