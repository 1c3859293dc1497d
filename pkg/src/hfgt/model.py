"""Engineering-system model: operands, resources, processes and knowledge bases.

Resources are ordered machines first, then independent buffers, then
transporters, so buffer index ``y`` coincides with resource index ``v`` for
every buffer. The system process list is the transformation processes in
declaration order followed by the refined transportation processes in
(holding, origin, destination) lexicographic order.

Array positions are 0-based. The index-law helpers :func:`transport_index`,
:func:`refined_index` and :func:`decompose_refined` keep the 1-based form
used in the literature so they can be checked against published values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .boolmat import (
    BoolMatrix,
    BoolTensor,
    DimensionError,
    bool_matmul,
    bool_sub,
    hstack,
    khatri_rao,
    matricize,
    n_mode_product,
    tensorize,
    vec,
    vstack,
)


class ValidationError(ValueError):
    """Model violates a structural rule; `code` identifies the rule."""

    def __init__(self, code: str, message: str, location: str | None = None):
        self.code = code
        self.message = message
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"[{code}]{where}: {message}")


# diagnostic codes
E_SCHEMA = "HFGT001"
E_DUPLICATE = "HFGT002"
E_DANGLING = "HFGT003"
E_CONSTRAINT = "HFGT004"
E_INDISTINCT = "HFGT005"
E_ORDER = "HFGT006"
E_SHAPE = "HFGT007"
E_CAPABILITY = "HFGT008"
E_MULTICOMMODITY = "HFGT009"


class ResourceKind(str, Enum):
    MACHINE = "machine"
    BUFFER = "buffer"
    TRANSPORTER = "transporter"


@dataclass(frozen=True)
class Operand:
    id: str
    name: str = ""


@dataclass(frozen=True)
class Resource:
    id: str
    kind: ResourceKind
    location: Optional[str] = None


@dataclass(frozen=True)
class Process:
    """A transformation or holding process with its operand sets.

    `verb` distinguishes processes acting on the same operand sets in
    different ways (e.g. carrying water by pipe or by truck).
    """

    id: str
    inputs: frozenset
    outputs: frozenset
    verb: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))


# ---------------------------------------------------------------------------
# index laws


def transport_index(y1: int, y2: int, n_buffers: int) -> int:
    """1-based transportation process index for origin `y1`, destination `y2`."""
    if not (1 <= y1 <= n_buffers and 1 <= y2 <= n_buffers):
        raise IndexError(f"buffer indices ({y1}, {y2}) outside 1..{n_buffers}")
    return n_buffers * (y1 - 1) + y2


def refined_index(g: int, y1: int, y2: int, n_buffers: int, n_holding: int | None = None) -> int:
    """1-based refined transportation index for holding process `g`."""
    if g < 1 or (n_holding is not None and g > n_holding):
        raise IndexError(f"holding index {g} out of range")
    return n_buffers * n_buffers * (g - 1) + transport_index(y1, y2, n_buffers)


def decompose_transport(u: int, n_buffers: int) -> tuple[int, int]:
    if not 1 <= u <= n_buffers * n_buffers:
        raise IndexError(f"transport index {u} outside 1..{n_buffers ** 2}")
    y1, y2 = divmod(u - 1, n_buffers)
    return y1 + 1, y2 + 1


def decompose_refined(phi: int, n_buffers: int) -> tuple[int, int, int]:
    """Inverse of :func:`refined_index`: returns 1-based (g, y1, y2)."""
    if phi < 1:
        raise IndexError(f"refined index {phi} < 1")
    g, rest = divmod(phi - 1, n_buffers * n_buffers)
    y1, y2 = decompose_transport(rest + 1, n_buffers)
    return g + 1, y1, y2


# ---------------------------------------------------------------------------
# knowledge base assembly


def assemble_JHbar(J_gamma: BoolMatrix, J_H: BoolMatrix) -> BoolMatrix:
    """Refined transportation knowledge base as the Khatri-Rao product."""
    if J_gamma.n_cols != J_H.n_cols:
        raise DimensionError(f"J_gamma has {J_gamma.n_cols} columns, J_H has {J_H.n_cols}")
    return khatri_rao(J_gamma, J_H)


def assemble_JS(J_M: BoolMatrix, J_Hbar: BoolMatrix) -> BoolMatrix:
    """Stack [[J_M | 0], [J_Hbar]] into the system knowledge base."""
    n_R = J_Hbar.n_cols
    if J_M.n_cols > n_R:
        raise DimensionError(f"J_M has {J_M.n_cols} machine columns but only {n_R} resources")
    top = hstack([J_M, BoolMatrix((J_M.n_rows, n_R - J_M.n_cols))])
    return vstack([top, J_Hbar])


assemble_KS = assemble_JS


def system_concept(J_S: BoolMatrix, K_S: BoolMatrix) -> BoolMatrix:
    return bool_sub(J_S, K_S)


def dof_s(J_S: BoolMatrix, K_S: BoolMatrix) -> int:
    return system_concept(J_S, K_S).nnz


def dof_m(J_M: BoolMatrix, K_M: BoolMatrix) -> int:
    return bool_sub(J_M, K_M).nnz


def dof_h(J_Hbar: BoolMatrix, K_Hbar: BoolMatrix) -> int:
    return bool_sub(J_Hbar, K_Hbar).nnz


def dof_frobenius(J_S: BoolMatrix, K_S: BoolMatrix) -> int:
    """<J_S, NOT K_S>_F evaluated densely; independent of the sparse path."""
    if J_S.shape != K_S.shape:
        raise DimensionError("shape mismatch")
    j = J_S.to_dense(dtype=np.int64)
    kbar = 1 - K_S.to_dense(dtype=np.int64)
    return int(np.trace(j.T @ kbar))


def tensorize_JH(J_H: BoolMatrix, n_buffers: int) -> BoolTensor:
    """Third-order transportation tensor indexed (origin, destination, resource)."""
    if J_H.n_rows != n_buffers * n_buffers:
        raise DimensionError(f"J_H has {J_H.n_rows} rows, expected {n_buffers ** 2}")
    return tensorize(J_H, (n_buffers, n_buffers, J_H.n_cols), [1, 0], [2])


def matricize_JH(T: BoolTensor) -> BoolMatrix:
    return matricize(T, [1, 0], [2])


def tensorize_JHbar(J_Hbar: BoolMatrix, n_holding: int, n_buffers: int) -> BoolTensor:
    """Fourth-order refined transportation tensor indexed (holding, origin, destination, resource)."""
    if J_Hbar.n_rows != n_holding * n_buffers * n_buffers:
        raise DimensionError(f"J_Hbar has {J_Hbar.n_rows} rows, expected {n_holding * n_buffers ** 2}")
    return tensorize(J_Hbar, (n_holding, n_buffers, n_buffers, J_Hbar.n_cols), [2, 1, 0], [3])


def matricize_JHbar(T: BoolTensor) -> BoolMatrix:
    return matricize(T, [2, 1, 0], [3])


def _drop_last_mode(t: BoolTensor) -> BoolTensor:
    assert t.dims[-1] == 1
    return BoolTensor(t.dims[:-1], t.coords[:, :-1])


def formal_graph(JH_tensor: BoolTensor) -> BoolMatrix:
    """Buffer-to-buffer adjacency: OR of the transportation tensor over resources."""
    if JH_tensor.rank != 3 or JH_tensor.dims[0] != JH_tensor.dims[1]:
        raise DimensionError(f"expected dims [n_BS, n_BS, n_R], got {JH_tensor.dims}")
    ones = BoolMatrix.ones_vector(JH_tensor.dims[2])
    return _drop_last_mode(n_mode_product(JH_tensor, ones, 2)).to_matrix()


def multicommodity(JHbar_tensor: BoolTensor, holding_is_operand: bool) -> BoolTensor:
    """Multi-commodity flow tensor (operand, origin, destination).

    Only meaningful when holding processes correspond one-to-one with
    operands; the caller must assert this explicitly.
    """
    if not holding_is_operand:
        raise ValidationError(
            E_MULTICOMMODITY,
            "multi-commodity reconstruction requires holding processes to map 1-to-1 onto operands "
            "(set holding_is_operand)",
        )
    if JHbar_tensor.rank != 4:
        raise DimensionError(f"expected a rank-4 tensor, got rank {JHbar_tensor.rank}")
    ones = BoolMatrix.ones_vector(JHbar_tensor.dims[3])
    return _drop_last_mode(n_mode_product(JHbar_tensor, ones, 3))


# ---------------------------------------------------------------------------
# capabilities


@dataclass(frozen=True)
class CapabilitySet:
    """Capabilities in ascending vectorized order with their projector.

    The vectorized index of capability (w, v) is ``chi = n_P * v + w``.
    """

    n_P: int
    n_R: int
    chi: np.ndarray
    projector: BoolMatrix

    @classmethod
    def from_concept(cls, A_S: BoolMatrix) -> "CapabilitySet":
        n_P, n_R = A_S.shape
        chi = vec(A_S).support().copy()
        chi.setflags(write=False)
        psi = np.arange(chi.size)
        P_S = BoolMatrix((chi.size, n_P * n_R), psi, chi)
        return cls(n_P, n_R, chi, P_S)

    def __len__(self):
        return int(self.chi.size)

    @property
    def w(self) -> np.ndarray:
        return self.chi % self.n_P

    @property
    def v(self) -> np.ndarray:
        return self.chi // self.n_P

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.w.tolist(), self.v.tolist()))

    def index_of(self, w: int, v: int) -> int:
        target = self.n_P * v + w
        pos = int(np.searchsorted(self.chi, target))
        if pos >= self.chi.size or self.chi[pos] != target:
            raise KeyError((w, v))
        return pos


def check_projector(P_S: BoolMatrix, A_S: BoolMatrix) -> bool:
    """True when P_S applied to vec(A_S) is the all-ones vector of the right length."""
    if P_S.n_cols != A_S.n_rows * A_S.n_cols:
        return False
    return bool_matmul(P_S, vec(A_S)) == BoolMatrix.ones_vector(P_S.n_rows)


# ---------------------------------------------------------------------------
# the system model


def _ids(items, what: str):
    seen = set()
    for k, it in enumerate(items):
        if it.id in seen:
            raise ValidationError(E_DUPLICATE, f"duplicate {what} id {it.id!r}", f"{what}[{k}]")
        seen.add(it.id)
    return {it.id: k for k, it in enumerate(items)}


def _leq(K: BoolMatrix, J: BoolMatrix) -> list[tuple[int, int]]:
    return bool_sub(K, J).coords()


@dataclass(frozen=True)
class SystemModel:
    """Validated snapshot of an engineering system.

    Parameters
    ----------
    operands, resources, transformations, holdings
        Ordered element lists. `resources` must be machines, then
        independent buffers, then transporters.
    J_M : BoolMatrix
        Transformation knowledge base, n_Pmu x n_M.
    J_gamma : BoolMatrix
        Holding knowledge base, n_Pgamma x n_R.
    J_H : BoolMatrix
        Transportation knowledge base, n_BS**2 x n_R.
    K_M, K_Hbar : BoolMatrix, optional
        Constraints; default to zero.
    A_P : BoolMatrix, optional
        Functional graph override, n_P x n_P.
    """

    operands: tuple
    resources: tuple
    transformations: tuple
    holdings: tuple
    J_M: BoolMatrix
    J_gamma: BoolMatrix
    J_H: BoolMatrix
    K_M: Optional[BoolMatrix] = None
    K_Hbar: Optional[BoolMatrix] = None
    A_P: Optional[BoolMatrix] = None
    holding_is_operand: bool = False
    name: str = "model"
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for attr in ("operands", "resources", "transformations", "holdings"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if self.K_M is None:
            object.__setattr__(self, "K_M", BoolMatrix(self.J_M.shape))
        if self.K_Hbar is None:
            object.__setattr__(self, "K_Hbar", BoolMatrix((self.n_Pbar, self.n_R)))
        self._validate()

    # sizes -------------------------------------------------------------
    @cached_property
    def n_L(self) -> int:
        return len(self.operands)

    @cached_property
    def n_M(self) -> int:
        return sum(r.kind is ResourceKind.MACHINE for r in self.resources)

    @cached_property
    def n_B(self) -> int:
        return sum(r.kind is ResourceKind.BUFFER for r in self.resources)

    @cached_property
    def n_H(self) -> int:
        return sum(r.kind is ResourceKind.TRANSPORTER for r in self.resources)

    @property
    def n_R(self) -> int:
        return len(self.resources)

    @property
    def n_BS(self) -> int:
        return self.n_M + self.n_B

    @property
    def n_Pmu(self) -> int:
        return len(self.transformations)

    @property
    def n_Pgamma(self) -> int:
        return len(self.holdings)

    @property
    def n_Peta(self) -> int:
        return self.n_BS * self.n_BS

    @property
    def n_Pbar(self) -> int:
        return self.n_Pgamma * self.n_Peta

    @property
    def n_P(self) -> int:
        return self.n_Pmu + self.n_Pbar

    @property
    def buffers(self) -> tuple:
        return self.resources[: self.n_BS]

    # validation --------------------------------------------------------
    def _validate(self):
        op_index = _ids(self.operands, "operand")
        _ids(self.resources, "resource")
        _ids(tuple(self.transformations) + tuple(self.holdings), "process")

        rank = {ResourceKind.MACHINE: 0, ResourceKind.BUFFER: 1, ResourceKind.TRANSPORTER: 2}
        kinds = [rank[ResourceKind(r.kind)] for r in self.resources]
        if kinds != sorted(kinds):
            raise ValidationError(E_ORDER, "resources must be ordered machines, buffers, transporters")

        for group, plist in (("transformation", self.transformations), ("holding", self.holdings)):
            seen = {}
            for k, p in enumerate(plist):
                for op in p.inputs | p.outputs:
                    if op not in op_index:
                        raise ValidationError(E_DANGLING, f"undeclared operand {op!r}", f"{group}[{k}]")
                key = (p.verb, p.inputs, p.outputs)
                if key in seen:
                    raise ValidationError(
                        E_INDISTINCT,
                        f"processes {seen[key]!r} and {p.id!r} have identical operand sets; "
                        "give them distinct verbs",
                        f"{group}[{k}]",
                    )
                seen[key] = p.id

        expected = {
            "J_M": (self.n_Pmu, self.n_M),
            "J_gamma": (self.n_Pgamma, self.n_R),
            "J_H": (self.n_Peta, self.n_R),
            "K_M": (self.n_Pmu, self.n_M),
            "K_Hbar": (self.n_Pbar, self.n_R),
        }
        for attr, shape in expected.items():
            got = getattr(self, attr).shape
            if got != shape:
                raise ValidationError(E_SHAPE, f"{attr} has shape {got}, expected {shape}", attr)
        if self.A_P is not None and self.A_P.shape != (self.n_P, self.n_P):
            raise ValidationError(E_SHAPE, f"A_P has shape {self.A_P.shape}, expected {(self.n_P,) * 2}", "A_P")

        for u, v in self.J_H.coords():
            y1, y2 = divmod(u, self.n_BS)
            r = self.resources[v]
            if v < self.n_BS and not (y1 == y2 == v):
                raise ValidationError(
                    E_CAPABILITY,
                    f"buffer {r.id!r} can only hold operands in place, not move "
                    f"{self.buffers[y1].id!r} -> {self.buffers[y2].id!r}",
                    f"J_H[{u},{v}]",
                )
            if v >= self.n_BS and y1 == y2:
                raise ValidationError(
                    E_CAPABILITY,
                    f"transporter {r.id!r} needs distinct origin and destination",
                    f"J_H[{u},{v}]",
                )

        bad = _leq(self.K_M, self.J_M)
        if bad:
            raise ValidationError(E_CONSTRAINT, f"K_M eliminates nonexistent capabilities {bad[:3]}", "K_M")
        bad = _leq(self.K_Hbar, self.J_Hbar)
        if bad:
            raise ValidationError(E_CONSTRAINT, f"K_Hbar eliminates nonexistent capabilities {bad[:3]}", "K_Hbar")

    # knowledge bases ---------------------------------------------------
    @cached_property
    def J_Hbar(self) -> BoolMatrix:
        return assemble_JHbar(self.J_gamma, self.J_H)

    @cached_property
    def J_S(self) -> BoolMatrix:
        return assemble_JS(self.J_M, self.J_Hbar)

    @cached_property
    def K_S(self) -> BoolMatrix:
        return assemble_KS(self.K_M, self.K_Hbar)

    @cached_property
    def A_S(self) -> BoolMatrix:
        return system_concept(self.J_S, self.K_S)

    @cached_property
    def capabilities(self) -> CapabilitySet:
        return CapabilitySet.from_concept(self.A_S)

    @property
    def dof_s(self) -> int:
        return dof_s(self.J_S, self.K_S)

    @property
    def dof_m(self) -> int:
        return dof_m(self.J_M, self.K_M)

    @property
    def dof_h(self) -> int:
        return dof_h(self.J_Hbar, self.K_Hbar)

    # process bookkeeping ----------------------------------------------
    def decode_process(self, w: int):
        """('transform', j) or ('transport', g, y1, y2) with 0-based indices."""
        if not 0 <= w < self.n_P:
            raise IndexError(w)
        if w < self.n_Pmu:
            return ("transform", w)
        g, y1, y2 = decompose_refined(w - self.n_Pmu + 1, self.n_BS)
        return ("transport", g - 1, y1 - 1, y2 - 1)

    def process_id(self, w: int) -> str:
        kind = self.decode_process(w)
        if kind[0] == "transform":
            return self.transformations[kind[1]].id
        _, g, y1, y2 = kind
        return f"{self.holdings[g].id}:{self.buffers[y1].id}->{self.buffers[y2].id}"

    @cached_property
    def process_ids(self) -> list[str]:
        return [self.process_id(w) for w in range(self.n_P)]

    def process_operands(self, w: int) -> tuple[frozenset, frozenset]:
        kind = self.decode_process(w)
        p = self.transformations[kind[1]] if kind[0] == "transform" else self.holdings[kind[1]]
        return p.inputs, p.outputs

    def capability_label(self, psi: int) -> tuple[str, str]:
        w, v = self.capabilities.pairs()[psi]
        return self.process_ids[w], self.resources[v].id

    # operand incidence inputs -----------------------------------------
    def _incidence(self, plist, attr) -> BoolMatrix:
        idx = {o.id: i for i, o in enumerate(self.operands)}
        rows, cols = [], []
        for k, p in enumerate(plist):
            for op in getattr(p, attr):
                rows.append(idx[op])
                cols.append(k)
        return BoolMatrix((self.n_L, len(plist)), rows, cols)

    @cached_property
    def M_LPmu_minus(self) -> BoolMatrix:
        return self._incidence(self.transformations, "inputs")

    @cached_property
    def M_LPmu_plus(self) -> BoolMatrix:
        return self._incidence(self.transformations, "outputs")

    @cached_property
    def M_LPgamma_minus(self) -> BoolMatrix:
        return self._incidence(self.holdings, "inputs")

    @cached_property
    def M_LPgamma_plus(self) -> BoolMatrix:
        return self._incidence(self.holdings, "outputs")

    # tensors -----------------------------------------------------------
    def JH_tensor(self) -> BoolTensor:
        return tensorize_JH(self.J_H, self.n_BS)

    def JHbar_tensor(self) -> BoolTensor:
        return tensorize_JHbar(self.J_Hbar, self.n_Pgamma, self.n_BS)


def make_model(
    operands: Sequence,
    machines: Sequence = (),
    buffers: Sequence = (),
    transporters: Sequence = (),
    transformations: Sequence = (),
    holdings: Sequence = (),
    J_M=None,
    J_gamma=None,
    J_H=None,
    **kwargs,
) -> SystemModel:
    """Convenience constructor taking id strings and dense/BoolMatrix knowledge bases.

    `transformations` and `holdings` are (id, inputs, outputs[, verb]) tuples.
    """
    ops = [o if isinstance(o, Operand) else Operand(o) for o in operands]
    res = (
        [Resource(m, ResourceKind.MACHINE) for m in machines]
        + [Resource(b, ResourceKind.BUFFER) for b in buffers]
        + [Resource(h, ResourceKind.TRANSPORTER) for h in transporters]
    )
    tps = [p if isinstance(p, Process) else Process(*p) for p in transformations]
    hps = [p if isinstance(p, Process) else Process(*p) for p in holdings]
    n_BS = len(machines) + len(buffers)

    def _bm(x, shape):
        if x is None:
            return BoolMatrix(shape)
        if isinstance(x, BoolMatrix):
            return x
        a = np.asarray(x)
        return BoolMatrix.from_dense(a.reshape(shape) if a.size == 0 else np.atleast_2d(a))

    J_M = _bm(J_M, (len(tps), len(machines)))
    J_gamma = _bm(J_gamma, (len(hps), len(res)))
    J_H = _bm(J_H, (n_BS * n_BS, len(res)))
    for key in ("K_M", "K_Hbar", "A_P"):
        if key in kwargs and kwargs[key] is not None and not isinstance(kwargs[key], BoolMatrix):
            kwargs[key] = BoolMatrix.from_dense(kwargs[key])
    return SystemModel(ops, res, tps, hps, J_M, J_gamma, J_H, **kwargs)
