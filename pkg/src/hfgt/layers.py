"""Layer decomposition of a hetero-functional graph.

Operand-set layers encode their operand set as a bit vector over the
operand list with operand 0 as the least significant bit. The canonical
layer number is ``lambda_D = 1 + int(bits)`` so that it ranges over
1..2**n_L.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .boolmat import (
    BoolMatrix,
    BoolTensor,
    bool_elem_mult,
    bool_matmul,
    matricize,
    n_mode_product,
    vec,
)
from .incidence import build_MLP


class PartitionError(ValueError):
    """A custom layer map is not a total function on the capabilities."""


def encode_operand_set(bits) -> int:
    """Canonical 1-based layer number of an operand bit vector."""
    return 1 + sum(int(b) << i for i, b in enumerate(bits))


def decode_operand_set(lambda_D: int, n_L: int) -> tuple:
    if not 1 <= lambda_D <= 2 ** n_L:
        raise ValueError(f"layer number {lambda_D} outside 1..{2 ** n_L}")
    x = lambda_D - 1
    return tuple((x >> i) & 1 for i in range(n_L))


@dataclass
class Layer:
    index: int
    label: str
    selector: BoolMatrix
    projector: BoolMatrix
    lambda_D: Optional[int] = None
    lambda_v: Optional[tuple] = None
    adjacency: Optional[BoolMatrix] = None
    capabilities: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def size(self) -> int:
        return self.projector.n_rows


@dataclass
class LayerScheme:
    kind: str
    layers: list

    def lookup(self) -> dict:
        """Dense layer index -> canonical layer number."""
        return {layer.index: layer.lambda_D for layer in self.layers}


def layer_selector(lambda_v, M_LP: BoolMatrix, n_R: int) -> BoolMatrix:
    """Select every (process, resource) pair whose process operand column equals `lambda_v`."""
    cols = M_LP.to_dense().T
    target = np.asarray(lambda_v, dtype=cols.dtype)
    hits = np.flatnonzero((cols == target).all(axis=1))
    w = np.repeat(hits, n_R)
    v = np.tile(np.arange(n_R), hits.size)
    return BoolMatrix((M_LP.n_cols, n_R), w, v)


def layer_projector(selector: BoolMatrix, A_S: BoolMatrix) -> BoolMatrix:
    """Basis rows at the vectorized positions selected by the layer that are also capabilities."""
    chi = vec(bool_elem_mult(selector, A_S)).support()
    return BoolMatrix((chi.size, A_S.n_rows * A_S.n_cols), np.arange(chi.size), chi)


def enumerate_layers(model, scheme="input", custom: Optional[Mapping] = None) -> LayerScheme:
    """Build the layers of `model` under an operand-set or custom scheme.

    For ``scheme="custom"``, `custom` maps (process id, resource id) of every
    capability to a layer label.
    """
    A_S = model.A_S
    if scheme in ("input", "output"):
        mlp = build_MLP(model)
        M_LP = mlp.minus if scheme == "input" else mlp.plus
        dense = M_LP.to_dense()
        present = sorted({encode_operand_set(dense[:, w]) for w, _v in model.capabilities.pairs()})
        layers = []
        for k, lam in enumerate(present):
            bits = decode_operand_set(lam, model.n_L)
            sel = layer_selector(bits, M_LP, model.n_R)
            names = [model.operands[i].id for i, b in enumerate(bits) if b]
            layers.append(_finish(Layer(k, "+".join(names) or "(none)", sel,
                                        layer_projector(sel, A_S), lam, bits)))
        return LayerScheme(scheme, layers)
    if scheme == "custom":
        if custom is None:
            raise PartitionError("custom scheme needs a capability -> layer map")
        labels = [model.capability_label(psi) for psi in range(len(model.capabilities))]
        known = set(labels)
        unknown = [k for k in custom if tuple(k) not in known]
        if unknown:
            raise PartitionError(f"map names non-capabilities {unknown[:3]}")
        missing = [k for k in labels if k not in custom]
        if missing:
            raise PartitionError(f"capabilities without a layer {missing[:3]}")
        names = sorted({custom[k] for k in labels})
        layers = []
        for k, name in enumerate(names):
            pairs = [pair for pair, lab in zip(model.capabilities.pairs(), labels) if custom[lab] == name]
            w = [p[0] for p in pairs]
            v = [p[1] for p in pairs]
            sel = BoolMatrix((model.n_P, model.n_R), w, v)
            layers.append(_finish(Layer(k, str(name), sel, layer_projector(sel, A_S))))
        return LayerScheme("custom", layers)
    raise ValueError(f"unknown layer scheme {scheme!r}")


def _finish(layer: Layer) -> Layer:
    layer.capabilities = layer.projector.cols.copy()
    return layer


def layer_incidence(M3u: BoolTensor, projector: BoolMatrix) -> BoolTensor:
    """Restrict an unprojected incidence tensor to a layer's capabilities."""
    return n_mode_product(M3u, projector.T, 2)


def layer_incidence_and_adjacency(layer: Layer, M3u_minus: BoolTensor, M3u_plus: BoolTensor):
    """Per-layer incidence tensors and the layer adjacency M+^T M-."""
    m_minus = layer_incidence(M3u_minus, layer.projector)
    m_plus = layer_incidence(M3u_plus, layer.projector)
    A = bool_matmul(matricize(m_plus, [0, 1], [2]).T, matricize(m_minus, [0, 1], [2]))
    layer.adjacency = A
    return m_minus, m_plus, A


def restrict(A_rho: BoolMatrix, projector: BoolMatrix) -> BoolMatrix:
    """P_lambda A_rho P_lambda^T on the unprojected adjacency."""
    return bool_matmul(bool_matmul(projector, A_rho), projector.T)


def layer_positions(layer: Layer, capabilities) -> np.ndarray:
    """Positions (psi) of the layer's capabilities within the full capability set."""
    return np.searchsorted(capabilities.chi, layer.capabilities)
