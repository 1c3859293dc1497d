import numpy as np
import pytest

from hfgt.adjacency import graph_tensor
from hfgt.boolmat import BoolMatrix, bool_sub, bool_sum
from hfgt.fixtures import pump_model, toy_water_model, two_subsystem_model
from hfgt.incidence import build_incidence, build_MLP
from hfgt.layers import (
    PartitionError,
    decode_operand_set,
    encode_operand_set,
    enumerate_layers,
    layer_incidence_and_adjacency,
    layer_projector,
    layer_selector,
    restrict,
)
from hfgt.synth import random_model


def with_adjacency(model, scheme="input", custom=None):
    s = enumerate_layers(model, scheme, custom)
    t = build_incidence(model)
    for layer in s.layers:
        layer_incidence_and_adjacency(layer, t.M3u_minus, t.M3u_plus)
    return s


def test_toy_single_layer():
    m = toy_water_model()
    s = with_adjacency(m)
    assert len(s.layers) == 1
    layer = s.layers[0]
    assert layer.lambda_v == (1,) and layer.lambda_D == 2
    assert layer.projector == m.capabilities.projector
    assert layer.adjacency == graph_tensor(m).A_rho_proj


def test_two_subsystems_two_layers():
    m = two_subsystem_model()
    s = with_adjacency(m)
    assert [layer.lambda_v for layer in s.layers] == [(1, 0), (0, 1)]
    A = graph_tensor(m).A_rho_proj.to_dense()
    groups = [np.searchsorted(m.capabilities.chi, layer.capabilities) for layer in s.layers]
    assert A[np.ix_(groups[0], groups[1])].sum() == 0 and A[np.ix_(groups[1], groups[0])].sum() == 0
    for layer, idx in zip(s.layers, groups):
        assert np.array_equal(layer.adjacency.to_dense(), A[np.ix_(idx, idx)])


def test_pump_gets_its_own_layer():
    m = pump_model()
    s = enumerate_layers(m)
    mixed = [layer for layer in s.layers if layer.lambda_v == (1, 1)]
    assert len(mixed) == 1
    labels = {m.capability_label(int(k)) for k in
              np.searchsorted(m.capabilities.chi, mixed[0].capabilities)}
    assert labels == {("pump_water", "pump")}


def test_selector_examples():
    m = toy_water_model()
    mlp = build_MLP(m)
    sel = layer_selector((1,), mlp.minus, m.n_R)
    assert sel == BoolMatrix.ones((m.n_P, m.n_R))
    two = two_subsystem_model()
    assert layer_selector((1, 1), build_MLP(two).minus, two.n_R).nnz == 0
    mlp2 = build_MLP(two)
    total = bool_sum([layer_selector(v, mlp2.minus, two.n_R) for v in [(1, 0), (0, 1)]])
    assert total == BoolMatrix.ones((two.n_P, two.n_R))


def test_projector_examples():
    m = toy_water_model()
    full = layer_projector(BoolMatrix.ones((m.n_P, m.n_R)), m.A_S)
    assert full == m.capabilities.projector
    empty = layer_projector(BoolMatrix.zeros((m.n_P, m.n_R)), m.A_S)
    assert empty.shape == (0, m.n_P * m.n_R)
    two = two_subsystem_model()
    rows = sum(layer.size for layer in enumerate_layers(two).layers)
    assert rows == len(two.capabilities)


def test_encode_decode_bijection():
    for n in range(1, 5):
        for lam in range(1, 2 ** n + 1):
            assert encode_operand_set(decode_operand_set(lam, n)) == lam
    assert encode_operand_set((1, 0, 1)) == 6
    with pytest.raises(ValueError):
        decode_operand_set(0, 2)


@pytest.mark.parametrize("scheme", ["input", "output"])
def test_partition_and_restriction_random(scheme):
    rng = np.random.default_rng(17)
    for _ in range(60):
        m = random_model(rng)
        s = with_adjacency(m, scheme)
        g = graph_tensor(m)
        chis = np.concatenate([layer.capabilities for layer in s.layers]) if s.layers else np.zeros(0, int)
        assert sorted(chis.tolist()) == m.capabilities.chi.tolist()
        assert len(set(chis.tolist())) == chis.size
        assert len({layer.lambda_D for layer in s.layers}) == len(s.layers)
        union = BoolMatrix.zeros(g.A_rho_proj.shape)
        for layer in s.layers:
            assert layer.adjacency == restrict(g.A_rho, layer.projector)
            idx = np.searchsorted(m.capabilities.chi, layer.capabilities)
            rows, cols = idx[layer.adjacency.rows], idx[layer.adjacency.cols]
            union = bool_sum([union, BoolMatrix(union.shape, rows, cols)])
        assert bool_sub(union, g.A_rho_proj).nnz == 0


def test_custom_scheme():
    m = two_subsystem_model()
    labels = [m.capability_label(k) for k in range(len(m.capabilities))]
    mapping = {lab: ("A" if lab[1] in ("pump_station", "tank", "pipe") else "B") for lab in labels}
    s = with_adjacency(m, "custom", mapping)
    assert [layer.label for layer in s.layers] == ["A", "B"]
    assert sum(layer.size for layer in s.layers) == len(labels)
    assert s.layers[0].lambda_D is None


def test_custom_scheme_must_be_total_and_known():
    m = toy_water_model()
    labels = [m.capability_label(k) for k in range(len(m.capabilities))]
    partial = {lab: "x" for lab in labels[:-1]}
    with pytest.raises(PartitionError):
        enumerate_layers(m, "custom", partial)
    extra = {lab: "x" for lab in labels}
    extra[("ghost", "m1")] = "x"
    with pytest.raises(PartitionError):
        enumerate_layers(m, "custom", extra)
    with pytest.raises(PartitionError):
        enumerate_layers(m, "custom", None)
    with pytest.raises(ValueError):
        enumerate_layers(m, "diagonal")
