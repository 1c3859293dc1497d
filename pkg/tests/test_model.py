import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfgt.boolmat import BoolMatrix, bool_elem_mult, bool_matmul, kron, matricize, vec
from hfgt.fixtures import lucidity_counterexample, toy_water_model, two_subsystem_model
from hfgt.model import (
    E_CAPABILITY,
    E_CONSTRAINT,
    E_DANGLING,
    E_DUPLICATE,
    E_INDISTINCT,
    E_MULTICOMMODITY,
    E_ORDER,
    E_SHAPE,
    Process,
    Resource,
    ResourceKind,
    SystemModel,
    ValidationError,
    assemble_JHbar,
    assemble_JS,
    check_projector,
    decompose_refined,
    decompose_transport,
    dof_frobenius,
    dof_s,
    formal_graph,
    make_model,
    matricize_JH,
    matricize_JHbar,
    multicommodity,
    refined_index,
    system_concept,
    tensorize_JH,
    tensorize_JHbar,
    transport_index,
)
from hfgt.synth import random_model


def M(rows):
    return BoolMatrix.from_dense(rows)


def models(n, seed=0, **kw):
    rng = np.random.default_rng(seed)
    return [random_model(rng, **kw) for _ in range(n)]


# -- index laws ------------------------------------------------------------------


def test_transport_index_examples():
    assert transport_index(1, 1, 2) == 1
    assert transport_index(1, 2, 2) == 2
    assert transport_index(2, 3, 3) == 6


def test_refined_index_examples():
    assert refined_index(1, 1, 1, 2) == 1
    assert refined_index(2, 1, 2, 2) == 6


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_index_bijections(n):
    us = [transport_index(a, b, n) for a in range(1, n + 1) for b in range(1, n + 1)]
    assert sorted(us) == list(range(1, n * n + 1))
    for u in us:
        assert transport_index(*decompose_transport(u, n), n) == u
    for g, a, b in itertools.product(range(1, 4), range(1, n + 1), range(1, n + 1)):
        phi = refined_index(g, a, b, n)
        assert phi == n * n * (g - 1) + transport_index(a, b, n)
        assert decompose_refined(phi, n) == (g, a, b)


def test_index_out_of_range():
    with pytest.raises((IndexError, ValueError)):
        transport_index(0, 1, 2)
    with pytest.raises((IndexError, ValueError)):
        transport_index(1, 3, 2)


# -- knowledge bases ---------------------------------------------------------------


def test_jhbar_examples():
    JH = M([[1, 0], [0, 1]])
    assert assemble_JHbar(M([[1, 1]]), JH) == JH
    assert assemble_JHbar(M([[0, 0]]), JH).nnz == 0


def test_toy_jhbar_and_js():
    m = toy_water_model()
    # 1-based (1,1), (2,3), (4,2)
    assert m.J_Hbar.shape == (4, 3)
    assert m.J_Hbar.coords() == [(0, 0), (1, 2), (3, 1)]
    assert m.J_S.shape == (5, 3)
    assert m.J_S.coords() == [(0, 0), (1, 0), (2, 2), (4, 1)]


def test_js_block_and_degenerate_cases():
    JHbar = M([[1, 0, 0], [0, 0, 1], [0, 0, 0], [0, 1, 0]])
    JS = assemble_JS(M([[1]]), JHbar)
    assert JS.shape == (5, 3)
    assert JS.to_dense()[0].tolist() == [1, 0, 0]
    assert assemble_JS(BoolMatrix((0, 1)), JHbar) == JHbar


def test_system_concept_cases():
    J = M([[1, 1], [0, 1]])
    assert system_concept(J, BoolMatrix.zeros((2, 2))) == J
    assert system_concept(J, J).nnz == 0


def test_toy_dof_values(toy_expected):
    m = toy_water_model()
    assert (m.dof_s, m.dof_m, m.dof_h) == (toy_expected["DOF_S"], toy_expected["DOF_M"], toy_expected["DOF_H"])
    assert dof_frobenius(m.J_S, m.K_S) == 4


def test_toy_constraint_drops_dof():
    t = toy_water_model()
    K_Hbar = BoolMatrix((4, 3), [1], [2])          # m1 -> b1 by h1
    m = SystemModel(t.operands, t.resources, t.transformations, t.holdings,
                    t.J_M, t.J_gamma, t.J_H, K_Hbar=K_Hbar, holding_is_operand=True)
    assert m.dof_s == 3
    assert dof_s(BoolMatrix.zeros((5, 3)), BoolMatrix.zeros((5, 3))) == 0


def test_knowledge_base_laws_random():
    for m in models(60, seed=1):
        ones_g = BoolMatrix.ones((m.n_Peta, 1))
        ones_h = BoolMatrix.ones((m.n_Pgamma, 1))
        assert m.J_Hbar == bool_elem_mult(kron(m.J_gamma, ones_g), kron(ones_h, m.J_H))
        assert m.dof_s == m.dof_m + m.dof_h == dof_frobenius(m.J_S, m.K_S)
        A = m.A_S.to_dense()
        assert not A[: m.n_Pmu, m.n_M:].any()


# -- tensors and reconstructions -----------------------------------------------------


def test_toy_JH_tensor_entry():
    m = toy_water_model()
    T = m.JH_tensor()
    assert T.dims == (2, 2, 3)
    assert T[0, 1, 2]            # 1-based (1,2,3): m1 -> b1 by h1
    assert matricize_JH(T) == m.J_H
    assert matricize_JHbar(m.JHbar_tensor()) == m.J_Hbar
    assert tensorize_JH(BoolMatrix.zeros((4, 3)), 2).nnz == 0


def test_toy_formal_graph():
    m = toy_water_model()
    assert formal_graph(m.JH_tensor()) == M([[1, 1], [0, 1]])
    assert formal_graph(tensorize_JH(BoolMatrix.zeros((4, 3)), 2)).nnz == 0


def test_formal_graph_matches_or_over_resources():
    for m in models(40, seed=2):
        A = formal_graph(m.JH_tensor()).to_dense()
        d = m.J_H.to_dense()
        for y1, y2 in itertools.product(range(m.n_BS), repeat=2):
            assert A[y1, y2] == int(d[m.n_BS * y1 + y2].any())


def test_single_resource_vectorized_formal_graph():
    rng = np.random.default_rng(4)
    for n in range(1, 5):
        JH = M(rng.random((n * n, 1)) < 0.5)
        A = formal_graph(tensorize_JH(JH, n))
        assert vec(A.T) == bool_matmul(JH, BoolMatrix.ones((1, 1)))


def test_toy_multicommodity():
    m = toy_water_model()
    A = multicommodity(m.JHbar_tensor(), m.holding_is_operand)
    assert A.coords.tolist() == [[0, 0, 0], [0, 0, 1], [0, 1, 1]]


def test_multicommodity_requires_flag():
    m = lucidity_counterexample()
    with pytest.raises(ValidationError) as exc:
        multicommodity(m.JHbar_tensor(), m.holding_is_operand)
    assert exc.value.code == E_MULTICOMMODITY


def test_multicommodity_random_operand_holdings():
    for m in models(30, seed=5, operand_holdings=True):
        A = multicommodity(m.JHbar_tensor(), True).to_dense()
        JHbar = m.J_Hbar.to_dense()
        for g, y1, y2 in itertools.product(range(m.n_Pgamma), range(m.n_BS), range(m.n_BS)):
            row = m.n_BS ** 2 * g + m.n_BS * y1 + y2
            assert A[g, y1, y2] == int(JHbar[row].any())


def test_single_resource_multicommodity_is_tensorized_column():
    JHbar = M([[1], [0], [0], [1]])
    T = tensorize_JHbar(JHbar, 1, 2)
    A = multicommodity(T, True)
    assert A.to_dense()[0].tolist() == [[1, 0], [0, 1]]


# -- capabilities --------------------------------------------------------------------


def test_toy_capability_order(toy_expected):
    m = toy_water_model()
    assert m.capabilities.chi.tolist() == toy_expected["chi"]
    labels = [list(m.capability_label(k)) for k in range(len(m.capabilities))]
    assert labels == toy_expected["capabilities"]


def test_projector_laws_random():
    for m in models(40, seed=6):
        P = m.capabilities.projector
        assert check_projector(P, m.A_S)
        ones = bool_matmul(P, vec(m.A_S))
        assert ones == BoolMatrix.ones((len(m.capabilities), 1))
        PtP = bool_matmul(P.T, P)
        assert (PtP.rows == PtP.cols).all()
        assert PtP.rows.tolist() == vec(m.A_S).rows.tolist()


def test_vectorized_index_convention():
    m = toy_water_model()
    n_P = m.n_P
    for psi, (w, v) in enumerate(m.capabilities.pairs()):
        e = kron(BoolMatrix.basis(v, m.n_R), BoolMatrix.basis(w, n_P))
        assert e.rows.tolist() == [m.capabilities.chi[psi]] == [n_P * v + w]


def test_decode_process_and_ids():
    m = toy_water_model()
    assert m.decode_process(0) == ("transform", 0)
    assert m.decode_process(2) == ("transport", 0, 0, 1)
    assert m.process_ids == ["treat", "carry_water:m1->m1", "carry_water:m1->b1",
                             "carry_water:b1->m1", "carry_water:b1->b1"]


# -- validation ------------------------------------------------------------------------


def _toy_kwargs(**over):
    base = dict(
        operands=["water"], machines=["m1"], buffers=["b1"], transporters=["h1"],
        transformations=[("treat", {"water"}, {"water"})],
        holdings=[("carry_water", {"water"}, {"water"})],
        J_M=[[1]], J_gamma=[[1, 1, 1]], J_H=toy_water_model().J_H,
    )
    base.update(over)
    return base


@pytest.mark.parametrize("over, code", [
    (dict(operands=["water", "water"]), E_DUPLICATE),
    (dict(transformations=[("treat", {"oil"}, {"water"})]), E_DANGLING),
    (dict(K_M=[[1]], J_M=[[0]]), E_CONSTRAINT),
    (dict(holdings=[("a", {"water"}, {"water"}), ("b", {"water"}, {"water"})],
          J_gamma=[[1, 1, 1], [0, 0, 0]]), E_INDISTINCT),
    (dict(J_M=[[1, 1]]), E_SHAPE),
])
def test_validation_codes(over, code):
    with pytest.raises(ValidationError) as exc:
        make_model(**_toy_kwargs(**over))
    assert exc.value.code == code


def test_validation_order_and_capability_rules():
    t = toy_water_model()
    res = (t.resources[2], t.resources[0], t.resources[1])
    with pytest.raises(ValidationError) as exc:
        SystemModel(t.operands, res, t.transformations, t.holdings, t.J_M, t.J_gamma, t.J_H)
    assert exc.value.code == E_ORDER
    JH = BoolMatrix((4, 3), [1], [1])                # buffer b1 moving m1 -> b1
    with pytest.raises(ValidationError) as exc:
        make_model(**_toy_kwargs(J_H=JH))
    assert exc.value.code == E_CAPABILITY
    JH = BoolMatrix((4, 3), [0], [2])                # transporter storing in place
    with pytest.raises(ValidationError) as exc:
        make_model(**_toy_kwargs(J_H=JH))
    assert exc.value.code == E_CAPABILITY


def test_verbs_distinguish_processes():
    m = lucidity_counterexample()
    assert [p.verb for p in m.holdings] == ["pipe", "truck"]


def test_resource_kind_values():
    assert Resource("x", ResourceKind.BUFFER).kind is ResourceKind.BUFFER
    assert Process("p", ["a"], ("b",)).inputs == frozenset({"a"})


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_models_validate(seed):
    m = random_model(np.random.default_rng(seed))
    assert m.J_S.shape == (m.n_P, m.n_R)
    assert m.n_P == m.n_Pmu + m.n_Pgamma * m.n_BS ** 2
    assert matricize(m.JHbar_tensor(), [2, 1, 0], [3]) == m.J_Hbar


def test_two_subsystem_dofs():
    m = two_subsystem_model()
    assert m.dof_m == 2 and m.dof_s == m.dof_m + m.dof_h
