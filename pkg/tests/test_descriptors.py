import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfgt.incidence import graph_incidence
from hfgt.boolmat import BoolMatrix, DimensionError
from hfgt.descriptors import (
    ConvergenceError,
    capability_dsm,
    closeness,
    clustering_directed,
    degree,
    eigenvector_centrality,
    katz_centrality,
    modularity,
    spectral_radius,
)
from hfgt.fixtures import toy_water_model, two_subsystem_model
from hfgt.layers import enumerate_layers
from hfgt.synth import random_digraph, random_model

TOL = 1e-8


def floyd_warshall(a):
    n = a.shape[0]
    d = np.where(a > 0, 1.0, np.inf)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def closeness_oracle(a, variant):
    d = floyd_warshall(a)
    out = np.zeros(a.shape[0])
    for i in range(a.shape[0]):
        reach = [d[i, j] for j in range(a.shape[0]) if j != i and np.isfinite(d[i, j])]
        if reach:
            out[i] = sum(1 / x for x in reach) if variant == "harmonic" else len(reach) / sum(reach)
    return out


def clustering_oracle(a):
    """Enumerate ordered node pairs and count closed patterns directly."""
    a = a.copy()
    np.fill_diagonal(a, 0)
    n = a.shape[0]
    res = {k: np.zeros(n) for k in ("cycle", "middleman", "in", "out", "total")}
    for i in range(n):
        t = dict.fromkeys(res, 0)
        for j, k in itertools.product(range(n), repeat=2):
            if len({i, j, k}) < 3:
                continue
            t["cycle"] += a[i, j] * a[j, k] * a[k, i]
            t["middleman"] += a[i, k] * a[j, i] * a[j, k]
            t["in"] += a[j, i] * a[k, i] * a[j, k]
            t["out"] += a[i, j] * a[i, k] * a[j, k]
            s = a + a.T
            t["total"] += s[i, j] * s[j, k] * s[k, i]
        din, dout = a[:, i].sum(), a[i].sum()
        dbil = sum(a[i, j] * a[j, i] for j in range(n))
        den = {
            "cycle": din * dout - dbil,
            "middleman": din * dout - dbil,
            "in": din * (din - 1),
            "out": dout * (dout - 1),
            "total": 2 * ((din + dout) * (din + dout - 1) - 2 * dbil),
        }
        for key in res:
            res[key][i] = t[key] / den[key] if den[key] > 0 else 0.0
    return res


def dominant_simple(a):
    vals, vecs = np.linalg.eig(a.T)
    order = np.argsort(-np.abs(vals))
    lead = vals[order[0]]
    if abs(lead.imag) > 1e-12 or lead.real <= 0:
        return None
    if len(vals) > 1 and abs(abs(vals[order[1]]) - abs(lead)) < 1e-6:
        return None
    v = np.real(vecs[:, order[0]])
    v = v / np.linalg.norm(v)
    return v if v.sum() >= 0 else -v


def digraphs(n_graphs, seed, max_nodes=8):
    rng = np.random.default_rng(seed)
    for _ in range(n_graphs):
        n = int(rng.integers(1, max_nodes + 1))
        yield random_digraph(rng, n, float(rng.uniform(0.1, 0.7)), self_loops=bool(rng.integers(2)))


# -- examples ----------------------------------------------------------------------


def test_toy_degrees(toy_expected):
    A = graph_incidence(toy_water_model()).A_rho_proj
    r = degree(A)
    assert r.values["in_degree"].tolist() == toy_expected["in_degree"]
    assert r.values["out_degree"].tolist() == toy_expected["out_degree"]


def test_degree_trivial_graphs():
    assert degree(np.zeros((3, 3))).values["in_degree"].tolist() == [0, 0, 0]
    r = degree(np.ones((4, 4)))
    assert r.values["in_degree"].tolist() == r.values["out_degree"].tolist() == [4] * 4
    assert list(degree(np.ones((2, 2)), "in").values) == ["in_degree"]
    with pytest.raises(DimensionError):
        degree(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        degree(np.zeros((2, 2)), "sideways")


def test_closeness_path_and_complete():
    path = np.array([[0, 1], [0, 0]])
    assert closeness(path).values["closeness_harmonic"].tolist() == [1.0, 0.0]
    assert closeness(path, "classic").values["closeness_classic"].tolist() == [1.0, 0.0]
    vals = closeness(np.ones((5, 5))).values["closeness_harmonic"]
    assert np.all(vals == vals[0])
    with pytest.raises(ValueError):
        closeness(path, "radial")


def test_toy_closeness_matches_floyd_warshall():
    a = graph_incidence(toy_water_model()).A_rho_proj.to_dense()
    for variant in ("harmonic", "classic"):
        got = closeness(a, variant).values[f"closeness_{variant}"]
        assert np.allclose(got, closeness_oracle(a, variant), atol=TOL)


def test_star_center_is_largest():
    n = 6
    a = np.zeros((n, n))
    a[0, 1:] = a[1:, 0] = 1
    x = eigenvector_centrality(a).values["eigenvector"]
    assert np.all(x[0] > x[1:])
    k = katz_centrality(a, alpha=0.5 / spectral_radius(a)).values["katz"]
    assert np.all(k[0] > k[1:])


def test_disconnected_equal_components():
    c = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    a = np.block([[c, np.zeros((3, 3))], [np.zeros((3, 3)), c]])
    x = eigenvector_centrality(a).values["eigenvector"]
    assert np.allclose(x[:3], x[0]) and np.allclose(x[3:], x[3])
    k = katz_centrality(a, alpha=0.2).values["katz"]
    assert np.allclose(k, k[0])


def test_three_cycle_and_dag_clustering():
    cyc = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert clustering_directed(cyc).values["clustering_cycle"].tolist() == [1.0, 1.0, 1.0]
    dag = np.triu(np.ones((4, 4)), 1) * (np.eye(4, k=1) > 0)
    for vals in clustering_directed(dag).values.values():
        assert not vals.any()


def test_self_loops_do_not_change_clustering():
    rng = np.random.default_rng(3)
    for a in digraphs(30, 5):
        b = a.copy()
        np.fill_diagonal(b, rng.integers(0, 2, a.shape[0]))
        ca, cb = clustering_directed(a).values, clustering_directed(b).values
        assert all(np.array_equal(ca[k], cb[k]) for k in ca)


def test_modularity_examples():
    two = np.zeros((4, 4))
    two[0, 1] = two[1, 0] = two[2, 3] = two[3, 2] = 1
    assert modularity(two, ["a", "a", "b", "b"]) == pytest.approx(0.5)
    assert modularity(two, ["x"] * 4) == pytest.approx(0.0)
    assert modularity(np.zeros((3, 3)), [0, 1, 2]) == 0.0
    rep = capability_dsm(two, ["x"] * 4)
    assert rep.intra_edges == 4 and rep.inter_edges == 0
    with pytest.raises(ValueError):
        modularity(two, ["a", "a", "b"])
    with pytest.raises(ValueError):
        capability_dsm(two, ["a", None, "b", "b"])


def test_dsm_reorders_by_block():
    a = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    rep = capability_dsm(a, ["b", "a", "b"])
    assert rep.blocks == ["a", "b"] and rep.order.tolist() == [1, 0, 2]
    assert np.array_equal(rep.matrix, a[np.ix_([1, 0, 2], [1, 0, 2])])
    assert rep.block_edges.tolist() == [[0, 1], [1, 1]]


def test_two_subsystem_layers_have_no_inter_edges():
    m = two_subsystem_model()
    A = graph_incidence(m).A_rho_proj
    label = {}
    for layer in enumerate_layers(m).layers:
        for chi in layer.capabilities:
            label[int(chi)] = layer.label
    part = [label[int(c)] for c in m.capabilities.chi]
    rep = capability_dsm(A, part)
    assert rep.inter_edges == 0 and rep.intra_edges == A.nnz


# -- oracle agreement ------------------------------------------------------------------


def test_closeness_oracle_random():
    for a in digraphs(300, 11):
        for variant in ("harmonic", "classic"):
            got = closeness(a, variant).values[f"closeness_{variant}"]
            assert np.allclose(got, closeness_oracle(a, variant), atol=TOL)
        # networkx harmonic counts incoming distances, so reverse the graph
        g = nx.from_numpy_array(a, create_using=nx.DiGraph).reverse()
        hc = nx.harmonic_centrality(g)
        assert np.allclose(closeness(a).values["closeness_harmonic"], [hc[i] for i in range(len(a))], atol=TOL)


def test_clustering_oracle_random():
    for a in digraphs(200, 12):
        got = clustering_directed(a).values
        want = clustering_oracle(a)
        for key in want:
            assert np.allclose(got[f"clustering_{key}"], want[key], atol=1e-12), key
        b = a.copy()
        np.fill_diagonal(b, 0)
        nxc = nx.clustering(nx.from_numpy_array(b, create_using=nx.DiGraph))
        assert np.allclose(got["clustering_total"], [nxc[i] for i in range(len(a))], atol=1e-12)


def test_eigenvector_oracle_random():
    checked = 0
    for a in digraphs(300, 13):
        ref = dominant_simple(a)
        if ref is None:
            continue
        got = eigenvector_centrality(a).values["eigenvector"]
        assert np.allclose(got, ref, atol=TOL)
        assert np.all(got >= -TOL) and np.linalg.norm(got) == pytest.approx(1.0)
        checked += 1
    assert checked >= 50


def test_katz_oracle_random():
    for a in digraphs(300, 14):
        rho = spectral_radius(a)
        alpha = 0.5 / rho if rho > 0 else 0.3
        for direction, B in (("out", a), ("in", a.T)):
            got = katz_centrality(a, alpha=alpha, beta=1.0, direction=direction).values["katz"]
            want = np.linalg.solve(np.eye(len(a)) - alpha * B, np.ones(len(a)))
            assert np.allclose(got, want, atol=TOL, rtol=0)


def test_degree_sums_equal_dof_rho():
    rng = np.random.default_rng(15)
    for _ in range(40):
        g = graph_incidence(random_model(rng))
        r = degree(g.A_rho_proj)
        assert r.values["in_degree"].sum() == r.values["out_degree"].sum() == g.dof_rho


def test_layer_metrics_equal_standalone_subgraph():
    m = two_subsystem_model()
    A = graph_incidence(m).A_rho_proj.to_dense()
    for layer in enumerate_layers(m).layers:
        idx = np.searchsorted(m.capabilities.chi, layer.capabilities)
        sub = A[np.ix_(idx, idx)]
        assert degree(sub).values["out_degree"].tolist() == A[idx][:, idx].sum(axis=1).tolist()
        assert np.allclose(closeness(sub).values["closeness_harmonic"],
                           closeness_oracle(sub, "harmonic"))


# -- errors and invariances -----------------------------------------------------------


def test_katz_invalid_alpha():
    a = np.ones((3, 3))
    for alpha in (0.0, -0.1, 1 / 3, 1.0):
        with pytest.raises(ValueError):
            katz_centrality(a, alpha=alpha)
    with pytest.raises(ValueError):
        katz_centrality(a, alpha=0.1, direction="sideways")


def test_convergence_errors():
    for acyclic in (np.zeros((3, 3)), np.triu(np.ones((4, 4)), 1)):
        with pytest.raises(ConvergenceError, match="no cycles"):
            eigenvector_centrality(acyclic)
    assert eigenvector_centrality(np.eye(2)).values["eigenvector"] == pytest.approx([2 ** -0.5] * 2)
    a = random_digraph(np.random.default_rng(0), 6, 0.5)
    a[0, 1] = a[1, 0] = 1
    with pytest.raises(ConvergenceError):
        eigenvector_centrality(a, tol=1e-16, max_iter=2)
    with pytest.raises(ConvergenceError):
        katz_centrality(a, alpha=0.9 / spectral_radius(a), max_iter=2)


def test_accepts_boolmatrix():
    bm = BoolMatrix.from_dense([[0, 1], [1, 0]])
    assert degree(bm).values["in_degree"].tolist() == [1, 1]
    assert np.allclose(eigenvector_centrality(bm).values["eigenvector"], [2 ** -0.5] * 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 100.0))
def test_eigenvector_scale_invariant(seed, scale):
    rng = np.random.default_rng(seed)
    a = random_digraph(rng, int(rng.integers(2, 8)), 0.5) * rng.uniform(0.5, 2.0, (1, 1))
    if dominant_simple(a) is None:
        return
    x = eigenvector_centrality(a).values["eigenvector"]
    y = eigenvector_centrality(a * scale).values["eigenvector"]
    assert np.allclose(x, y, atol=TOL)
    assert int(np.argmax(x)) == int(np.argmax(y)) or np.isclose(x.max(), y[np.argmax(x)], atol=TOL)
