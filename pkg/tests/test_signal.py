import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ftvgs.signal import (
    TimeVertexSignal,
    TopologyError,
    build_incidence,
    graph_tv_quadratic,
    joint_gradient,
    random_connected_graph,
    smoothness_report,
    temporal_diff,
    temporal_operators,
)

from conftest import random_graph


# --- TimeVertexSignal ------------------------------------------------------

def test_signal_dims_and_copy():
    raw = np.arange(6.0).reshape(2, 3)
    s = TimeVertexSignal(raw)
    raw[0, 0] = 99
    assert s.N == 2 and s.T == 3 and s.data[0, 0] == 0
    with pytest.raises(ValueError):
        s.data[0, 0] = 1.0


@pytest.mark.parametrize("bad", [np.zeros(3), np.zeros((0, 3)), np.array([[1.0, np.nan]]),
                                 np.array([[np.inf]])])
def test_signal_rejects_bad_data(bad):
    with pytest.raises(ValueError):
        TimeVertexSignal(bad)


# --- build_incidence -------------------------------------------------------

def test_two_vertex_path(path2):
    np.testing.assert_array_equal(path2.incidence, [[1], [-1]])
    np.testing.assert_array_equal(path2.laplacian, [[1, -1], [-1, 1]])


def test_three_vertex_path(path3):
    np.testing.assert_array_equal(np.diag(path3.laplacian), [1, 2, 1])
    assert path3.laplacian[0, 1] == path3.laplacian[1, 2] == -1
    assert path3.laplacian[0, 2] == 0


def test_orientation_kept_as_given():
    topo = build_incidence(3, [(2, 0)])
    assert topo.incidence[2, 0] == 1 and topo.incidence[0, 0] == -1


@pytest.mark.parametrize("edges, index", [
    ([(0, 0)], 0),
    ([(0, 1), (1, 3)], 1),
    ([(0, 1), (1, 2), (1, 0)], 2),
    ([(-1, 1)], 0),
])
def test_invalid_edges_report_index(edges, index):
    with pytest.raises(TopologyError) as info:
        build_incidence(3, edges)
    assert info.value.edge_index == index


def test_incidence_columns_and_laplacian_invariants(rng):
    for _ in range(10):
        topo = random_graph(rng, int(rng.integers(2, 15)))
        q = topo.incidence
        assert np.all((q == 1).sum(axis=0) == 1) and np.all((q == -1).sum(axis=0) == 1)
        assert np.all((q != 0).sum(axis=0) == 2)
        lap = topo.laplacian
        np.testing.assert_allclose(lap, lap.T)
        np.testing.assert_allclose(lap @ np.ones(topo.num_vertices), 0, atol=1e-10)
        eig = np.linalg.eigvalsh(lap)
        assert eig.min() >= -1e-10 * np.linalg.norm(lap, 2)


# --- graph TV ---------------------------------------------------------------

def test_tv_examples(path2, path3):
    assert graph_tv_quadratic(path2, [1, 0]) == 1
    assert graph_tv_quadratic(path3, [0, 1, 3]) == pytest.approx(5)
    assert graph_tv_quadratic(path3, [4, 4, 4]) == 0


def test_tv_dimension_mismatch(path3):
    with pytest.raises(ValueError):
        graph_tv_quadratic(path3, [1, 2])


def test_tv_matches_edge_sum_random(rng):
    for _ in range(100):
        topo = random_graph(rng, int(rng.integers(2, 12)))
        x = rng.standard_normal(topo.num_vertices)
        direct = sum((x[u] - x[v]) ** 2 for u, v in topo.edges)
        assert graph_tv_quadratic(topo, x) == pytest.approx(direct, rel=1e-9, abs=1e-12)


# --- temporal operators ------------------------------------------------------

def test_operator_stencils():
    ops = temporal_operators(5)
    assert ops.d1.shape == (5, 4) and ops.d2.shape == (5, 3)
    for j in range(4):
        col = np.zeros(5)
        col[j], col[j + 1] = -1, 1
        np.testing.assert_array_equal(ops.d1[:, j], col)
    for j in range(3):
        col = np.zeros(5)
        col[j:j + 3] = [1, -2, 1]
        np.testing.assert_array_equal(ops.d2[:, j], col)


def test_temporal_diff_examples():
    assert temporal_diff([[1, 2, 3, 4]], 2).tolist() == [[0, 0]]
    assert temporal_diff([[1, 2, 3, 4]], 1).tolist() == [[1, 1, 1]]
    assert temporal_diff([[1, 4, 9]], 2).tolist() == [[2]]


def test_temporal_diff_too_short():
    with pytest.raises(ValueError):
        temporal_diff([[1.0, 2.0]], 2)
    with pytest.raises(ValueError):
        temporal_diff([[1.0]], 1)


def test_temporal_diff_matches_operators(rng):
    x = rng.standard_normal((4, 9))
    ops = temporal_operators(9)
    np.testing.assert_allclose(temporal_diff(x, 1), x @ ops.d1, atol=1e-12)
    np.testing.assert_allclose(temporal_diff(x, 2), x @ ops.d2, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(3, 30),
       st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_second_difference_kills_affine(n, t, a, b):
    x = np.outer(np.linspace(-1, 1, n), a + b * np.arange(t) / t)
    ops = temporal_operators(t)
    assert np.abs(x @ ops.d2).max() <= 1e-12 * max(1.0, np.abs(x).max())
    const = np.full((n, t), a)
    assert np.abs(const @ ops.d1).max() == 0


# --- joint gradient ------------------------------------------------------------

def test_gradient_constant(path3):
    g = joint_gradient(np.full((3, 4), 2.5), path3)
    assert g.max_norm == 0 and not g.graph.any() and not g.time.any()


def test_gradient_examples(path2):
    g = joint_gradient([[0, 1], [0, 1]], path2)
    np.testing.assert_array_equal(g.graph, [[0, 0]])
    np.testing.assert_array_equal(g.time, [[1], [1]])
    assert g.max_norm == 1

    g = joint_gradient([[1, 1], [0, 0]], path2)
    np.testing.assert_array_equal(g.graph, [[1, 1]])
    np.testing.assert_array_equal(g.time, [[0], [0]])
    assert g.max_norm == 1


def test_gradient_stacks_on_overlap(path2):
    # overlap entry (0, 0): graph 3, time 4 -> norm 5
    g = joint_gradient([[3, 7, 7], [0, 4, 7]], path2)
    np.testing.assert_array_equal(g.graph, [[3, 3, 0]])
    np.testing.assert_array_equal(g.time, [[4, 0], [4, 3]])
    assert g.max_norm == pytest.approx(5)


def test_gradient_matches_products(rng):
    topo = random_graph(rng, 8)
    x = rng.standard_normal((8, 6))
    g = joint_gradient(x, topo)
    np.testing.assert_allclose(g.graph, topo.incidence.T @ x, atol=1e-12)
    np.testing.assert_allclose(g.time, x @ temporal_operators(6).d1, atol=1e-12)


def test_gradient_dimension_mismatch(path3):
    with pytest.raises(ValueError):
        joint_gradient(np.zeros((2, 4)), path3)


# --- smoothness -------------------------------------------------------------------

def test_smoothness_examples(path2, path3):
    assert smoothness_report(np.ones((3, 5)), path3).bound_c == 0
    affine = np.tile(np.arange(5.0) * 0.5 + 1, (3, 1))
    rep = smoothness_report(affine, path3)
    assert rep.max_second_diff == pytest.approx(0, abs=1e-12)
    assert rep.max_graph_quadratic == 0
    rep = smoothness_report([[0, 1, 2], [0, 0, 0]], path2)
    assert rep.max_graph_quadratic == 4 and rep.max_second_diff == 0
    assert rep.bound_c == max(rep.max_graph_quadratic, rep.max_gradient_norm,
                              rep.max_second_diff)


def test_smoothness_needs_three_steps(path2):
    with pytest.raises(ValueError):
        smoothness_report(np.zeros((2, 2)), path2)


# --- random graphs ------------------------------------------------------------------

def test_random_connected_graph_deterministic():
    a = random_connected_graph(30, np.random.default_rng(5))
    b = random_connected_graph(30, np.random.default_rng(5))
    assert a.edges == b.edges
    # connected: exactly one zero eigenvalue
    eig = np.linalg.eigvalsh(a.laplacian)
    assert np.sum(eig < 1e-9) == 1
