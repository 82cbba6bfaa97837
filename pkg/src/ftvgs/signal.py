"""Time-vertex signals, graph incidence/Laplacian operators and temporal differences."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TopologyError(ValueError):
    """Raised for malformed edge lists."""

    def __init__(self, message: str, edge_index: int | None = None):
        super().__init__(message)
        self.edge_index = edge_index


@dataclass(frozen=True)
class TimeVertexSignal:
    """An N x T real signal: rows are vertices, columns are time steps."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim != 2:
            raise ValueError(f"signal must be a 2-D matrix, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"signal must have N >= 1 and T >= 1, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("signal contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def as_matrix(signal) -> np.ndarray:
    if isinstance(signal, TimeVertexSignal):
        return signal.data
    return np.asarray(signal, dtype=float)


@dataclass(frozen=True)
class GraphTopology:
    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    incidence: np.ndarray = field(repr=False)
    laplacian: np.ndarray = field(repr=False)

    @property
    def num_edges(self) -> int:
        return len(self.edges)


def build_incidence(num_vertices: int, edges) -> GraphTopology:
    """Build the oriented incidence matrix Q (N x M) and Laplacian Q Q^T.

    Edge ``(u, v)`` puts +1 at the initial vertex ``u`` and -1 at the
    terminal vertex ``v``. Orientation is kept exactly as given.
    """
    n = int(num_vertices)
    if n < 1:
        raise TopologyError(f"graph needs at least one vertex, got {num_vertices}")
    edges = [tuple(int(x) for x in e) for e in edges]
    q = np.zeros((n, len(edges)))
    seen: dict[frozenset, int] = {}
    for m, edge in enumerate(edges):
        if len(edge) != 2:
            raise TopologyError(f"edge {m} is not a pair: {edge}", m)
        u, v = edge
        if not (0 <= u < n and 0 <= v < n):
            raise TopologyError(f"edge {m} ({u}, {v}) has a vertex outside [0, {n})", m)
        if u == v:
            raise TopologyError(f"edge {m} ({u}, {v}) is a self-loop", m)
        key = frozenset((u, v))
        if key in seen:
            raise TopologyError(
                f"edge {m} ({u}, {v}) duplicates edge {seen[key]}", m
            )
        seen[key] = m
        q[u, m] = 1.0
        q[v, m] = -1.0
    lap = q @ q.T
    q.setflags(write=False)
    lap.setflags(write=False)
    return GraphTopology(n, tuple(edges), q, lap)


def graph_tv_quadratic(topology: GraphTopology, column) -> float:
    """Graph total variation x^T L x of a single graph signal."""
    x = np.asarray(column, dtype=float)
    if x.shape != (topology.num_vertices,):
        raise ValueError(
            f"column has shape {x.shape}, expected ({topology.num_vertices},)"
        )
    return float(max(x @ topology.laplacian @ x, 0.0))


@dataclass(frozen=True)
class TemporalOperators:
    d1: np.ndarray
    d2: np.ndarray

    @property
    def T(self) -> int:
        return self.d1.shape[0]


def first_difference_matrix(t: int) -> np.ndarray:
    d1 = np.zeros((t, max(t - 1, 0)))
    idx = np.arange(t - 1)
    d1[idx, idx] = -1.0
    d1[idx + 1, idx] = 1.0
    return d1


def second_difference_matrix(t: int) -> np.ndarray:
    d2 = np.zeros((t, max(t - 2, 0)))
    idx = np.arange(t - 2)
    d2[idx, idx] = 1.0
    d2[idx + 1, idx] = -2.0
    d2[idx + 2, idx] = 1.0
    return d2


def temporal_operators(t: int) -> TemporalOperators:
    """D1 (T x T-1) and D2 (T x T-2), applied from the right of X."""
    if t < 1:
        raise ValueError(f"T must be >= 1, got {t}")
    d1 = first_difference_matrix(t)
    d2 = second_difference_matrix(t)
    d1.setflags(write=False)
    d2.setflags(write=False)
    return TemporalOperators(d1, d2)


def temporal_diff(signal, order: int) -> np.ndarray:
    """Forward temporal difference of each vertex's time series.

    Returns an N x (T - order) matrix; order 1 is X D1, order 2 is X D2.
    """
    x = as_matrix(signal)
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if x.shape[1] <= order:
        raise ValueError(f"T = {x.shape[1]} too small for a difference of order {order}")
    if order == 1:
        return x[:, 1:] - x[:, :-1]
    return x[:, :-2] - 2.0 * x[:, 1:-1] + x[:, 2:]


@dataclass(frozen=True)
class JointGradient:
    """Graph and time gradient components in their native shapes.

    ``graph`` is Q^T X (M x T, edge-indexed) and ``time`` is X D1
    (N x T-1, vertex-indexed). On the index overlap
    ``i < min(M, N), j < T - 1`` the two components are stacked into a
    2-vector per (i, j); outside it only the defined component counts.
    ``max_norm`` is the maximum Euclidean norm over all of these.
    """

    graph: np.ndarray
    time: np.ndarray
    max_norm: float


def _stacked_max_norm(graph: np.ndarray, time: np.ndarray) -> float:
    best = 0.0
    if graph.size:
        best = max(best, float(np.abs(graph).max()))
    if time.size:
        best = max(best, float(np.abs(time).max()))
    rows = min(graph.shape[0], time.shape[0])
    cols = min(graph.shape[1], time.shape[1])
    if rows and cols:
        stacked = np.hypot(graph[:rows, :cols], time[:rows, :cols])
        best = max(best, float(stacked.max()))
    return best


def joint_gradient(signal, topology: GraphTopology) -> JointGradient:
    x = as_matrix(signal)
    if x.shape[0] != topology.num_vertices:
        raise ValueError(
            f"signal has {x.shape[0]} rows but graph has {topology.num_vertices} vertices"
        )
    graph = topology.incidence.T @ x
    time = x @ first_difference_matrix(x.shape[1])
    return JointGradient(graph, time, _stacked_max_norm(graph, time))


@dataclass(frozen=True)
class SmoothnessReport:
    max_graph_quadratic: float
    max_gradient_norm: float
    max_second_diff: float
    bound_c: float


def smoothness_report(signal, topology: GraphTopology) -> SmoothnessReport:
    """Evaluate the three smoothness quantities bounded by the constant C."""
    x = as_matrix(signal)
    if x.shape[1] < 3:
        raise ValueError(f"smoothness report needs T >= 3, got T = {x.shape[1]}")
    grad = joint_gradient(x, topology)
    # column-wise x^T L x
    quad = np.einsum("ij,ij->j", x, topology.laplacian @ x)
    max_quad = float(max(np.abs(quad).max(), 0.0))
    max_d2 = float(np.abs(temporal_diff(x, 2)).max())
    return SmoothnessReport(
        max_graph_quadratic=max_quad,
        max_gradient_norm=grad.max_norm,
        max_second_diff=max_d2,
        bound_c=max(max_quad, grad.max_norm, max_d2),
    )


def random_connected_graph(n: int, rng: np.random.Generator, edge_prob: float | None = None,
                           max_tries: int = 1000) -> GraphTopology:
    """Erdos-Renyi graph, resampled until connected.

    Default edge probability is ``2 ln(N) / N`` (clipped to 1).
    """
    if n == 1:
        return build_incidence(1, [])
    p = min(1.0, 2.0 * np.log(n) / n) if edge_prob is None else edge_prob
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_tries):
        keep = rng.random(iu.size) < p
        edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
        if _is_connected(n, edges):
            return build_incidence(n, edges)
    raise RuntimeError(f"no connected graph found after {max_tries} draws (N={n}, p={p})")


def _is_connected(n: int, edges) -> bool:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    components = n
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            components -= 1
    return components == 1
