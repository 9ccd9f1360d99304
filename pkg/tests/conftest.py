import numpy as np
import pytest

from fraudgraph.graph import EdgeType, NodeType, build_graph


def make_graph(edges, nodes=(), kind=None):
    """Small-graph helper: edges as (src, dst[, type]) tuples, friendship default."""
    edge_rows = []
    for e in edges:
        etype = e[2] if len(e) > 2 else EdgeType.FRIENDSHIP
        edge_rows.append((e[0], e[1], etype))
    node_rows = [(n, NodeType.ACCOUNT) if isinstance(n, str) else n for n in nodes]
    return build_graph(node_rows, edge_rows, kind=kind)


def relative_error(a, b):
    denom = max(abs(a), abs(b), 1e-12)
    return abs(a - b) / denom


def finite_difference(fn, params, eps=1e-6):
    """Central finite differences of scalar fn over a flat float64 vector."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.zeros_like(params)
    for i in range(params.size):
        up = params.copy()
        up[i] += eps
        down = params.copy()
        down[i] -= eps
        grad[i] = (fn(up) - fn(down)) / (2 * eps)
    return grad


def assert_grad_close(analytic, numeric, rel_tol=1e-4):
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    rel = np.abs(analytic - numeric) / scale
    worst = float(rel.max()) if rel.size else 0.0
    assert worst <= rel_tol, f"max relative gradient error {worst:.3e} > {rel_tol}"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
