"""Typed multi-graphs for fraud analysis.

A graph holds account and device nodes plus typed edges (transaction,
device-use, friendship, order). Storage is index-based: node ids map to
dense integer indices, edges live in numpy arrays, and an undirected CSR
adjacency is built once at construction. Graphs are immutable after build;
all preprocessing operations return new graphs.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ContractError, ParseError, SchemaError, UsageError


class NodeType(Enum):
    ACCOUNT = "account"
    DEVICE = "device"


class EdgeType(Enum):
    TRANSACTION = "transaction"
    DEVICE_USE = "device_use"
    FRIENDSHIP = "friendship"
    ORDER = "order"


class GraphKind(Enum):
    BUYER_SELLER = "buyer_seller"
    TRANSACTION = "transaction"
    DEVICE_SHARING = "device_sharing"
    FRIENDSHIP = "friendship"


class Label(Enum):
    HIGH_RISK = "high_risk"
    NO_OBSERVABLE_RISK = "no_observable_risk"
    UNLABELED = "unlabeled"


# Order edges run buyer -> seller, transactions payer -> payee.
DIRECTED_EDGE_TYPES = frozenset({EdgeType.ORDER, EdgeType.TRANSACTION})

_NODE_TYPE_CODE = {NodeType.ACCOUNT: 0, NodeType.DEVICE: 1}
_NODE_TYPE_FROM_CODE = {v: k for k, v in _NODE_TYPE_CODE.items()}
_EDGE_TYPE_CODE = {t: i for i, t in enumerate(EdgeType)}
_EDGE_TYPE_FROM_CODE = {i: t for t, i in _EDGE_TYPE_CODE.items()}


@dataclass(frozen=True)
class ComponentEntry:
    index: int
    size: int


class ComponentMap(dict):
    """node-id -> ComponentEntry; indices ordered by each component's smallest id."""

    def sizes(self):
        out = {}
        for entry in self.values():
            out[entry.index] = entry.size
        return out


class TypedGraph:
    """Immutable multi-graph with typed nodes and typed, weighted edges.

    Node ids are strings. Parallel edges are retained. The adjacency index
    is undirected regardless of per-edge direction: traversal operations
    (neighbors, components, walks) treat every edge both ways.
    """

    def __init__(self, node_ids, node_types, edge_src, edge_dst, edge_types,
                 edge_weights, kind=None):
        self.node_ids = list(node_ids)
        self.kind = kind
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}
        if len(self._index) != len(self.node_ids):
            raise SchemaError("duplicate node ids")
        n = len(self.node_ids)
        self.node_type_codes = np.asarray(node_types, dtype=np.int8)
        self.edge_src = np.asarray(edge_src, dtype=np.int64)
        self.edge_dst = np.asarray(edge_dst, dtype=np.int64)
        self.edge_type_codes = np.asarray(edge_types, dtype=np.int8)
        self.edge_weights = np.asarray(edge_weights, dtype=np.float64)
        if np.any(self.edge_weights < 0):
            raise SchemaError("edge weights must be nonnegative")
        self._validate_edge_schema()
        self._adj_indptr, self._adj_indices = _build_csr(
            n, self.edge_src, self.edge_dst)

    def _validate_edge_schema(self):
        if not len(self.edge_src):
            return
        st = self.node_type_codes[self.edge_src]
        dt = self.node_type_codes[self.edge_dst]
        du = self.edge_type_codes == _EDGE_TYPE_CODE[EdgeType.DEVICE_USE]
        bad = np.where(du, st + dt != 1, (st != 0) | (dt != 0))
        if bad.any():
            k = int(np.argmax(bad))
            etype = _EDGE_TYPE_FROM_CODE[int(self.edge_type_codes[k])]
            s, d = self.node_ids[self.edge_src[k]], self.node_ids[self.edge_dst[k]]
            if etype is EdgeType.DEVICE_USE:
                raise SchemaError(f"device_use edge ({s}, {d}) must connect "
                                  "exactly one account and one device")
            raise SchemaError(f"{etype.value} edge ({s}, {d}) must connect two accounts")

    # -- queries ---------------------------------------------------------

    @property
    def num_nodes(self):
        return len(self.node_ids)

    @property
    def num_edges(self):
        return len(self.edge_src)

    def __contains__(self, node_id):
        return node_id in self._index

    def node_index(self, node_id):
        try:
            return self._index[node_id]
        except KeyError:
            raise LookupError(f"unknown node: {node_id}") from None

    def node_type(self, node_id) -> NodeType:
        return _NODE_TYPE_FROM_CODE[int(self.node_type_codes[self.node_index(node_id)])]

    def degree(self, node_id) -> int:
        i = self.node_index(node_id)
        return int(self._adj_indptr[i + 1] - self._adj_indptr[i])

    def degrees(self) -> np.ndarray:
        return np.diff(self._adj_indptr)

    def adjacency(self):
        """Undirected CSR incidence (indptr, indices); parallel edges repeat."""
        return self._adj_indptr, self._adj_indices

    def neighbor_indices(self, i):
        return self._adj_indices[self._adj_indptr[i]:self._adj_indptr[i + 1]]

    def edges(self):
        """Iterate (src_id, dst_id, EdgeType, weight) in storage order."""
        for s, d, tc, w in zip(self.edge_src, self.edge_dst,
                               self.edge_type_codes, self.edge_weights):
            yield (self.node_ids[s], self.node_ids[d],
                   _EDGE_TYPE_FROM_CODE[int(tc)], float(w))

    def __eq__(self, other):
        if not isinstance(other, TypedGraph):
            return NotImplemented
        return (self.node_ids == other.node_ids
                and np.array_equal(self.node_type_codes, other.node_type_codes)
                and np.array_equal(self.edge_src, other.edge_src)
                and np.array_equal(self.edge_dst, other.edge_dst)
                and np.array_equal(self.edge_type_codes, other.edge_type_codes)
                and np.array_equal(self.edge_weights, other.edge_weights))

    def __repr__(self):
        return (f"TypedGraph(|V|={self.num_nodes}, |E|={self.num_edges}, "
                f"kind={self.kind.value if self.kind else None})")


def _build_csr(n, src, dst):
    """Undirected CSR over node indices; each edge contributes two incidences.

    Neighbor lists come out sorted, so the layout is deterministic for a
    given edge multiset.
    """
    owner = np.concatenate([src, dst])
    other = np.concatenate([dst, src])
    order = np.lexsort((other, owner))
    indices = other[order]
    counts = np.bincount(owner, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def build_graph(node_records, edge_records, kind=None) -> TypedGraph:
    """Assemble a TypedGraph from (id, type) node rows and edge rows.

    ``node_records``: iterable of (node_id, NodeType or type token).
    ``edge_records``: iterable of (src, dst, EdgeType or token[, weight]).

    Nodes referenced only by edges are auto-created: device_use edges infer
    the missing endpoint as the complement of the known one (src=account,
    dst=device when neither is known); every other edge type infers account.
    Conflicting type declarations for one id raise SchemaError.
    """
    types: dict[str, NodeType] = {}
    order: list[str] = []

    def declare(nid, ntype):
        prev = types.get(nid)
        if prev is None:
            types[nid] = ntype
            order.append(nid)
        elif prev is not ntype:
            raise SchemaError(f"node {nid} declared both {prev.value} and {ntype.value}")

    for rec in node_records:
        nid, ntype = rec[0], rec[1]
        if not isinstance(ntype, NodeType):
            ntype = NodeType(str(ntype).strip().lower())
        declare(str(nid), ntype)

    edges = []
    for rec in edge_records:
        src, dst, etype = str(rec[0]), str(rec[1]), rec[2]
        if not isinstance(etype, EdgeType):
            etype = EdgeType(str(etype).strip().lower())
        weight = float(rec[3]) if len(rec) > 3 and rec[3] is not None else 1.0
        edges.append((src, dst, etype, weight))

    # Auto-create endpoints. Two passes so a device_use edge can pick up a
    # type declared by a plain edge elsewhere in the file.
    for src, dst, etype, _ in edges:
        if etype is not EdgeType.DEVICE_USE:
            declare(src, NodeType.ACCOUNT)
            declare(dst, NodeType.ACCOUNT)
    for src, dst, etype, _ in edges:
        if etype is EdgeType.DEVICE_USE:
            st, dt = types.get(src), types.get(dst)
            if st is None and dt is None:
                declare(src, NodeType.ACCOUNT)
                declare(dst, NodeType.DEVICE)
            elif st is None:
                declare(src, NodeType.ACCOUNT if dt is NodeType.DEVICE else NodeType.DEVICE)
            elif dt is None:
                declare(dst, NodeType.ACCOUNT if st is NodeType.DEVICE else NodeType.DEVICE)

    index = {nid: i for i, nid in enumerate(order)}
    node_types = [_NODE_TYPE_CODE[types[nid]] for nid in order]
    src_idx = [index[e[0]] for e in edges]
    dst_idx = [index[e[1]] for e in edges]
    etype_codes = [_EDGE_TYPE_CODE[e[2]] for e in edges]
    weights = [e[3] for e in edges]
    return TypedGraph(order, node_types, src_idx, dst_idx, etype_codes, weights,
                      kind=kind)


# -- TSV interface -------------------------------------------------------

def parse_node_file(text_or_path):
    """Parse node TSV rows ``node_id<TAB>node_type``."""
    rows = []
    for lineno, line in enumerate(_iter_lines(text_or_path), start=1):
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {len(parts)}",
                             line=lineno)
        nid, token = parts
        try:
            ntype = NodeType(token.strip().lower())
        except ValueError:
            raise ParseError(f"unknown node type {token!r}", line=lineno) from None
        rows.append((nid, ntype))
    return rows


def parse_edge_file(text_or_path):
    """Parse edge TSV rows ``src<TAB>dst<TAB>edge_type[<TAB>weight]``."""
    rows = []
    for lineno, line in enumerate(_iter_lines(text_or_path), start=1):
        parts = line.rstrip("\n").split("\t")
        if len(parts) not in (3, 4):
            raise ParseError(f"expected 3 or 4 tab-separated fields, got {len(parts)}",
                             line=lineno)
        src, dst, token = parts[0], parts[1], parts[2]
        try:
            etype = EdgeType(token.strip().lower())
        except ValueError:
            raise ParseError(f"unknown edge type {token!r}", line=lineno) from None
        weight = 1.0
        if len(parts) == 4:
            try:
                weight = float(parts[3])
            except ValueError:
                raise ParseError(f"bad weight {parts[3]!r}", line=lineno) from None
        rows.append((src, dst, etype, weight))
    return rows


def _iter_lines(text_or_path):
    if isinstance(text_or_path, str) and "\n" not in text_or_path and "\t" not in text_or_path:
        with open(text_or_path, "r", encoding="utf-8") as fh:
            yield from (ln for ln in fh if ln.strip())
        return
    yield from (ln for ln in io.StringIO(str(text_or_path)) if ln.strip())


def load_graph(node_path, edge_path, kind=None) -> TypedGraph:
    node_rows = parse_node_file(node_path) if node_path is not None else []
    edge_rows = parse_edge_file(edge_path)
    return build_graph(node_rows, edge_rows, kind=kind)


def save_graph(graph: TypedGraph, node_path, edge_path):
    """Write the two TSVs, lexicographically sorted; round trip is bit-exact."""
    node_lines = sorted(
        f"{nid}\t{_NODE_TYPE_FROM_CODE[int(tc)].value}\n"
        for nid, tc in zip(graph.node_ids, graph.node_type_codes))
    edge_lines = sorted(
        f"{s}\t{d}\t{t.value}\t{w!r}\n" for s, d, t, w in graph.edges())
    with open(node_path, "w", encoding="utf-8") as fh:
        fh.writelines(node_lines)
    with open(edge_path, "w", encoding="utf-8") as fh:
        fh.writelines(edge_lines)


# -- label tables --------------------------------------------------------

def load_labels(path) -> dict:
    """Read ``node_id<TAB>label`` rows into {id: Label}."""
    out = {}
    for lineno, line in enumerate(_iter_lines(path), start=1):
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {len(parts)}",
                             line=lineno)
        try:
            out[parts[0]] = Label(parts[1].strip().lower())
        except ValueError:
            raise ParseError(f"unknown label {parts[1]!r}", line=lineno) from None
    return out


def save_labels(labels: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{nid}\t{lab.value}\n" for nid, lab in sorted(labels.items()))


# -- preprocessing -------------------------------------------------------

class IsolationPolicy(Enum):
    ZERO_DEGREE = "zero_degree"
    NO_SHARED_DEVICE = "no_shared_device"


def remove_isolated(graph: TypedGraph, policy) -> TypedGraph:
    """Drop nodes that carry no relational signal; returns a new graph.

    ZERO_DEGREE keeps exactly the nodes with degree >= 1. NO_SHARED_DEVICE
    (device-sharing graphs only) keeps an account iff some device neighbor
    of it serves at least one other account, and keeps a device iff it
    serves at least two accounts. Edges incident to dropped nodes go too.
    """
    if not isinstance(policy, IsolationPolicy):
        policy = IsolationPolicy(str(policy).strip().lower())
    if policy is IsolationPolicy.ZERO_DEGREE:
        keep = graph.degrees() >= 1
    else:
        if graph.kind is not None and graph.kind is not GraphKind.DEVICE_SHARING:
            raise UsageError(
                "no_shared_device policy applies only to device-sharing graphs, "
                f"got kind={graph.kind.value}")
        keep = _no_shared_device_mask(graph)
    return _subgraph(graph, keep)


def _no_shared_device_mask(graph):
    n = graph.num_nodes
    is_device = graph.node_type_codes == 1
    keep = np.zeros(n, dtype=bool)
    du = graph.edge_type_codes == _EDGE_TYPE_CODE[EdgeType.DEVICE_USE]
    if not du.any():
        return keep
    src, dst = graph.edge_src[du], graph.edge_dst[du]
    dst_is_dev = is_device[dst]
    accts = np.where(dst_is_dev, src, dst)
    devs = np.where(dst_is_dev, dst, src)
    pairs = np.unique(np.stack([accts, devs], axis=1), axis=0)
    users_per_device = np.bincount(pairs[:, 1], minlength=n)
    shared = users_per_device >= 2
    keep[is_device & shared] = True
    keep[pairs[:, 0][shared[pairs[:, 1]]]] = True
    return keep


def _subgraph(graph, keep_mask):
    keep_idx = np.flatnonzero(keep_mask)
    remap = -np.ones(graph.num_nodes, dtype=np.int64)
    remap[keep_idx] = np.arange(len(keep_idx))
    node_ids = [graph.node_ids[i] for i in keep_idx]
    node_types = graph.node_type_codes[keep_idx]
    emask = keep_mask[graph.edge_src] & keep_mask[graph.edge_dst]
    return TypedGraph(node_ids, node_types,
                      remap[graph.edge_src[emask]], remap[graph.edge_dst[emask]],
                      graph.edge_type_codes[emask], graph.edge_weights[emask],
                      kind=graph.kind)


# -- traversal -----------------------------------------------------------

def neighbors(graph: TypedGraph, node_id, hop: int):
    """Nodes at undirected shortest-path distance exactly ``hop``."""
    if hop < 1:
        raise UsageError(f"hop must be >= 1, got {hop}")
    start = graph.node_index(node_id)
    ring = _hop_ring(graph, start, hop)
    return {graph.node_ids[i] for i in ring}


def _hop_ring(graph, start, hop):
    """Indices at distance exactly `hop` from `start` (BFS, dedup via visited)."""
    visited = {start}
    frontier = [start]
    for _ in range(hop):
        nxt = []
        for u in frontier:
            for v in graph.neighbor_indices(u):
                v = int(v)
                if v not in visited:
                    visited.add(v)
                    nxt.append(v)
        frontier = nxt
        if not frontier:
            break
    return frontier


def hop_rings(graph: TypedGraph, start_index: int, max_hop: int):
    """List of index lists for distances 1..max_hop from a node index."""
    visited = {start_index}
    frontier = [start_index]
    rings = []
    for _ in range(max_hop):
        nxt = []
        for u in frontier:
            for v in graph.neighbor_indices(u):
                v = int(v)
                if v not in visited:
                    visited.add(v)
                    nxt.append(v)
        rings.append(nxt)
        frontier = nxt
        if not frontier:
            rings.extend([[]] * (max_hop - len(rings)))
            break
    return rings


def connected_components(graph: TypedGraph) -> ComponentMap:
    """Undirected components; indices ascend by each component's smallest id."""
    n = graph.num_nodes
    comp = -np.ones(n, dtype=np.int64)
    groups = []
    for s in range(n):
        if comp[s] >= 0:
            continue
        cid = len(groups)
        members = [s]
        comp[s] = cid
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in graph.neighbor_indices(u):
                v = int(v)
                if comp[v] < 0:
                    comp[v] = cid
                    members.append(v)
                    queue.append(v)
        groups.append(members)
    order = sorted(range(len(groups)),
                   key=lambda g: min(graph.node_ids[i] for i in groups[g]))
    rank = {g: r for r, g in enumerate(order)}
    out = ComponentMap()
    for g, members in enumerate(groups):
        entry = ComponentEntry(index=rank[g], size=len(members))
        for i in members:
            out[graph.node_ids[i]] = entry
    return out


def component_arrays(graph: TypedGraph):
    """(component_index, component_size) numpy arrays aligned to node order."""
    cmap = connected_components(graph)
    idx = np.empty(graph.num_nodes, dtype=np.int64)
    size = np.empty(graph.num_nodes, dtype=np.int64)
    for i, nid in enumerate(graph.node_ids):
        e = cmap[nid]
        idx[i] = e.index
        size[i] = e.size
    return idx, size


def require_no_zero_degree(graph: TypedGraph):
    """Contract gate for walk sampling; points callers at remove_isolated."""
    degs = graph.degrees()
    if graph.num_nodes and int(degs.min()) == 0:
        bad = graph.node_ids[int(np.argmin(degs))]
        raise ContractError(
            f"graph has zero-degree node {bad!r}; run remove_isolated first")
