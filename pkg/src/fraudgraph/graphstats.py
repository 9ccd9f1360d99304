"""Graph-selection metric and precomputed per-node structural features.

The label-aggregation score answers "do fraud labels cluster in this
graph": per hop, the count of fraud nodes seen at that exact distance from
fraud nodes, over the count of all nodes seen at that distance from any
labeled node. A graph with a high score is worth modeling on.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .graph import Label, TypedGraph, component_arrays, hop_rings


@dataclass(frozen=True)
class EtaReport:
    per_hop: list  # [(hop, eta_hop)]
    eta: float     # max over hops
    max_hop: int

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("hop,eta_hop\n")
            for hop, val in self.per_hop:
                fh.write(f"{hop},{val!r}\n")


def label_aggregation_eta(graph: TypedGraph, labels: dict, max_hop: int = 2) -> EtaReport:
    """Score how tightly high-risk labels aggregate within ``max_hop`` hops.

    ``labels`` maps node-id to Label. High-risk nodes form the numerator
    set; high-risk plus no-observable-risk nodes form the denominator set.
    Unlabeled nodes (and nodes absent from the table) still relay paths.
    A hop with an empty denominator scores 0.
    """
    if max_hop < 1:
        raise UsageError(f"max_hop must be >= 1, got {max_hop}")
    risky = np.zeros(graph.num_nodes, dtype=bool)
    labeled = np.zeros(graph.num_nodes, dtype=bool)
    for nid, lab in labels.items():
        if nid not in graph:
            continue
        i = graph.node_index(nid)
        if lab is Label.HIGH_RISK:
            risky[i] = True
            labeled[i] = True
        elif lab is Label.NO_OBSERVABLE_RISK:
            labeled[i] = True

    numer = np.zeros(max_hop, dtype=np.int64)
    denom = np.zeros(max_hop, dtype=np.int64)
    for i in np.flatnonzero(labeled):
        rings = hop_rings(graph, int(i), max_hop)
        for h, ring in enumerate(rings):
            denom[h] += len(ring)
            if risky[i]:
                numer[h] += int(risky[ring].sum()) if ring else 0
    per_hop = []
    for h in range(max_hop):
        val = float(numer[h] / denom[h]) if denom[h] > 0 else 0.0
        per_hop.append((h + 1, val))
    eta = max(v for _, v in per_hop)
    return EtaReport(per_hop=per_hop, eta=eta, max_hop=max_hop)


@dataclass(frozen=True)
class StructuralFeatures:
    node_ids: list
    degree: np.ndarray
    component_index: np.ndarray
    component_size: np.ndarray
    eccentricity: np.ndarray

    COLUMNS = ("degree", "component_index", "component_size", "eccentricity")

    def row(self, node_id_index):
        i = node_id_index
        return (int(self.degree[i]), int(self.component_index[i]),
                int(self.component_size[i]), int(self.eccentricity[i]))

    def matrix(self) -> np.ndarray:
        return np.stack([self.degree, self.component_index,
                         self.component_size, self.eccentricity], axis=1).astype(np.float64)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("node_id,degree,component_index,component_size,eccentricity\n")
            for i, nid in enumerate(self.node_ids):
                fh.write(f"{nid},{self.degree[i]},{self.component_index[i]},"
                         f"{self.component_size[i]},{self.eccentricity[i]}\n")


def structural_features(graph: TypedGraph, eccentricity_cap: int = 400) -> StructuralFeatures:
    """Degree, component index/size, and eccentricity per node.

    Eccentricity is exact (max BFS distance inside the component) for
    components up to ``eccentricity_cap`` nodes. Larger components get the
    two-sweep BFS diameter estimate assigned to every member; longest
    simple path is NP-hard, so BFS eccentricity stands in for it.
    """
    if eccentricity_cap < 1:
        raise UsageError(f"eccentricity_cap must be >= 1, got {eccentricity_cap}")
    comp_idx, comp_size = component_arrays(graph)
    ecc = np.zeros(graph.num_nodes, dtype=np.int64)
    for members in _components_by_index(comp_idx):
        if len(members) <= eccentricity_cap:
            for i in members:
                ecc[i] = _max_bfs_distance(graph, i)
        else:
            # two-sweep: farthest node from an arbitrary start, then the
            # farthest distance from there, approximates the diameter
            a, _ = _farthest(graph, members[0])
            _, est = _farthest(graph, a)
            ecc[members] = est
    return StructuralFeatures(node_ids=list(graph.node_ids),
                              degree=graph.degrees().astype(np.int64),
                              component_index=comp_idx,
                              component_size=comp_size,
                              eccentricity=ecc)


def _components_by_index(comp_idx):
    order = np.argsort(comp_idx, kind="stable")
    boundaries = np.flatnonzero(np.diff(comp_idx[order])) + 1
    return [chunk for chunk in np.split(order, boundaries)]


def _bfs_distances(graph, start):
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in graph.neighbor_indices(u):
            v = int(v)
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _max_bfs_distance(graph, start):
    dist = _bfs_distances(graph, int(start))
    return max(dist.values())


def _farthest(graph, start):
    dist = _bfs_distances(graph, int(start))
    node = max(dist, key=lambda k: (dist[k], -k))
    return node, dist[node]
