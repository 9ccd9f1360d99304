"""Per-node embedding matrices and their CSV interchange format."""

from __future__ import annotations

import numpy as np

from .errors import DataError


class EmbeddingMatrix:
    """Fixed-dimension real vectors keyed by node id.

    Backed by an (n, dim) float array plus an id list in row order, so
    large tables stay compact and lookups stay O(1).
    """

    def __init__(self, node_ids, vectors):
        self.node_ids = list(node_ids)
        self.vectors = np.asarray(vectors)
        if self.vectors.ndim != 2 or len(self.node_ids) != self.vectors.shape[0]:
            raise DataError("embedding matrix shape does not match id count")
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.node_ids)

    def __contains__(self, node_id):
        return node_id in self._index

    def get(self, node_id) -> np.ndarray:
        try:
            return self.vectors[self._index[node_id]]
        except KeyError:
            raise DataError(f"no embedding for node {node_id}") from None

    def take(self, node_ids) -> np.ndarray:
        """Rows for the given ids, in order."""
        try:
            rows = [self._index[nid] for nid in node_ids]
        except KeyError as exc:
            raise DataError(f"no embedding for node {exc.args[0]}") from None
        return self.vectors[rows]

    def save_csv(self, path):
        """Write ``node_id,v_0,...,v_{d-1}`` with round-trip-exact floats."""
        d = self.dim
        header = "node_id," + ",".join(f"v_{j}" for j in range(d))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for nid, row in zip(self.node_ids, self.vectors):
                fh.write(nid + "," + ",".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def load_csv(cls, path):
        ids, rows = [], []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline()
            ncols = header.count(",")
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if len(parts) != ncols + 1:
                    raise DataError(f"embedding row has {len(parts)} fields, "
                                    f"expected {ncols + 1}")
                ids.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
        return cls(ids, np.asarray(rows, dtype=np.float64))
