"""Tabular feature handling: typed tables, basic transforms, drift screening.

The transform stage turns a raw table (numeric and categorical columns,
holes allowed) into a fully dense numeric table, and returns the fitted
parameters so held-out data gets the training-time treatment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError, UsageError

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class FeatureTable:
    """Node-keyed feature rows with an explicit missing-value mask.

    Wraps a pandas DataFrame indexed by node id. Numeric columns are
    float64 with NaN for missing; categorical columns are object dtype
    with None for missing.
    """

    def __init__(self, frame: pd.DataFrame, kinds: dict | None = None):
        self.frame = frame
        if kinds is None:
            kinds = {c: (NUMERIC if pd.api.types.is_numeric_dtype(frame[c])
                         else CATEGORICAL) for c in frame.columns}
        unknown = set(kinds) - set(frame.columns)
        if unknown:
            raise DataError(f"kind declared for missing columns: {sorted(unknown)}")
        self.kinds = {c: kinds[c] for c in frame.columns}

    @property
    def columns(self):
        return list(self.frame.columns)

    @property
    def row_ids(self):
        return list(self.frame.index)

    def __len__(self):
        return len(self.frame)

    def missing_mask(self) -> pd.DataFrame:
        return self.frame.isna()

    def is_dense_numeric(self) -> bool:
        return (all(k == NUMERIC for k in self.kinds.values())
                and not self.frame.isna().any().any())

    def to_matrix(self) -> np.ndarray:
        """Dense float64 matrix in column order; requires a dense numeric table."""
        if not self.is_dense_numeric():
            raise UsageError("table is not dense numeric; run fit_transform_basic first")
        return self.frame.to_numpy(dtype=np.float64)

    def take_rows(self, row_ids) -> np.ndarray:
        missing = [r for r in row_ids if r not in self.frame.index]
        if missing:
            raise DataError(f"no feature row for node {missing[0]}")
        return self.frame.loc[row_ids].to_numpy(dtype=np.float64)

    def save_csv(self, path):
        out = self.frame.copy()
        out.insert(0, "node_id", out.index)
        out.to_csv(path, index=False)

    @classmethod
    def load_csv(cls, path, kinds=None):
        frame = pd.read_csv(path, dtype={"node_id": str})
        if frame.columns[0] != "node_id":
            raise DataError("feature file must start with a node_id column")
        frame = frame.set_index("node_id")
        frame.index.name = None
        return cls(frame, kinds=kinds)

    @classmethod
    def from_matrix(cls, row_ids, matrix, prefix="f"):
        matrix = np.asarray(matrix, dtype=np.float64)
        cols = [f"{prefix}{j}" for j in range(matrix.shape[1])]
        return cls(pd.DataFrame(matrix, index=list(row_ids), columns=cols))


@dataclass
class ColumnTransform:
    """Per-column overrides; unset fields fall back to TransformConfig."""
    scaling: str | None = None          # zscore | minmax | none
    discretize_bins: int | None = None  # 0 disables


@dataclass
class TransformConfig:
    scaling: str = "zscore"
    discretize_bins: int = 0
    per_column: dict = field(default_factory=dict)

    def for_column(self, name):
        override = self.per_column.get(name, ColumnTransform())
        if isinstance(override, dict):
            override = ColumnTransform(**override)
        scaling = override.scaling if override.scaling is not None else self.scaling
        bins = (override.discretize_bins if override.discretize_bins is not None
                else self.discretize_bins)
        return scaling, bins


@dataclass
class FittedColumn:
    kind: str
    fill_value: object = None
    scaling: str = "none"
    center: float = 0.0
    spread: float = 1.0
    bin_edges: np.ndarray | None = None
    code_map: dict | None = None


@dataclass
class FittedTransform:
    columns: dict  # name -> FittedColumn
    column_order: list

    def apply(self, table: FeatureTable) -> FeatureTable:
        """Transform held-out rows with training-time parameters."""
        data = {}
        for name in self.column_order:
            if name not in table.frame.columns:
                raise DataError(f"column {name} missing from table")
            fit = self.columns[name]
            col = table.frame[name]
            if fit.kind == NUMERIC:
                values = col.to_numpy(dtype=np.float64)
                values = np.where(np.isnan(values), fit.fill_value, values)
                if fit.scaling == "zscore":
                    values = (values - fit.center) / fit.spread
                elif fit.scaling == "minmax":
                    values = (values - fit.center) / fit.spread
                if fit.bin_edges is not None:
                    values = np.searchsorted(fit.bin_edges, values,
                                             side="right").astype(np.float64)
                data[name] = values
            else:
                tokens = col.to_numpy(dtype=object)
                tokens = np.where(pd.isna(tokens), fit.fill_value, tokens)
                # unseen categories land on the reserved code 0
                data[name] = np.asarray(
                    [float(fit.code_map.get(t, 0)) for t in tokens])
        frame = pd.DataFrame(data, index=table.frame.index)[self.column_order]
        return FeatureTable(frame, kinds={c: NUMERIC for c in self.column_order})


def fit_transform_basic(table: FeatureTable,
                        config: TransformConfig | None = None):
    """Fit scaling, encoding, binning, and fills; return (dense table, fit).

    Numeric columns: median fill, then the configured scaling (population
    statistics), then optional equal-frequency binning. Categorical
    columns: mode fill (ties break lexicographically), then frequency-
    ordered integer codes starting at 1; 0 stays reserved for categories
    unseen at fit time.
    """
    config = config or TransformConfig()
    fitted = {}
    for name in table.columns:
        kind = table.kinds[name]
        col = table.frame[name]
        if col.isna().all():
            raise DataError(f"column {name} has no observed values")
        scaling, bins = config.for_column(name)
        if kind == NUMERIC:
            observed = col.to_numpy(dtype=np.float64)
            observed = observed[~np.isnan(observed)]
            fill = float(np.median(observed))
            filled = np.where(np.isnan(col.to_numpy(dtype=np.float64)), fill,
                              col.to_numpy(dtype=np.float64))
            fit = FittedColumn(kind=NUMERIC, fill_value=fill, scaling=scaling)
            if scaling == "zscore":
                fit.center = float(filled.mean())
                std = float(filled.std())  # population std
                fit.spread = std if std > 0 else 1.0
            elif scaling == "minmax":
                lo, hi = float(filled.min()), float(filled.max())
                fit.center = lo
                fit.spread = (hi - lo) if hi > lo else 1.0
            elif scaling != "none":
                raise UsageError(f"unknown scaling {scaling!r}")
            if bins:
                if bins < 2:
                    raise UsageError(f"discretize_bins must be >= 2, got {bins}")
                scaled = (filled - fit.center) / fit.spread if scaling != "none" else filled
                qs = np.arange(1, bins) / bins
                fit.bin_edges = np.quantile(scaled, qs)
            fitted[name] = fit
        else:
            tokens = col.dropna().astype(str)
            counts = tokens.value_counts()
            # most frequent first, lexicographic tie-break
            ranked = sorted(counts.index, key=lambda t: (-counts[t], t))
            fill = ranked[0]
            code_map = {t: i + 1 for i, t in enumerate(ranked)}
            fitted[name] = FittedColumn(kind=CATEGORICAL, fill_value=fill,
                                        code_map=code_map)
    transform = FittedTransform(columns=fitted, column_order=list(table.columns))
    return transform.apply(table), transform


# -- population stability index -------------------------------------------

PSI_EPSILON = 1e-4


@dataclass(frozen=True)
class PsiEntry:
    psi: float
    bin_edges: np.ndarray
    ref_fracs: np.ndarray
    cur_fracs: np.ndarray


@dataclass
class PsiReport:
    entries: dict  # feature name -> PsiEntry
    flag_threshold: float = 0.25

    def flagged(self):
        return sorted(n for n, e in self.entries.items()
                      if e.psi > self.flag_threshold)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("feature,psi,flagged\n")
            for name in sorted(self.entries):
                e = self.entries[name]
                fh.write(f"{name},{e.psi!r},{int(e.psi > self.flag_threshold)}\n")


def psi(reference, current, bins: int = 10) -> PsiEntry:
    """Population stability index between two samples of one variable.

    Bin edges are equal-frequency quantiles of the reference sample. Both
    fraction vectors are smoothed by a small epsilon and renormalized
    before the log, so empty bins stay finite.
    """
    reference = np.asarray(reference, dtype=np.float64).ravel()
    current = np.asarray(current, dtype=np.float64).ravel()
    if bins < 2:
        raise UsageError(f"bins must be >= 2, got {bins}")
    if reference.size == 0 or current.size == 0:
        raise UsageError("psi requires non-empty samples")
    edges = np.quantile(reference, np.arange(1, bins) / bins)
    ref_fracs = _bin_fractions(reference, edges, bins)
    cur_fracs = _bin_fractions(current, edges, bins)
    r = _smooth(ref_fracs)
    c = _smooth(cur_fracs)
    value = float(np.sum((c - r) * np.log(c / r)))
    return PsiEntry(psi=value, bin_edges=edges, ref_fracs=ref_fracs,
                    cur_fracs=cur_fracs)


def psi_table(reference: FeatureTable, current: FeatureTable,
              bins: int = 10, flag_threshold: float = 0.25) -> PsiReport:
    """PSI per shared numeric column of two tables."""
    entries = {}
    for name in reference.columns:
        if reference.kinds.get(name) != NUMERIC or name not in current.frame.columns:
            continue
        ref = reference.frame[name].dropna().to_numpy(dtype=np.float64)
        cur = current.frame[name].dropna().to_numpy(dtype=np.float64)
        if ref.size == 0 or cur.size == 0:
            continue
        entries[name] = psi(ref, cur, bins=bins)
    return PsiReport(entries=entries, flag_threshold=flag_threshold)


def _bin_fractions(values, edges, bins):
    assignments = np.searchsorted(edges, values, side="right")
    counts = np.bincount(assignments, minlength=bins).astype(np.float64)
    return counts / counts.sum()


def _smooth(fracs):
    smoothed = fracs + PSI_EPSILON
    return smoothed / smoothed.sum()
