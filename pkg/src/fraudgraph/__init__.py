"""Graph-based fraud-ring detection toolkit."""

from .embedding import EmbeddingMatrix
from .errors import (ContractError, DataError, FraudGraphError, ParseError,
                     SchemaError, UsageError)
from .graph import (EdgeType, GraphKind, IsolationPolicy, Label, NodeType,
                    TypedGraph, build_graph, connected_components, load_graph,
                    load_labels, neighbors, remove_isolated, save_graph,
                    save_labels)
from .graphstats import (EtaReport, StructuralFeatures, label_aggregation_eta,
                         structural_features)

__version__ = "0.1.0"
