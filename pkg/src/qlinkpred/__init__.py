"""Link-prediction sampling lab: classical A^2/A^3 samplers and the
quantum-walk (QLP) sampling distribution under one query model."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    ABSENT,
    Graph,
    QueryLedger,
    degree_query,
    degree_statistics,
    load_edge_list,
    neighbour_query,
    vertex_pair_query,
)
from .sampling import RandomStream, build_cumulative, derive_stream, sample_index  # noqa: E402

__all__ = [
    "ABSENT",
    "Graph",
    "QueryLedger",
    "RandomStream",
    "build_cumulative",
    "degree_query",
    "degree_statistics",
    "derive_stream",
    "load_edge_list",
    "neighbour_query",
    "sample_index",
    "vertex_pair_query",
]
