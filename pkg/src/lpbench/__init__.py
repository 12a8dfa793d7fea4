"""Link prediction benchmarking: edge splits, heuristics, node embeddings,
node-pair classifiers and config-driven experiment runs."""

__version__ = "0.1.0"

from .graph import Graph, load_edge_list, main_connected_component  # noqa: E402
from .metrics import auc_roc  # noqa: E402
from .split import EdgeSplit, make_split  # noqa: E402

__all__ = ["Graph", "load_edge_list", "main_connected_component", "auc_roc", "EdgeSplit",
           "make_split", "__version__"]
