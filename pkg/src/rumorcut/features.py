"""Hand-crafted node and edge features feeding the embedding network.

Node columns: total degree, harmonic closeness, betweenness, hop distance to
the rumor source (unreachable mapped to node_count), and a source indicator.
Edge columns: endpoint degree sum, diffusion importance, and edge
betweenness. Everything is recomputed from the alive edge set after each
deletion and z-scored per column; constant columns normalize to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import SocialGraph, betweenness, closeness

NODE_FEATURE_NAMES = (
    "degree",
    "closeness",
    "betweenness",
    "source_distance",
    "is_source",
)
EDGE_FEATURE_NAMES = (
    "degree_sum",
    "diffusion_importance",
    "edge_betweenness",
)

BETWEENNESS_MODES = ("source", "global")


@dataclass
class FeatureMatrix:
    """Normalized feature blocks for the alive graph, plus raw copies."""

    node_features: np.ndarray       # (n, 5) z-scored
    edge_features: np.ndarray       # (alive edges, 3) z-scored, edge-id order
    alive_edge_ids: np.ndarray
    node_stats: tuple               # (means, stds) pre-normalization
    edge_stats: tuple
    raw_node_features: np.ndarray
    raw_edge_features: np.ndarray


def diffusion_importance(g: SocialGraph, eid) -> float:
    """Count of out-neighbors of head(e) not already exposed by tail(e).

    For e = (i, j): |out(j) \\ ({i} U out(i))|; measures how many new nodes
    the edge lets a cascade reach in one extra hop.
    """
    if not g.alive[eid]:
        raise ValueError(f"edge {eid} is not alive")
    i, j = g.edge_endpoints(eid)
    reach_i = set(int(v) for v in g.out_neighbors(i))
    reach_i.add(i)
    return float(sum(1 for k in g.out_neighbors(j) if int(k) not in reach_i))


def _zscore(matrix):
    means = matrix.mean(axis=0)
    stds = matrix.std(axis=0)
    out = np.zeros_like(matrix)
    nonconstant = stds > 0
    out[:, nonconstant] = (matrix[:, nonconstant] - means[nonconstant]) / stds[nonconstant]
    return out, (means, stds)


def compute_features(g: SocialGraph, source, betweenness_mode="source") -> FeatureMatrix:
    """Build the feature blocks for the current alive graph.

    ``betweenness_mode`` selects global (all roots) or source-rooted
    betweenness for both the node and edge columns.
    """
    if betweenness_mode not in BETWEENNESS_MODES:
        raise ValueError(f"betweenness_mode must be one of {BETWEENNESS_MODES}")
    n = g.node_count
    indptr, indices, eids = g.out_csr()
    if eids.size == 0:
        raise ValueError("features require at least one alive edge")

    degree = g.total_degree().astype(np.float64)
    close = closeness(g)
    roots = "all" if betweenness_mode == "global" else source
    node_btw, edge_btw = betweenness(g, roots=roots)
    dist = _kernels.bfs_distances(indptr, indices, n, source).astype(np.float64)
    dist[dist < 0] = float(n)  # finite sentinel beyond any real distance
    is_source = np.zeros(n)
    is_source[source] = 1.0
    raw_nodes = np.stack([degree, close, node_btw, dist, is_source], axis=1)

    src, dst = g.src[eids], g.dst[eids]
    degree_sum = degree[src] + degree[dst]
    diffusion = _kernels.diffusion_importance_all(indptr, indices, n)
    raw_edges = np.stack([degree_sum, diffusion, edge_btw[eids]], axis=1)

    nodes, node_stats = _zscore(raw_nodes)
    edges, edge_stats = _zscore(raw_edges)
    return FeatureMatrix(
        node_features=nodes,
        edge_features=edges,
        alive_edge_ids=eids,
        node_stats=node_stats,
        edge_stats=edge_stats,
        raw_node_features=raw_nodes,
        raw_edge_features=raw_edges,
    )
