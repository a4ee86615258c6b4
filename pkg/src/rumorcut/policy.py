"""Edge scoring, degree-retention feasibility, and action selection.

An edge score combines the edge's final embedding with the mean embedding of
both endpoint communities and the source node's embedding. Feasible edges
are those whose deletion leaves both endpoints with at least the retention
fraction of their original out- and in-degree; probabilities are a masked
softmax over the feasible set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CommunityAssignment, SocialGraph
from .neural import EmbeddingCache, Parameters, mlp_forward

DEFAULT_RETENTION = 0.6

# guards float fuzz in retention * original_degree (e.g. 0.6 * 5 > 3)
_RETENTION_EPS = 1e-9


@dataclass
class PolicyOutput:
    """Per-alive-edge logits and the masked action distribution."""

    edge_ids: np.ndarray         # alive edge ids, ascending
    logits: np.ndarray           # (m,)
    feasible: np.ndarray         # (m,) bool
    probabilities: np.ndarray    # (m,), zero on infeasible edges

    @property
    def terminal(self):
        """True when no edge may be deleted; the episode must stop."""
        return not bool(self.feasible.any())


def community_embeddings(node_embeddings, communities: CommunityAssignment):
    """Mean-pool node embeddings per community; (k, hidden)."""
    k = communities.community_count
    out = np.zeros((k, node_embeddings.shape[1]))
    np.add.at(out, communities.community_of, node_embeddings)
    sizes = np.bincount(communities.community_of, minlength=k)
    return out / sizes[:, None]


def score_edges(cache: EmbeddingCache, communities: CommunityAssignment,
                source, params: Parameters):
    """Score every alive edge; stores the scoring intermediates in the cache."""
    n_last = cache.node_layers[-1]
    comm = community_embeddings(n_last, communities)
    c_i = comm[communities.community_of[cache.src_idx]]
    c_j = comm[communities.community_of[cache.dst_idx]]
    n_s = np.tile(n_last[source], (cache.alive_count, 1))
    if cache.ablation.drop_community:
        c_i = np.zeros_like(c_i)
        c_j = np.zeros_like(c_j)
    if cache.ablation.drop_source:
        n_s = np.zeros_like(n_s)
    x = np.concatenate([cache.final_edge, c_i, c_j, n_s], axis=1)
    hidden, logits = mlp_forward(x, params)
    cache.mlp_input = x
    cache.mlp_hidden = hidden
    cache.logits = logits
    cache.community_of = communities.community_of
    cache.community_sizes = np.bincount(
        communities.community_of, minlength=communities.community_count
    ).astype(np.float64)
    cache.source = source
    return logits


def feasible_mask(g: SocialGraph, retention=DEFAULT_RETENTION):
    """Per-edge-id deletability under the degree-retention constraint.

    Edge (i, j) is feasible iff it is alive and deleting it keeps
    out_degree(i) >= retention * original_out_degree(i) and likewise for
    j's in-degree.
    """
    if not 0.0 < retention <= 1.0:
        raise ValueError(f"retention must be in (0, 1], got {retention}")
    out_ok = (g.out_degree[g.src] - 1) + _RETENTION_EPS >= retention * g.original_out_degree[g.src]
    in_ok = (g.in_degree[g.dst] - 1) + _RETENTION_EPS >= retention * g.original_in_degree[g.dst]
    return g.alive & out_ok & in_ok


def masked_softmax(logits, feasible):
    probs = np.zeros_like(logits)
    if feasible.any():
        shifted = logits[feasible] - logits[feasible].max()
        exp = np.exp(shifted)
        probs[feasible] = exp / exp.sum()
    return probs


def policy_output(g: SocialGraph, logits, retention=DEFAULT_RETENTION) -> PolicyOutput:
    """Assemble the masked action distribution over the alive edges."""
    edge_ids = g.alive_edge_ids()
    if logits.shape != edge_ids.shape:
        raise ValueError(f"expected {edge_ids.size} logits, got {logits.shape}")
    feasible = feasible_mask(g, retention)[edge_ids]
    return PolicyOutput(
        edge_ids=edge_ids,
        logits=logits,
        feasible=feasible,
        probabilities=masked_softmax(logits, feasible),
    )


def sample_action(output: PolicyOutput, rng):
    """Draw an edge id from the masked categorical distribution."""
    if output.terminal:
        raise ValueError("no feasible edge to sample")
    cdf = np.cumsum(output.probabilities)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    idx = min(idx, output.probabilities.size - 1)
    while not output.feasible[idx]:  # cumsum plateaus on masked tail entries
        idx -= 1
    return int(output.edge_ids[idx])


def greedy_action(output: PolicyOutput):
    """Highest-logit feasible edge; ties break toward the smallest edge id."""
    if output.terminal:
        raise ValueError("no feasible edge to choose")
    masked = np.where(output.feasible, output.logits, -np.inf)
    return int(output.edge_ids[int(np.argmax(masked))])
