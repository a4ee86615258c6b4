"""Episode mechanics: randomized graph/source resets, one-edge-deletion steps
with Monte Carlo impact rewards, and the synthetic graph generators used for
randomized training.

Rewards use common random numbers: every impact estimate inside one episode
reuses the same per-simulation seeds, so the step rewards telescope exactly
to (initial impact - final impact).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import FeatureMatrix, compute_features
from .graph import (
    CommunityAssignment,
    LineGraph,
    SocialGraph,
    build_line_graph,
    detect_communities,
)
from .policy import DEFAULT_RETENTION, feasible_mask
from .propagation import SirParams, estimate_impact

DEFAULT_BUDGET_FRACTION = 0.10
DEFAULT_REWARD_SIMS = 200
RESET_RETRIES = 20

GENERATOR_FAMILIES = ("preferential_attachment", "small_world", "dataset_subsample")


@dataclass(frozen=True)
class GeneratorConfig:
    """Random-graph family and parameters for episode resets.

    preferential_attachment: each new node attaches ``m`` out-edges to
    distinct existing nodes with degree-proportional probability, then each
    edge is reciprocated with probability ``reciprocity``.
    small_world: directed ring lattice (k successors per node, both
    directions) with per-edge target rewiring.
    dataset_subsample: BFS ball of ``radius`` around a random root of
    ``base_graph``.
    """

    family: str = "preferential_attachment"
    n_min: int = 60
    n_max: int = 250
    m: int = 4
    reciprocity: float = 0.3
    k: int = 2
    rewire_prob: float = 0.1
    radius: int = 2
    base_graph: SocialGraph | None = None

    def __post_init__(self):
        if self.family not in GENERATOR_FAMILIES:
            raise ValueError(f"family must be one of {GENERATOR_FAMILIES}")
        if self.n_min < 3 or self.n_max < self.n_min:
            raise ValueError("need 3 <= n_min <= n_max")
        if self.family == "preferential_attachment" and self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0.0 <= self.reciprocity <= 1.0:
            raise ValueError("reciprocity must be in [0, 1]")
        if self.family == "small_world":
            if self.k < 1:
                raise ValueError("k must be >= 1")
            if not 0.0 <= self.rewire_prob <= 1.0:
                raise ValueError("rewire_prob must be in [0, 1]")
        if self.family == "dataset_subsample":
            if self.base_graph is None:
                raise ValueError("dataset_subsample requires base_graph")
            if self.radius < 0:
                raise ValueError("radius must be >= 0")


def default_budget(edge_count, fraction=DEFAULT_BUDGET_FRACTION):
    """Deletion budget: fraction of the initial edges, rounded half up."""
    return int(np.floor(fraction * edge_count + 0.5))


@dataclass
class DeletionPlan:
    """Ordered edge deletions produced by one rollout."""

    graph_id: str
    source: int
    budget: int
    edges: list = field(default_factory=list)
    eta_after: list = field(default_factory=list)
    exhausted: bool = False     # stopped early: no feasible edge remained

    def __len__(self):
        return len(self.edges)


@dataclass
class EpisodeState:
    """Mutable state of one mitigation episode."""

    graph: SocialGraph
    line_graph: LineGraph
    source: int
    communities: CommunityAssignment
    features: FeatureMatrix
    budget: int
    step_index: int
    eta_prev: float
    sim_seed: int               # common random numbers for every estimate
    sir: SirParams
    n_sims: int
    retention: float
    betweenness_mode: str
    plan: DeletionPlan

    @property
    def done(self):
        if self.step_index >= self.budget:
            return True
        return not bool(feasible_mask(self.graph, self.retention).any())

    def impact_rng(self):
        """Fresh generator over the episode's fixed simulation seed."""
        return np.random.Generator(np.random.PCG64(self.sim_seed))


def _pa_graph(cfg: GeneratorConfig, n, rng):
    m = min(cfg.m, n - 1)
    src, dst = [], []
    degree = np.zeros(n)
    for new in range(m, n):
        weights = degree[:new] + 1.0
        targets = rng.choice(new, size=min(m, new), replace=False, p=weights / weights.sum())
        for t in targets:
            src.append(new)
            dst.append(int(t))
            degree[new] += 1
            degree[t] += 1
    pairs = set(zip(src, dst))
    for u, v in list(pairs):
        if (v, u) not in pairs and rng.random() < cfg.reciprocity:
            pairs.add((v, u))
    pairs = sorted(pairs)
    return SocialGraph(
        n,
        np.array([u for u, _ in pairs], dtype=np.int64),
        np.array([v for _, v in pairs], dtype=np.int64),
        graph_id=f"pa:n={n},m={cfg.m},r={cfg.reciprocity}",
    )


def _small_world_graph(cfg: GeneratorConfig, n, rng):
    k = min(cfg.k, (n - 1) // 2)
    pairs = set()
    for i in range(n):
        for step in range(1, k + 1):
            pairs.add((i, (i + step) % n))
            pairs.add(((i + step) % n, i))
    if cfg.rewire_prob > 0:
        rewired = set()
        for u, v in sorted(pairs):
            if (u, v) in rewired:
                continue
            if rng.random() < cfg.rewire_prob:
                for _ in range(50):
                    w = int(rng.integers(0, n))
                    if w != u and (u, w) not in pairs and (u, w) not in rewired:
                        pairs.discard((u, v))
                        rewired.add((u, w))
                        break
        pairs |= rewired
    pairs = sorted(pairs)
    return SocialGraph(
        n,
        np.array([u for u, _ in pairs], dtype=np.int64),
        np.array([v for _, v in pairs], dtype=np.int64),
        graph_id=f"sw:n={n},k={cfg.k},p={cfg.rewire_prob}",
    )


def _subsample_graph(cfg: GeneratorConfig, rng):
    base = cfg.base_graph
    root = int(rng.integers(0, base.node_count))
    # undirected ball so the sample keeps local structure in both directions
    frontier = {root}
    keep = {root}
    for _ in range(cfg.radius):
        nxt = set()
        for v in frontier:
            nxt.update(int(w) for w in base.out_neighbors(v))
            nxt.update(int(w) for w in base.in_neighbors(v))
        nxt -= keep
        keep |= nxt
        frontier = nxt
    nodes = sorted(keep)
    remap = {v: i for i, v in enumerate(nodes)}
    pairs = []
    for eid in base.alive_edge_ids():
        u, v = base.edge_endpoints(int(eid))
        if u in remap and v in remap:
            pairs.append((remap[u], remap[v]))
    pairs = sorted(set(pairs))
    if not pairs:
        return None  # edgeless ball; reset's retry loop rejects it
    return SocialGraph(
        len(nodes),
        np.array([u for u, _ in pairs], dtype=np.int64),
        np.array([v for _, v in pairs], dtype=np.int64),
        raw_ids=np.array([int(base.raw_ids[v]) for v in nodes], dtype=np.int64),
        symmetric_input=base.symmetric_input,
        graph_id=f"subsample:{base.graph_id}:root={base.raw_ids[root]},radius={cfg.radius}",
    )


def random_graph(gen: GeneratorConfig, rng) -> SocialGraph | None:
    """Draw one graph from the configured family; None when degenerate."""
    n = int(rng.integers(gen.n_min, gen.n_max + 1))
    if gen.family == "preferential_attachment":
        return _pa_graph(gen, n, rng)
    if gen.family == "small_world":
        return _small_world_graph(gen, n, rng)
    return _subsample_graph(gen, rng)


def reset(source_of_graphs, rng, *, sir=SirParams(), budget_fraction=DEFAULT_BUDGET_FRACTION,
          retention=DEFAULT_RETENTION, n_sims=DEFAULT_REWARD_SIMS,
          betweenness_mode="source", community_seed=None, source=None) -> EpisodeState:
    """Start an episode on a fresh graph with a random source.

    ``source_of_graphs`` is a GeneratorConfig, a fixed SocialGraph (copied),
    or a sequence of graphs to sample from. The source is uniform over nodes
    with at least one out-edge unless fixed explicitly (evaluation does that).
    """
    graph = None
    for _ in range(RESET_RETRIES):
        if isinstance(source_of_graphs, GeneratorConfig):
            graph = random_graph(source_of_graphs, rng)
        elif isinstance(source_of_graphs, SocialGraph):
            graph = source_of_graphs.copy()
        else:
            pool = list(source_of_graphs)
            graph = pool[int(rng.integers(0, len(pool)))].copy()
        if graph is not None and graph.alive_edge_count > 0:
            break
        graph = None
    if graph is None:
        raise RuntimeError(f"no usable graph after {RESET_RETRIES} generator draws")

    if source is None:
        candidates = np.flatnonzero(graph.out_degree > 0)
        source = int(candidates[int(rng.integers(0, candidates.size))])
    elif graph.out_degree[source] == 0:
        raise ValueError(f"source {source} has no out-edges")
    sim_seed = int(rng.integers(0, 2**63))
    budget = default_budget(graph.alive_edge_count, budget_fraction)
    communities = detect_communities(
        graph, seed=community_seed if community_seed is not None else int(rng.integers(0, 2**31))
    )
    state = EpisodeState(
        graph=graph,
        line_graph=build_line_graph(graph),
        source=source,
        communities=communities,
        features=compute_features(graph, source, betweenness_mode),
        budget=budget,
        step_index=0,
        eta_prev=0.0,
        sim_seed=sim_seed,
        sir=sir,
        n_sims=n_sims,
        retention=retention,
        betweenness_mode=betweenness_mode,
        plan=DeletionPlan(graph_id=graph.graph_id, source=source, budget=budget),
    )
    state.eta_prev = estimate_impact(graph, source, sir, n_sims, state.impact_rng()).mean_eta
    return state


def step(state: EpisodeState, edge_id):
    """Delete one edge, recompute the observation, return (reward, done).

    The reward is the impact reduction measured with the episode's common
    simulation seeds. Communities stay frozen at their reset-time value.
    """
    if state.step_index >= state.budget:
        raise ValueError("episode budget exhausted")
    if not feasible_mask(state.graph, state.retention)[edge_id]:
        raise ValueError(f"edge {edge_id} is not feasible")
    state.graph.remove_edge(edge_id)
    state.line_graph = build_line_graph(state.graph)
    state.features = compute_features(state.graph, state.source, state.betweenness_mode)
    eta_new = estimate_impact(
        state.graph, state.source, state.sir, state.n_sims, state.impact_rng()
    ).mean_eta
    reward = state.eta_prev - eta_new
    state.eta_prev = eta_new
    state.step_index += 1
    state.plan.edges.append(int(edge_id))
    state.plan.eta_after.append(eta_new)
    done = state.done
    if done and state.step_index < state.budget:
        state.plan.exhausted = True
    return reward, done
