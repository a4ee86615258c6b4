"""Non-learning edge-deletion baselines.

Every method works on a copy of the input graph, honors the same budget and
degree-retention feasibility rule as the learned policy, breaks ties toward
the smallest edge id, and is deterministic given its rng. Plans shorter than
the budget are flagged exhausted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .environment import DeletionPlan
from .graph import SocialGraph, betweenness, dominant_eigenvectors, pagerank
from .policy import DEFAULT_RETENTION, feasible_mask
from .propagation import SirParams, estimate_impact, exact_expected_spread, transmissibility

BASELINE_METHODS = ("hsd", "hsc", "ga", "sa", "pr", "ked", "gbp")


@dataclass(frozen=True)
class BaselineConfig:
    """Knobs for the stochastic baselines; the defaults suit desk scale."""

    sir: SirParams = SirParams()
    ga_population: int = 24
    ga_generations: int = 40
    ga_crossover: float = 0.9
    ga_mutation: float = 0.3
    sa_t0: float = 0.05
    sa_cooling: float = 0.99
    sa_iters: int = 500
    gbp_samples: int = 200
    gbp_pool: int | None = None     # None: evaluate every feasible edge
    exact_fitness: bool = False     # GA/SA/GBP use the exact tiny-graph oracle
    fitness_sims: int = 300

    def __post_init__(self):
        if min(self.ga_population, self.ga_generations, self.sa_iters,
               self.fitness_sims) < 1:
            raise ValueError("population, generations, iterations, sims must be >= 1")
        if self.gbp_samples < 1:
            raise ValueError("gbp needs at least one percolation sample")
        if not 0.0 < self.sa_cooling < 1.0:
            raise ValueError("cooling factor must be in (0, 1)")
        if self.sa_t0 <= 0:
            raise ValueError("initial temperature must be positive")
        if not 0.0 <= self.ga_crossover <= 1.0 or not 0.0 <= self.ga_mutation <= 1.0:
            raise ValueError("crossover/mutation rates must be in [0, 1]")


def _new_plan(g, s, d):
    return DeletionPlan(graph_id=g.graph_id, source=s, budget=d)


def _finish(plan, d):
    plan.exhausted = len(plan.edges) < d
    return plan


def _iterative_delete(g: SocialGraph, s, d, retention, score_fn):
    """Delete the feasible edge maximizing score_fn(graph), d times."""
    work = g.copy()
    plan = _new_plan(g, s, d)
    for _ in range(d):
        mask = feasible_mask(work, retention)
        if not mask.any():
            break
        scores = score_fn(work)
        scores = np.where(mask, scores, -np.inf)
        eid = int(np.argmax(scores))  # argmax returns the first (smallest) id
        work.remove_edge(eid)
        plan.edges.append(eid)
    return _finish(plan, d)


def hsd(g: SocialGraph, s, d, retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Heuristic search by degree: endpoint total-degree sum, recomputed."""

    def score(work):
        degree = work.total_degree().astype(np.float64)
        return degree[work.src] + degree[work.dst]

    return _iterative_delete(g, s, d, retention, score)


def hsc(g: SocialGraph, s, d, retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Heuristic search by global edge betweenness, recomputed each step."""

    def score(work):
        _, edge_scores = betweenness(work, roots="all")
        return edge_scores

    return _iterative_delete(g, s, d, retention, score)


def pagerank_removal(g: SocialGraph, s, d, retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Static ranking by PR(tail) * PR(head); one PageRank computation."""
    pr = pagerank(g)
    scores = pr[g.src] * pr[g.dst]
    return _static_ranking_plan(g, s, d, retention, scores)


def ked(g: SocialGraph, s, d, retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Static ranking by left/right dominant eigenscores u(tail) * v(head)."""
    u, v, _ = dominant_eigenvectors(g)
    scores = u[g.src] * v[g.dst]
    return _static_ranking_plan(g, s, d, retention, scores)


def _static_ranking_plan(g, s, d, retention, scores):
    work = g.copy()
    plan = _new_plan(g, s, d)
    order = np.lexsort((np.arange(g.edge_count), -scores))
    for eid in order:
        if len(plan.edges) == d:
            break
        if feasible_mask(work, retention)[eid]:
            work.remove_edge(int(eid))
            plan.edges.append(int(eid))
    return _finish(plan, d)


# -- subset-search helpers (GA / SA) ----------------------------------------


def _subset_feasible(g: SocialGraph, edges, retention):
    """Whole-set retention check; order-independent, matches the step mask."""
    out_loss = np.zeros(g.node_count, dtype=np.int64)
    in_loss = np.zeros(g.node_count, dtype=np.int64)
    for eid in edges:
        out_loss[g.src[eid]] += 1
        in_loss[g.dst[eid]] += 1
    out_ok = (g.out_degree - out_loss) + 1e-9 >= retention * g.original_out_degree
    in_ok = (g.in_degree - in_loss) + 1e-9 >= retention * g.original_in_degree
    return bool(out_ok.all() and in_ok.all())


def _random_feasible_subset(g, d, retention, rng, attempts=30):
    candidates = np.flatnonzero(feasible_mask(g, retention))
    best = []
    for _ in range(attempts):
        picked = []
        out_loss = np.zeros(g.node_count, dtype=np.int64)
        in_loss = np.zeros(g.node_count, dtype=np.int64)
        for eid in rng.permutation(candidates):
            u, v = int(g.src[eid]), int(g.dst[eid])
            if (g.out_degree[u] - out_loss[u] - 1) + 1e-9 < retention * g.original_out_degree[u]:
                continue
            if (g.in_degree[v] - in_loss[v] - 1) + 1e-9 < retention * g.original_in_degree[v]:
                continue
            picked.append(int(eid))
            out_loss[u] += 1
            in_loss[v] += 1
            if len(picked) == d:
                return picked
        if len(picked) > len(best):
            best = picked
    return best


class _SubsetFitness:
    """Memoized fitness of deletion subsets: negative post-deletion impact.

    One evaluation seed fixed for the whole run, so identical subsets always
    rank identically.
    """

    def __init__(self, g, s, cfg: BaselineConfig, seed):
        self.g = g
        self.s = s
        self.cfg = cfg
        self.seed = seed
        self.cache = {}

    def __call__(self, edges):
        key = frozenset(int(e) for e in edges)
        if key in self.cache:
            return self.cache[key]
        work = self.g.copy()
        for eid in sorted(key):
            work.remove_edge(eid)
        if self.cfg.exact_fitness:
            eta = exact_expected_spread(work, self.s, self.cfg.sir)
        else:
            rng = np.random.Generator(np.random.PCG64(self.seed))
            eta = estimate_impact(work, self.s, self.cfg.sir,
                                  self.cfg.fitness_sims, rng).mean_eta
        self.cache[key] = -eta
        return -eta


def ga(g: SocialGraph, s, d, cfg: BaselineConfig, rng,
       retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Genetic search over feasible deletion subsets of size d."""
    seed = int(rng.integers(0, 2**63))
    first = _random_feasible_subset(g, d, retention, rng)
    if not first:
        raise ValueError("no feasible deletion subset exists")
    d_eff = len(first)  # shorter than d only when the mask caps deletions
    fitness = _SubsetFitness(g, s, cfg, seed)
    population = [sorted(first)]
    while len(population) < cfg.ga_population:
        member = _random_feasible_subset(g, d_eff, retention, rng)
        population.append(sorted(member if len(member) == d_eff else first))
    candidates = np.flatnonzero(feasible_mask(g, retention))

    def tournament():
        a, b = rng.integers(0, len(population), size=2)
        pa, pb = population[int(a)], population[int(b)]
        return pa if fitness(pa) >= fitness(pb) else pb

    def repair(child):
        child = list(dict.fromkeys(child))
        while len(child) > d_eff or not _subset_feasible(g, child, retention):
            if not child:
                break
            child.pop(int(rng.integers(0, len(child))))
        pool = rng.permutation(candidates)
        for eid in pool:
            if len(child) == d_eff:
                break
            if int(eid) in child:
                continue
            if _subset_feasible(g, child + [int(eid)], retention):
                child.append(int(eid))
        return sorted(child) if len(child) == d_eff else None

    best = max(population, key=fitness)
    for _ in range(cfg.ga_generations):
        next_gen = [best]
        while len(next_gen) < cfg.ga_population:
            p1, p2 = tournament(), tournament()
            if rng.random() < cfg.ga_crossover:
                union = sorted(set(p1) | set(p2))
                keep = [e for e in union if rng.random() < 0.5]
                child = repair(keep)
            else:
                child = list(p1)
            if child is None:
                child = list(p1)
            if rng.random() < cfg.ga_mutation and child:
                mutated = list(child)
                mutated.pop(int(rng.integers(0, len(mutated))))
                mutated = repair(mutated)
                if mutated is not None:
                    child = mutated
            next_gen.append(sorted(child))
        population = next_gen
        generation_best = max(population, key=fitness)
        if fitness(generation_best) > fitness(best):
            best = generation_best
    plan = _new_plan(g, s, d)
    plan.edges = sorted(int(e) for e in best)
    return _finish(plan, d)


def metropolis_accepts(delta, temperature, u):
    """Accept a move that worsens fitness by ``delta`` at this temperature."""
    if delta <= 0:
        return True
    if temperature <= 0:
        return False
    return u < np.exp(-delta / temperature)


def sa(g: SocialGraph, s, d, cfg: BaselineConfig, rng,
       retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Simulated annealing with single-edge swap moves and geometric cooling."""
    seed = int(rng.integers(0, 2**63))
    current = _random_feasible_subset(g, d, retention, rng)
    if not current:
        raise ValueError("no feasible deletion subset exists")
    fitness = _SubsetFitness(g, s, cfg, seed)
    candidates = np.flatnonzero(feasible_mask(g, retention))
    current = sorted(current)
    current_fit = fitness(current)
    best, best_fit = list(current), current_fit
    temperature = cfg.sa_t0
    for _ in range(cfg.sa_iters):
        neighbor = None
        for _ in range(30):
            trial = list(current)
            trial.pop(int(rng.integers(0, len(trial))))
            eid = int(candidates[int(rng.integers(0, candidates.size))])
            if eid in trial:
                continue
            trial.append(eid)
            if _subset_feasible(g, trial, retention):
                neighbor = sorted(trial)
                break
        if neighbor is not None:
            neighbor_fit = fitness(neighbor)
            delta = current_fit - neighbor_fit  # positive when neighbor is worse
            if metropolis_accepts(delta, temperature, rng.random()):
                current, current_fit = neighbor, neighbor_fit
                if current_fit > best_fit:
                    best, best_fit = list(current), current_fit
        temperature *= cfg.sa_cooling
    plan = _new_plan(g, s, d)
    plan.edges = sorted(int(e) for e in best)
    return _finish(plan, d)


def gbp(g: SocialGraph, s, d, cfg: BaselineConfig, rng,
        retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Greedy deletion scored by bond-percolation reachability from the source.

    Each step shares one batch of percolation samples across the candidate
    pool (the top feasible edges by source-rooted edge betweenness), or uses
    the exact tiny-graph oracle in exact mode.
    """
    work = g.copy()
    plan = _new_plan(g, s, d)
    t_open = transmissibility(cfg.sir)
    for _ in range(d):
        mask = feasible_mask(work, retention)
        feasible = np.flatnonzero(mask)
        if feasible.size == 0:
            break
        if cfg.gbp_pool is not None and feasible.size > cfg.gbp_pool:
            _, edge_scores = betweenness(work, roots=s)
            order = np.lexsort((feasible, -edge_scores[feasible]))
            pool = feasible[order[: cfg.gbp_pool]]
            pool = np.sort(pool)
        else:
            pool = feasible
        if cfg.exact_fitness:
            spreads = []
            for eid in pool:
                trial = work.copy()
                trial.remove_edge(int(eid))
                spreads.append(exact_expected_spread(trial, s, cfg.sir))
            spreads = np.array(spreads)
        else:
            indptr, indices, eids = work.out_csr()
            slot_of = {int(e): i for i, e in enumerate(eids)}
            patterns = rng.random((cfg.gbp_samples, eids.size)) < t_open
            cand_slots = np.array([slot_of[int(e)] for e in pool], dtype=np.int64)
            sums = _kernels.percolation_candidate_sums(
                indptr, indices, work.node_count, s, patterns, cand_slots
            )
            spreads = sums / cfg.gbp_samples
        eid = int(pool[int(np.argmin(spreads))])
        work.remove_edge(eid)
        plan.edges.append(eid)
    return _finish(plan, d)


def run_baseline(method, g, s, d, cfg: BaselineConfig, rng,
                 retention=DEFAULT_RETENTION) -> DeletionPlan:
    """Dispatch a baseline by tag; deterministic given the rng."""
    if method == "hsd":
        return hsd(g, s, d, retention)
    if method == "hsc":
        return hsc(g, s, d, retention)
    if method == "pr":
        return pagerank_removal(g, s, d, retention)
    if method == "ked":
        return ked(g, s, d, retention)
    if method == "ga":
        return ga(g, s, d, cfg, rng, retention)
    if method == "sa":
        return sa(g, s, d, cfg, rng, retention)
    if method == "gbp":
        return gbp(g, s, d, cfg, rng, retention)
    raise ValueError(f"unknown baseline {method!r}; expected one of {BASELINE_METHODS}")
