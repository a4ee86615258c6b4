import numpy as np
import pytest

from rumorcut.baselines import (
    BASELINE_METHODS,
    BaselineConfig,
    ga,
    gbp,
    hsc,
    hsd,
    ked,
    metropolis_accepts,
    pagerank_removal,
    run_baseline,
    sa,
)
from rumorcut.graph import dominant_eigenvectors
from rumorcut.policy import feasible_mask
from rumorcut.propagation import SirParams, exact_expected_spread

from _fixtures import graph_from_pairs, random_graph, symmetric


def rng_of(seed):
    return np.random.Generator(np.random.PCG64(seed))


def exhaustive_best_edge(g, s, params, retention):
    """Feasible single edge whose deletion minimizes the exact spread."""
    best_eid, best_eta = None, np.inf
    for eid in np.flatnonzero(feasible_mask(g, retention)):
        work = g.copy()
        work.remove_edge(int(eid))
        eta = exact_expected_spread(work, s, params)
        if eta < best_eta - 1e-15:
            best_eid, best_eta = int(eid), eta
    return best_eid, best_eta


def tiny_fixture(seed):
    """Random tiny graphs with at least one feasible edge at 30% retention."""
    while True:
        g = random_graph(6, 12, seed=seed)
        if feasible_mask(g, 0.3).any() and g.out_degree[0] > 0:
            return g
        seed += 1000


EXACT_CFG = BaselineConfig(sir=SirParams(beta=0.3, gamma=0.5), exact_fitness=True,
                           ga_population=16, ga_generations=25, sa_iters=300)


class TestHsd:
    def test_hub_edges_deleted_first(self):
        # symmetric star plus a leaf cycle so the retention rule has slack
        pairs = symmetric([(0, i) for i in range(1, 5)]
                          + [(1, 2), (2, 3), (3, 4), (4, 1)])
        g = graph_from_pairs(5, pairs, symmetric_input=True)
        plan = hsd(g, 0, d=2, retention=0.6)
        for eid in plan.edges:
            u, v = g.edge_endpoints(eid)
            assert 0 in (u, v)

    def test_regular_graph_ties_break_to_smallest_id(self):
        # symmetrized two-neighbor ring: every endpoint degree sum equal
        pairs = set()
        for i in range(8):
            for s_ in (1, 2):
                pairs.add((i, (i + s_) % 8))
                pairs.add(((i + s_) % 8, i))
        g = graph_from_pairs(8, sorted(pairs))
        plan = hsd(g, 0, d=1, retention=0.6)
        assert plan.edges == [0]

    def test_matches_brute_force_first_pick(self):
        for seed in range(4):
            g = random_graph(12, 60, seed=seed)
            plan = hsd(g, 0, d=1, retention=0.5)
            degree = g.total_degree()
            scores = np.where(feasible_mask(g, 0.5),
                              degree[g.src] + degree[g.dst], -np.inf)
            assert plan.edges[0] == int(np.argmax(scores))


class TestHsc:
    def test_barbell_bridge_first(self):
        clique_a = [(i, j) for i in range(4) for j in range(4) if i != j]
        clique_b = [(i, j) for i in range(4, 8) for j in range(4, 8) if i != j]
        bridge = [(0, 4), (4, 0)]
        g = graph_from_pairs(8, sorted(clique_a + clique_b + bridge),
                             symmetric_input=True)
        plan = hsc(g, 0, d=2, retention=0.5)
        got = {g.edge_endpoints(e) for e in plan.edges}
        assert got == {(0, 4), (4, 0)}

    def test_recomputes_each_step(self):
        g = random_graph(10, 40, seed=3)
        plan = hsc(g, 0, d=3, retention=0.4)
        assert len(set(plan.edges)) == len(plan.edges)


class TestStaticRankings:
    def test_pagerank_symmetric_complete_graph_walks_ids(self):
        pairs = [(i, j) for i in range(4) for j in range(4) if i != j]
        g = graph_from_pairs(4, pairs)
        plan = pagerank_removal(g, 0, d=2, retention=0.6)
        # all scores tie; rank order is edge id, mask forbids repeating node 0
        assert plan.edges == [0, 3]

    def test_pagerank_prefers_hub_edges(self):
        pairs = symmetric([(0, i) for i in range(1, 6)] + [(1, 2), (3, 4)])
        g = graph_from_pairs(6, pairs, symmetric_input=True)
        plan = pagerank_removal(g, 0, d=1, retention=0.3)
        u, v = g.edge_endpoints(plan.edges[0])
        assert 0 in (u, v)

    def test_ked_scores_match_numpy_eigenvectors(self):
        g = random_graph(7, 25, seed=5)
        u, v, lam = dominant_eigenvectors(g)
        a = np.zeros((7, 7))
        for eid in g.alive_edge_ids():
            i, j = g.edge_endpoints(int(eid))
            a[i, j] = 1.0
        vals, vecs = np.linalg.eig(a)
        k = int(np.argmax(np.abs(vals)))
        right = np.abs(np.real(vecs[:, k]))
        right /= np.linalg.norm(right)
        assert np.allclose(v, right, atol=1e-6)
        vals_l, vecs_l = np.linalg.eig(a.T)
        k = int(np.argmax(np.abs(vals_l)))
        left = np.abs(np.real(vecs_l[:, k]))
        left /= np.linalg.norm(left)
        assert np.allclose(u, left, atol=1e-6)

    def test_ked_symmetric_uses_same_vector_both_sides(self):
        g = random_graph(8, 14, seed=6, symmetric_input=True)
        u, v, _ = dominant_eigenvectors(g)
        assert np.allclose(u, v, atol=1e-8)
        plan = ked(g, 0, d=2, retention=0.3)
        assert len(plan.edges) == 2


class TestMetropolis:
    def test_zero_temperature_is_greedy(self):
        for delta in (1e-12, 0.5, 10.0):
            assert not metropolis_accepts(delta, 0.0, u=0.0)
        assert metropolis_accepts(-0.1, 0.0, u=0.999)
        assert metropolis_accepts(0.0, 0.0, u=0.999)

    def test_acceptance_probability(self):
        rng = rng_of(0)
        delta, temperature = 0.2, 0.5
        p = np.exp(-delta / temperature)
        n = 200000
        hits = sum(metropolis_accepts(delta, temperature, rng.random()) for _ in range(n))
        sigma = np.sqrt(p * (1 - p) / n)
        assert abs(hits / n - p) < 3 * sigma


class TestSubsetSearch:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_ga_d1_finds_exact_best(self, seed):
        g = tiny_fixture(seed)
        best_eid, _ = exhaustive_best_edge(g, 0, EXACT_CFG.sir, 0.3)
        plan = ga(g, 0, 1, EXACT_CFG, rng_of(seed), retention=0.3)
        assert plan.edges == [best_eid]

    def test_sa_d1_finds_exact_best_on_most_seeds(self):
        g = tiny_fixture(7)
        best_eid, _ = exhaustive_best_edge(g, 0, EXACT_CFG.sir, 0.3)
        hits = sum(
            sa(g, 0, 1, EXACT_CFG, rng_of(seed), retention=0.3).edges == [best_eid]
            for seed in range(20)
        )
        assert hits >= 19

    def test_ga_identical_population_zero_mutation_is_stable(self):
        g = tiny_fixture(3)
        cfg = BaselineConfig(sir=EXACT_CFG.sir, exact_fitness=True, ga_population=6,
                             ga_generations=5, ga_crossover=0.0, ga_mutation=0.0)
        a = ga(g, 0, 1, cfg, rng_of(9), retention=0.3)
        b = ga(g, 0, 1, cfg, rng_of(9), retention=0.3)
        assert a.edges == b.edges

    @pytest.mark.parametrize("method", ["ga", "sa", "gbp"])
    def test_seeded_reproducibility(self, method):
        g = random_graph(12, 50, seed=8)
        cfg = BaselineConfig(fitness_sims=50, gbp_samples=60, ga_generations=5,
                             sa_iters=60)
        a = run_baseline(method, g, 0, 3, cfg, rng_of(4), retention=0.4)
        b = run_baseline(method, g, 0, 3, cfg, rng_of(4), retention=0.4)
        assert a.edges == b.edges

    def test_fitness_consistency_between_ga_and_sa(self):
        from rumorcut.baselines import _SubsetFitness

        g = random_graph(10, 40, seed=9)
        cfg = BaselineConfig(fitness_sims=80)
        fa = _SubsetFitness(g, 0, cfg, seed=123)
        fb = _SubsetFitness(g, 0, cfg, seed=123)
        subsets = [[0, 5], [1, 2], [3], [0, 5]]
        for s_ in subsets:
            assert fa(s_) == fb(s_)

    def test_no_feasible_subset_raises(self):
        g = graph_from_pairs(3, [(0, 1), (1, 2)])  # nothing deletable at 60%
        with pytest.raises(ValueError, match="no feasible"):
            ga(g, 0, 1, EXACT_CFG, rng_of(0))
        with pytest.raises(ValueError, match="no feasible"):
            sa(g, 0, 1, EXACT_CFG, rng_of(0))


class TestGbp:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_exact_mode_d1_matches_exhaustive(self, seed):
        g = tiny_fixture(seed + 20)
        best_eid, _ = exhaustive_best_edge(g, 0, EXACT_CFG.sir, 0.3)
        plan = gbp(g, 0, 1, EXACT_CFG, rng_of(seed), retention=0.3)
        assert plan.edges == [best_eid]

    def test_bridge_upstream_of_big_component_wins(self):
        # 2-cycle {0,1}, bridge 1->2 into a triangle clique {2,3,4}
        pairs = [(0, 1), (1, 0), (1, 2)] + [(i, j) for i in (2, 3, 4)
                                            for j in (2, 3, 4) if i != j]
        g = graph_from_pairs(5, sorted(pairs))
        params = SirParams(beta=0.6, gamma=0.5)
        cfg = BaselineConfig(sir=params, exact_fitness=True)
        bridge = next(int(e) for e in g.alive_edge_ids()
                      if g.edge_endpoints(int(e)) == (1, 2))
        # oracle confirms the bridge is the unique best feasible deletion
        best_eid, best_eta = exhaustive_best_edge(g, 0, params, 0.3)
        assert best_eid == bridge
        plan = gbp(g, 0, 1, cfg, rng_of(0), retention=0.3)
        assert plan.edges == [bridge]

    def test_sampling_mode_close_to_exact_ranking(self):
        g = tiny_fixture(31)
        cfg = BaselineConfig(sir=EXACT_CFG.sir, gbp_samples=4000)
        plan_sampled = gbp(g, 0, 1, cfg, rng_of(5), retention=0.3)
        best_eid, best_eta = exhaustive_best_edge(g, 0, EXACT_CFG.sir, 0.3)
        work = g.copy()
        work.remove_edge(plan_sampled.edges[0])
        eta = exact_expected_spread(work, 0, EXACT_CFG.sir)
        # sampled pick may differ but must be near-optimal
        assert eta <= best_eta + 0.05

    def test_pool_restriction_applies(self):
        g = random_graph(14, 70, seed=11)
        cfg = BaselineConfig(gbp_samples=60, gbp_pool=4)
        plan = gbp(g, 0, 2, cfg, rng_of(6), retention=0.4)
        assert len(plan.edges) == 2


class TestCompliance:
    @pytest.mark.parametrize("method", BASELINE_METHODS)
    def test_budget_and_retention(self, method):
        g = random_graph(20, 120, seed=13)
        d = 12
        cfg = BaselineConfig(fitness_sims=30, gbp_samples=40, ga_generations=4,
                             ga_population=8, sa_iters=40)
        plan = run_baseline(method, g, 0, d, cfg, rng_of(7), retention=0.6)
        assert len(plan.edges) <= d
        assert len(plan.edges) == len(set(plan.edges))
        if len(plan.edges) < d:
            assert plan.exhausted
        work = g.copy()
        for eid in plan.edges:
            assert feasible_mask(work, 0.6)[eid]
            work.remove_edge(eid)
        assert np.all(work.out_degree + 1e-9 >= 0.6 * work.original_out_degree)
        assert np.all(work.in_degree + 1e-9 >= 0.6 * work.original_in_degree)

    def test_unknown_method_rejected(self):
        g = random_graph(8, 20, seed=1)
        with pytest.raises(ValueError, match="unknown baseline"):
            run_baseline("drln", g, 0, 1, BaselineConfig(), rng_of(0))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="percolation sample"):
            BaselineConfig(gbp_samples=0)
        with pytest.raises(ValueError, match="cooling"):
            BaselineConfig(sa_cooling=1.0)
        with pytest.raises(ValueError, match="temperature"):
            BaselineConfig(sa_t0=0.0)
