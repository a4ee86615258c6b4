import numpy as np
import pytest

from rumorcut.errors import EdgeListParseError
from rumorcut.graph import (
    betweenness,
    bfs_distances,
    build_line_graph,
    closeness,
    detect_communities,
    dominant_eigenvectors,
    load_edge_list,
    pagerank,
)

from _fixtures import (
    alive_pairs,
    best_two_partition_modularity,
    brute_force_betweenness,
    brute_force_line_edges,
    cycle_graph,
    floyd_warshall,
    graph_from_pairs,
    path_graph,
    random_graph,
    star_graph,
    symmetric,
)


class TestLoadEdgeList:
    def test_directed_literal(self):
        g = load_edge_list("0 1\n1 2\n", directed=True)
        assert g.node_count == 3
        assert alive_pairs(g) == [(0, 1), (1, 2)]

    def test_undirected_symmetrizes_and_remaps(self):
        g = load_edge_list("# c\n5 7\n", directed=False)
        assert g.node_count == 2
        assert alive_pairs(g) == [(0, 1), (1, 0)]
        assert list(g.raw_ids) == [5, 7]
        assert g.symmetric_input

    def test_undirected_pair_count_halves(self):
        rng = np.random.Generator(np.random.PCG64(7))
        pairs = {(int(a), int(b)) for a, b in rng.integers(0, 40, size=(120, 2)) if a != b}
        pairs = {(min(u, v), max(u, v)) for u, v in pairs}
        text = "\n".join(f"{u} {v}" for u, v in sorted(pairs))
        g = load_edge_list(text, directed=False)
        assert g.alive_edge_count == 2 * len(pairs)

    def test_duplicates_collapse_self_loops_drop(self):
        g = load_edge_list("1 2\n1 2\n3 3\n2 1\n", directed=True)
        assert g.node_count == 3
        assert alive_pairs(g) == [(0, 1), (1, 0)]

    def test_malformed_line_names_line_number(self):
        with pytest.raises(EdgeListParseError, match="line 3"):
            load_edge_list("0 1\n1 2\nnope\n", directed=True)
        with pytest.raises(EdgeListParseError, match="line 2"):
            load_edge_list("0 1\n1 2 3\n", directed=True)

    def test_empty_graph_is_an_error(self):
        with pytest.raises(ValueError, match="empty"):
            load_edge_list("# only comments\n", directed=True)

    def test_crlf_accepted(self):
        g = load_edge_list("0 1\r\n1 2\r\n", directed=True)
        assert g.alive_edge_count == 2


class TestSocialGraph:
    def test_rejects_self_loops_and_duplicates(self):
        with pytest.raises(ValueError, match="self-loop"):
            graph_from_pairs(2, [(0, 0)])
        with pytest.raises(ValueError, match="duplicate"):
            graph_from_pairs(2, [(0, 1), (0, 1)])

    def test_remove_edge_updates_views_not_originals(self):
        g = path_graph(3)
        eid = g.out_edges(0)[0]
        g.remove_edge(eid)
        assert g.alive_edge_count == 1
        assert list(g.out_neighbors(0)) == []
        assert g.original_out_degree[0] == 1
        assert g.out_degree[0] == 0
        d = bfs_distances(g, 0)
        assert d[0] == 0 and np.isinf(d[1]) and np.isinf(d[2])

    def test_remove_dead_edge_is_contract_violation(self):
        g = path_graph(3)
        g.remove_edge(0)
        with pytest.raises(ValueError, match="not alive"):
            g.remove_edge(0)

    def test_replaying_deletions_reproduces_adjacency(self):
        g = random_graph(20, 60, seed=3)
        rng = np.random.Generator(np.random.PCG64(0))
        plan = [int(e) for e in rng.choice(g.alive_edge_ids(), size=10, replace=False)]
        for e in plan:
            g.remove_edge(e)
        fresh = random_graph(20, 60, seed=3)
        for e in plan:
            fresh.remove_edge(e)
        for node in range(20):
            assert list(g.out_neighbors(node)) == list(fresh.out_neighbors(node))
            assert list(g.in_neighbors(node)) == list(fresh.in_neighbors(node))

    def test_degree_invariant_under_deletions(self):
        g = random_graph(15, 40, seed=5)
        rng = np.random.Generator(np.random.PCG64(1))
        for _ in range(20):
            eids = g.alive_edge_ids()
            g.remove_edge(int(rng.choice(eids)))
            assert np.all(g.out_degree <= g.original_out_degree)
            assert np.all(g.in_degree <= g.original_in_degree)
            assert g.out_degree.sum() == g.alive_edge_count


class TestLineGraph:
    def test_path(self):
        lg = build_line_graph(path_graph(3))
        assert lg.line_node_count == 2
        assert lg.line_edges.shape == (1, 2)

    def test_directed_cycle_rotates(self):
        lg = build_line_graph(cycle_graph(3))
        assert lg.line_node_count == 3
        got = {(int(p), int(q)) for p, q in lg.line_edges}
        assert len(got) == 3
        # every line node has exactly one in and one out line edge
        outs = sorted(p for p, _ in got)
        ins = sorted(q for _, q in got)
        assert outs == [0, 1, 2] and ins == [0, 1, 2]

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_brute_force(self, seed):
        g = random_graph(50, 180, seed=seed)
        # also exercise deletions
        rng = np.random.Generator(np.random.PCG64(seed))
        for _ in range(15):
            g.remove_edge(int(rng.choice(g.alive_edge_ids())))
        lg = build_line_graph(g)
        got = {(int(p), int(q)) for p, q in lg.line_edges}
        assert got == brute_force_line_edges(g)
        assert lg.line_node_count == g.alive_edge_count
        # primal_edge_of is the alive edges in id order
        assert list(lg.primal_edge_of) == sorted(int(e) for e in g.alive_edge_ids())


class TestBfs:
    def test_path_forward_and_backward(self):
        g = path_graph(3)
        assert list(bfs_distances(g, 0)) == [0, 1, 2]
        d = bfs_distances(g, 2)
        assert np.isinf(d[0]) and np.isinf(d[1]) and d[2] == 0

    @pytest.mark.parametrize("seed", [11, 12, 13])
    def test_matches_floyd_warshall(self, seed):
        g = random_graph(12, 30, seed=seed)
        oracle = floyd_warshall(g)
        for root in range(g.node_count):
            assert np.array_equal(bfs_distances(g, root), oracle[root])


class TestBetweenness:
    def test_undirected_star_center(self):
        g = star_graph(4)
        node_scores, _ = betweenness(g, roots="all")
        assert node_scores[0] == pytest.approx(6.0)  # (4*3)/2 leaf pairs
        assert np.allclose(node_scores[1:], 0.0)

    def test_rooted_path(self):
        g = path_graph(3)
        node_scores, edge_scores = betweenness(g, roots=0)
        assert node_scores[1] == pytest.approx(1.0)
        eid01 = int(g.out_edges(0)[0])
        eid12 = int(g.out_edges(1)[0])
        assert edge_scores[eid01] == pytest.approx(2.0)  # paths to 1 and 2
        assert edge_scores[eid12] == pytest.approx(1.0)

    @pytest.mark.parametrize("seed,sym", [(0, False), (1, False), (2, True), (3, True)])
    def test_matches_enumeration_all_roots(self, seed, sym):
        g = random_graph(8, 14, seed=seed, symmetric_input=sym)
        node_scores, edge_scores = betweenness(g, roots="all")
        exp_nodes, exp_edges = brute_force_betweenness(g, roots="all")
        assert np.allclose(node_scores, exp_nodes, atol=1e-9)
        assert np.allclose(edge_scores, exp_edges, atol=1e-9)

    @pytest.mark.parametrize("seed", [4, 5])
    def test_matches_enumeration_rooted(self, seed):
        g = random_graph(8, 16, seed=seed)
        for s in range(g.node_count):
            node_scores, edge_scores = betweenness(g, roots=s)
            exp_nodes, exp_edges = brute_force_betweenness(g, roots=s)
            assert np.allclose(node_scores, exp_nodes, atol=1e-9)
            assert np.allclose(edge_scores, exp_edges, atol=1e-9)


class TestCloseness:
    def test_path_harmonic_values(self):
        g = path_graph(3)
        # node 0 reaches 1 at d=1 and 2 at d=2
        assert np.allclose(closeness(g), [1.0 + 0.5, 1.0, 0.0])

    def test_matches_distance_oracle(self):
        g = random_graph(10, 25, seed=9)
        dist = floyd_warshall(g)
        expected = np.zeros(10)
        for i in range(10):
            finite = dist[i][np.isfinite(dist[i])]
            expected[i] = sum(1.0 / d for d in finite if d > 0)
        assert np.allclose(closeness(g), expected, atol=1e-12)


class TestPagerank:
    def test_cycle_is_uniform(self):
        pr = pagerank(cycle_graph(3))
        assert np.allclose(pr, 1.0 / 3.0, atol=1e-9)
        assert pr.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_fixed_point_residual(self, seed):
        # no dangling nodes: add a cycle so every node has an out-edge
        n = 12
        extra = {(i, (i + 1) % n) for i in range(n)}
        rng = np.random.Generator(np.random.PCG64(seed))
        extra |= {(int(a), int(b)) for a, b in rng.integers(0, n, size=(30, 2)) if a != b}
        g = graph_from_pairs(n, sorted(extra))
        tol = 1e-10
        pr = pagerank(g, damping=0.85, tol=tol)
        through = np.zeros(n)
        for u, v in alive_pairs(g):
            through[v] += pr[u] / g.out_degree[u]
        residual = np.abs(pr - 0.85 * through - 0.15 / n).sum()
        assert residual < 10 * tol

    def test_dangling_mass_redistributed(self):
        g = path_graph(4)  # node 3 dangles
        pr = pagerank(g)
        assert pr.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(pr > 0)


class TestDominantEigenvectors:
    def test_symmetric_graph_left_equals_right(self):
        g = random_graph(8, 12, seed=2, symmetric_input=True)
        u, v, lam = dominant_eigenvectors(g)
        assert np.allclose(u, v, atol=1e-8)

    def test_residual_and_charpoly_oracle(self):
        g = random_graph(6, 14, seed=4)
        u, v, lam = dominant_eigenvectors(g)
        a = np.zeros((6, 6))
        for s, t in alive_pairs(g):
            a[s, t] = 1.0
        assert np.linalg.norm(a @ v - lam * v) < 1e-8
        assert np.linalg.norm(u @ a - lam * u) < 1e-8
        roots = np.roots(np.poly(a))
        assert abs(lam - max(abs(r) for r in roots)) < 1e-6

    def test_unit_norm_and_nonnegative(self):
        g = random_graph(7, 20, seed=6)
        u, v, lam = dominant_eigenvectors(g)
        assert np.linalg.norm(u) == pytest.approx(1.0)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert np.all(v >= -1e-12) and np.all(u >= -1e-12)


class TestCommunities:
    def _two_cliques(self):
        pairs = []
        for block in (range(5), range(5, 10)):
            pairs += [(i, j) for i in block for j in block if i < j]
        pairs.append((0, 5))
        return graph_from_pairs(10, symmetric(pairs), symmetric_input=True)

    def test_two_cliques_split(self):
        g = self._two_cliques()
        assignment = detect_communities(g, seed=0)
        assert assignment.community_count == 2
        got = tuple(assignment.community_of)
        _, best = best_two_partition_modularity(g)
        assert got == best

    def test_single_clique(self):
        pairs = [(i, j) for i in range(5) for j in range(5) if i != j]
        g = graph_from_pairs(5, pairs, symmetric_input=True)
        assert detect_communities(g, seed=1).community_count == 1

    def test_deterministic_given_seed(self):
        g = random_graph(30, 90, seed=8, symmetric_input=True)
        a = detect_communities(g, seed=42)
        b = detect_communities(g, seed=42)
        assert np.array_equal(a.community_of, b.community_of)

    def test_partition_invariants(self):
        g = random_graph(25, 60, seed=9)
        assignment = detect_communities(g, seed=3)
        seen = np.zeros(g.node_count, dtype=int)
        for c, members in enumerate(assignment.community_members):
            for v in members:
                seen[v] += 1
                assert assignment.community_of[v] == c
        assert np.all(seen == 1)
        assert set(assignment.community_of) == set(range(assignment.community_count))
