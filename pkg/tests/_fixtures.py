"""Small graph builders and independent brute-force oracles shared by tests."""

import itertools

import numpy as np

from rumorcut.graph import SocialGraph


def graph_from_pairs(n, pairs, symmetric_input=False):
    pairs = list(pairs)
    src = np.array([u for u, _ in pairs], dtype=np.int64)
    dst = np.array([v for _, v in pairs], dtype=np.int64)
    return SocialGraph(n, src, dst, symmetric_input=symmetric_input)


def path_graph(n):
    return graph_from_pairs(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return graph_from_pairs(n, [(i, (i + 1) % n) for i in range(n)])


def symmetric(pairs):
    out = set()
    for u, v in pairs:
        out.add((u, v))
        out.add((v, u))
    return sorted(out)


def star_graph(leaves):
    """Undirected star: center 0, both directions on every spoke."""
    return graph_from_pairs(leaves + 1, symmetric([(0, i + 1) for i in range(leaves)]),
                            symmetric_input=True)


def random_graph(n, n_edges, seed, symmetric_input=False):
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = set()
    while len(pairs) < n_edges:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            pairs.add((int(u), int(v)))
    if symmetric_input:
        return graph_from_pairs(n, symmetric(pairs), symmetric_input=True)
    return graph_from_pairs(n, sorted(pairs))


def alive_pairs(g):
    eids = g.alive_edge_ids()
    return [(int(g.src[e]), int(g.dst[e])) for e in eids]


# -- oracles ---------------------------------------------------------------


def brute_force_line_edges(g):
    """O(|E|^2) double loop over alive edge pairs."""
    eids = list(g.alive_edge_ids())
    out = set()
    for p in eids:
        for q in eids:
            if p != q and g.dst[p] == g.src[q]:
                out.add((int(p), int(q)))
    return out


def floyd_warshall(g):
    n = g.node_count
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, v in alive_pairs(g):
        dist[u, v] = 1.0
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if dist[i, k] + dist[k, j] < dist[i, j]:
                    dist[i, j] = dist[i, k] + dist[k, j]
    return dist


def enumerate_shortest_paths(g, s, t):
    """All shortest s->t paths as node tuples (empty if unreachable)."""
    n = g.node_count
    adj = [[] for _ in range(n)]
    for u, v in alive_pairs(g):
        adj[u].append(v)
    dist = floyd_warshall(g)
    if not np.isfinite(dist[s, t]):
        return []
    paths = []

    def grow(prefix):
        v = prefix[-1]
        if v == t:
            paths.append(tuple(prefix))
            return
        for w in adj[v]:
            if dist[s, w] == len(prefix) and dist[w, t] == dist[s, t] - len(prefix):
                grow(prefix + [w])

    grow([s])
    return paths


def brute_force_betweenness(g, roots="all"):
    """Path-enumeration betweenness; same conventions as the implementation.

    Ordered pairs, endpoints excluded from node scores; all-roots scores
    halved when the graph was ingested as undirected.
    """
    n = g.node_count
    node_scores = np.zeros(n)
    edge_scores = np.zeros(g.edge_count)
    eid_of = {}
    for e in g.alive_edge_ids():
        eid_of[(int(g.src[e]), int(g.dst[e]))] = int(e)
    sources = range(n) if roots == "all" else [roots]
    for s in sources:
        for t in range(n):
            if t == s:
                continue
            paths = enumerate_shortest_paths(g, s, t)
            if not paths:
                continue
            w = 1.0 / len(paths)
            for path in paths:
                for v in path[1:-1]:
                    node_scores[v] += w
                for a, b in zip(path, path[1:]):
                    edge_scores[eid_of[(a, b)]] += w
    if roots == "all" and g.symmetric_input:
        node_scores /= 2.0
        edge_scores /= 2.0
    return node_scores, edge_scores


def undirected_projection(g):
    return sorted({(min(u, v), max(u, v)) for u, v in alive_pairs(g)})


def modularity(g, community_of):
    """Newman modularity of a partition on the undirected projection."""
    und = undirected_projection(g)
    m = len(und)
    deg = np.zeros(g.node_count)
    for u, v in und:
        deg[u] += 1
        deg[v] += 1
    q = 0.0
    for c in set(community_of):
        members = {i for i in range(g.node_count) if community_of[i] == c}
        e_c = sum(1 for u, v in und if u in members and v in members)
        d_c = sum(deg[i] for i in members)
        q += e_c / m - (d_c / (2 * m)) ** 2
    return q


def best_two_partition_modularity(g):
    """Exhaustive best modularity over all 2-partitions (tiny graphs only)."""
    n = g.node_count
    best_q, best_assign = -np.inf, None
    for bits in itertools.product([0, 1], repeat=n - 1):
        assign = (0,) + bits
        if len(set(assign)) < 2:
            continue
        q = modularity(g, assign)
        if q > best_q:
            best_q, best_assign = q, assign
    return best_q, best_assign


def markov_expected_spread(g, source, beta, gamma, tol=1e-13):
    """Exact expected affected fraction by evolving the SIR state distribution.

    Status per node: 0 susceptible, 1 infectious, 2 recovered. Exponential in
    node count; only for very small graphs.
    """
    n = g.node_count
    adj = {i: set(int(v) for v in g.out_neighbors(i)) for i in range(n)}
    start = tuple(1 if v == source else 0 for v in range(n))
    dist = {start: 1.0}
    ek = 0.0
    while dist:
        new_dist = {}
        for state, p in dist.items():
            inf_nodes = [v for v in range(n) if state[v] == 1]
            if not inf_nodes:
                ek += p * sum(1 for v in state if v != 0)
                continue
            sus = [v for v in range(n) if state[v] == 0]
            pinf = {}
            for j in sus:
                c = sum(1 for i in inf_nodes if j in adj[i])
                if c:
                    pinf[j] = 1 - (1 - beta) ** c
            targets = sorted(pinf)
            for inf_bits in itertools.product([0, 1], repeat=len(targets)):
                p_i = 1.0
                for bit, j in zip(inf_bits, targets):
                    p_i *= pinf[j] if bit else (1 - pinf[j])
                if p_i == 0.0:
                    continue
                for rec_bits in itertools.product([0, 1], repeat=len(inf_nodes)):
                    p_r = 1.0
                    for bit, i in zip(rec_bits, inf_nodes):
                        p_r *= gamma if bit else (1 - gamma)
                    if p_r == 0.0:
                        continue
                    ns = list(state)
                    for bit, j in zip(inf_bits, targets):
                        if bit:
                            ns[j] = 1
                    for bit, i in zip(rec_bits, inf_nodes):
                        if bit:
                            ns[i] = 2
                    key = tuple(ns)
                    new_dist[key] = new_dist.get(key, 0.0) + p * p_i * p_r
        dist = {k: v for k, v in new_dist.items() if v > tol}
    return ek / n
