"""Directed social-graph data model, edge-list ingestion, and structural algorithms.

Edges carry dense integer ids (their position in the edge arrays) and an
alive flag; deletion never renumbers ids. Original degrees are frozen at
construction so the degree-retention feasibility rule can always be checked
against the intact graph.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EdgeListParseError, PowerIterationError


class SocialGraph:
    """Directed graph over dense node ids [0, node_count) with removable edges.

    Mutation is limited to :meth:`remove_edge`; every read view reflects the
    alive edge set only. ``raw_ids`` maps dense ids back to the ids found in
    the source file (identity for generated graphs).
    """

    def __init__(self, node_count, src, dst, raw_ids=None, symmetric_input=False,
                 graph_id="anonymous"):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if node_count <= 0:
            raise ValueError("graph must have at least one node")
        if src.shape != dst.shape:
            raise ValueError("src/dst length mismatch")
        if src.size and (src.min() < 0 or src.max() >= node_count
                         or dst.min() < 0 or dst.max() >= node_count):
            raise ValueError("edge endpoint outside [0, node_count)")
        if np.any(src == dst):
            raise ValueError("self-loops are not allowed")
        order = np.lexsort((dst, src))
        self.src = src[order]
        self.dst = dst[order]
        key = self.src * node_count + self.dst
        if key.size and np.any(np.diff(key) == 0):
            raise ValueError("duplicate directed edges are not allowed")
        self.node_count = int(node_count)
        self.alive = np.ones(self.src.size, dtype=bool)
        self.original_out_degree = np.bincount(self.src, minlength=node_count).astype(np.int64)
        self.original_in_degree = np.bincount(self.dst, minlength=node_count).astype(np.int64)
        self.out_degree = self.original_out_degree.copy()
        self.in_degree = self.original_in_degree.copy()
        self.raw_ids = (np.arange(node_count, dtype=np.int64) if raw_ids is None
                        else np.asarray(raw_ids, dtype=np.int64))
        self.symmetric_input = bool(symmetric_input)
        self.graph_id = graph_id
        self._version = 0
        self._cache = {}

    # -- views ------------------------------------------------------------

    @property
    def edge_count(self):
        """Total edge slots, alive or not."""
        return self.src.size

    @property
    def alive_edge_count(self):
        return int(self.alive.sum())

    @property
    def version(self):
        """Bumped on every mutation; used to invalidate derived caches."""
        return self._version

    def alive_edge_ids(self):
        return np.nonzero(self.alive)[0]

    def edge_endpoints(self, eid):
        return int(self.src[eid]), int(self.dst[eid])

    def _cached(self, key, builder):
        entry = self._cache.get(key)
        if entry is not None and entry[0] == self._version:
            return entry[1]
        value = builder()
        self._cache[key] = (self._version, value)
        return value

    def out_csr(self):
        """(indptr, indices, eids) over alive out-edges, rows sorted by target."""
        return self._cached("out", self._build_out_csr)

    def _build_out_csr(self):
        eids = np.nonzero(self.alive)[0]
        src = self.src[eids]  # already sorted by (src, dst)
        counts = np.bincount(src, minlength=self.node_count)
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, self.dst[eids].copy(), eids

    def in_csr(self):
        """(indptr, indices, eids) over alive in-edges, rows sorted by source."""
        return self._cached("in", self._build_in_csr)

    def _build_in_csr(self):
        eids = np.nonzero(self.alive)[0]
        order = np.lexsort((self.src[eids], self.dst[eids]))
        eids = eids[order]
        counts = np.bincount(self.dst[eids], minlength=self.node_count)
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, self.src[eids].copy(), eids

    def out_neighbors(self, node):
        indptr, indices, _ = self.out_csr()
        return indices[indptr[node]:indptr[node + 1]]

    def in_neighbors(self, node):
        indptr, indices, _ = self.in_csr()
        return indices[indptr[node]:indptr[node + 1]]

    def out_edges(self, node):
        indptr, _, eids = self.out_csr()
        return eids[indptr[node]:indptr[node + 1]]

    def total_degree(self):
        """Current alive in+out degree per node."""
        return self.out_degree + self.in_degree

    # -- mutation ----------------------------------------------------------

    def remove_edge(self, eid):
        """Kill edge ``eid``; original degrees stay frozen."""
        if not self.alive[eid]:
            raise ValueError(f"edge {eid} is not alive")
        self.alive[eid] = False
        self.out_degree[self.src[eid]] -= 1
        self.in_degree[self.dst[eid]] -= 1
        self._version += 1

    def copy(self):
        g = SocialGraph.__new__(SocialGraph)
        g.node_count = self.node_count
        g.src = self.src
        g.dst = self.dst
        g.alive = self.alive.copy()
        g.original_out_degree = self.original_out_degree
        g.original_in_degree = self.original_in_degree
        g.out_degree = self.out_degree.copy()
        g.in_degree = self.in_degree.copy()
        g.raw_ids = self.raw_ids
        g.symmetric_input = self.symmetric_input
        g.graph_id = self.graph_id
        g._version = 0
        g._cache = {}
        return g


def load_edge_list(text, directed=True, graph_id=None):
    """Parse an edge list ('#' comments, two integer tokens per line).

    Node ids are remapped to dense [0, n) in ascending raw-id order. With
    ``directed=False`` each pair yields both directions. Duplicates collapse,
    self-loops drop.
    """
    if isinstance(text, (str, bytes)):
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        stream = io.StringIO(text)
    else:
        stream = text
    pairs = set()
    seen_ids = set()
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_no, f"expected two tokens, got {len(tokens)}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_no, f"non-integer token in {tokens!r}") from None
        seen_ids.add(u)
        seen_ids.add(v)
        if u == v:
            continue
        pairs.add((u, v))
        if not directed:
            pairs.add((v, u))
    if not pairs:
        raise ValueError("edge list produced an empty graph")
    raw = np.array(sorted(seen_ids), dtype=np.int64)
    dense = {int(r): i for i, r in enumerate(raw)}
    src = np.array([dense[u] for u, _ in pairs], dtype=np.int64)
    dst = np.array([dense[v] for _, v in pairs], dtype=np.int64)
    return SocialGraph(raw.size, src, dst, raw_ids=raw,
                       symmetric_input=not directed,
                       graph_id=graph_id or "edge-list")


@dataclass
class LineGraph:
    """Dual graph: one line node per alive primal edge, a line edge (p, q)
    whenever head(p) = tail(q)."""

    line_node_count: int
    line_edges: np.ndarray          # (k, 2) primal edge ids
    primal_edge_of: np.ndarray      # line node index -> primal edge id
    line_index_of: np.ndarray       # primal edge id -> line node index (-1 if dead)

    def line_edge_indices(self):
        """line_edges expressed as (p_index, q_index) line-node pairs."""
        if self.line_edges.size == 0:
            return np.empty((0, 2), dtype=np.int64)
        return self.line_index_of[self.line_edges]


def build_line_graph(g: SocialGraph) -> LineGraph:
    """Construct the line graph of the alive edges, ordered by primal edge id."""
    indptr, _, eids = g.out_csr()
    if eids.size == 0:
        raise ValueError("line graph requires at least one alive edge")
    line_index_of = np.full(g.edge_count, -1, dtype=np.int64)
    line_index_of[eids] = np.arange(eids.size)
    heads = g.dst[eids]
    # one line edge per (p, q) with q an alive out-edge of head(p)
    out_counts = (indptr[1:] - indptr[:-1])[heads]
    p_rep = np.repeat(eids, out_counts)
    if p_rep.size:
        starts = indptr[heads]
        seg_starts = np.cumsum(out_counts) - out_counts
        offsets = np.arange(p_rep.size) - np.repeat(seg_starts, out_counts)
        q_slots = np.repeat(starts, out_counts) + offsets
        q_eids = eids[q_slots]
        line_edges = np.stack([p_rep, q_eids], axis=1)
    else:
        line_edges = np.empty((0, 2), dtype=np.int64)
    return LineGraph(int(eids.size), line_edges, eids.copy(), line_index_of)


def bfs_distances(g: SocialGraph, root):
    """Distance from root along alive out-edges; unreachable nodes get inf."""
    indptr, indices, _ = g.out_csr()
    d = _kernels.bfs_distances(indptr, indices, g.node_count, root)
    out = d.astype(np.float64)
    out[d < 0] = np.inf
    return out


def betweenness(g: SocialGraph, roots="all"):
    """Shortest-path betweenness (Brandes) over alive edges.

    ``roots`` is either "all" or a single source node; the rooted variant
    accumulates only paths that originate at that node. Node scores exclude
    endpoints. For graphs ingested as undirected, all-roots scores are halved
    so each unordered pair counts once; rooted scores are never halved.

    Returns (node_scores[n], edge_scores[edge_count]) with dead edges at 0.
    """
    indptr, indices, eids = g.out_csr()
    if roots == "all":
        root_arr = np.arange(g.node_count, dtype=np.int64)
    else:
        root_arr = np.array([int(roots)], dtype=np.int64)
    node_scores, slot_scores = _kernels.brandes(indptr, indices, g.node_count, root_arr)
    if roots == "all" and g.symmetric_input:
        node_scores = node_scores / 2.0
        slot_scores = slot_scores / 2.0
    edge_scores = np.zeros(g.edge_count, dtype=np.float64)
    edge_scores[eids] = slot_scores
    return node_scores, edge_scores


def closeness(g: SocialGraph):
    """Harmonic closeness on alive out-edges (sum of reciprocal distances)."""
    indptr, indices, _ = g.out_csr()
    return _kernels.harmonic_closeness(indptr, indices, g.node_count)


def pagerank(g: SocialGraph, damping=0.85, tol=1e-10, max_iter=10000):
    """PageRank by power iteration; dangling mass is spread uniformly."""
    n = g.node_count
    eids = g.alive_edge_ids()
    src, dst = g.src[eids], g.dst[eids]
    out_deg = g.out_degree.astype(np.float64)
    inv_out = np.zeros(n)
    nonzero = out_deg > 0
    inv_out[nonzero] = 1.0 / out_deg[nonzero]
    pr = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    for _ in range(max_iter):
        through = np.bincount(dst, weights=pr[src] * inv_out[src], minlength=n)
        dangling = pr[~nonzero].sum() / n
        new = damping * (through + dangling) + teleport
        delta = np.abs(new - pr).sum()
        pr = new
        if delta < tol:
            return pr
    raise PowerIterationError(float(delta), max_iter)


def dominant_eigenvectors(g: SocialGraph, tol=1e-8, max_iter=20000):
    """Dominant left/right eigenvectors of the alive adjacency by power iteration.

    Iterates on A + I to break periodic ties; the reported eigenvalue and the
    residual check refer to A itself. Returns (u_left, v_right, eigenvalue).
    """
    n = g.node_count
    eids = g.alive_edge_ids()
    src, dst = g.src[eids], g.dst[eids]

    def matvec(x):
        return np.bincount(src, weights=x[dst], minlength=n)

    def matvec_t(x):
        return np.bincount(dst, weights=x[src], minlength=n)

    def iterate(op):
        v = np.full(n, 1.0 / np.sqrt(n))
        if eids.size == 0:
            return v, 0.0
        lam = 0.0
        for _ in range(max_iter):
            w = op(v) + v
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return v, 0.0
            v = w / norm
            av = op(v)
            lam = float(v @ av)
            residual = float(np.linalg.norm(av - lam * v))
            if residual < tol:
                return v, lam
        raise PowerIterationError(residual, max_iter)

    v_right, lam = iterate(matvec)
    u_left, lam_left = iterate(matvec_t)
    if abs(v_right.sum()) > 0 and v_right.sum() < 0:
        v_right = -v_right
    if abs(u_left.sum()) > 0 and u_left.sum() < 0:
        u_left = -u_left
    return u_left, v_right, lam


@dataclass
class CommunityAssignment:
    """Partition of nodes into communities with dense indices."""

    community_of: np.ndarray
    community_members: list = field(default_factory=list)

    @property
    def community_count(self):
        return len(self.community_members)


def detect_communities(g: SocialGraph, seed):
    """Label propagation on the undirected projection of the alive edges.

    Asynchronous updates in a seeded random order; ties break toward the
    smallest label, so the result is deterministic for a fixed seed.
    """
    n = g.node_count
    eids = g.alive_edge_ids()
    a = np.concatenate([g.src[eids], g.dst[eids]])
    b = np.concatenate([g.dst[eids], g.src[eids]])
    pairs = np.unique(np.stack([a, b], axis=1), axis=0) if eids.size else np.empty((0, 2), dtype=np.int64)
    neighbors = [pairs[pairs[:, 0] == i, 1] for i in range(n)]
    labels = np.arange(n, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(100):
        changed = False
        for v in rng.permutation(n):
            nbr = neighbors[v]
            if nbr.size == 0:
                continue
            counts = np.bincount(labels[nbr])
            best = int(np.flatnonzero(counts == counts.max())[0])
            if best != labels[v]:
                labels[v] = best
                changed = True
        if not changed:
            break
    # densify community indices by smallest member node id
    order = {}
    for v in range(n):
        order.setdefault(int(labels[v]), len(order))
    community_of = np.array([order[int(labels[v])] for v in range(n)], dtype=np.int64)
    members = [np.flatnonzero(community_of == c) for c in range(len(order))]
    return CommunityAssignment(community_of, members)
