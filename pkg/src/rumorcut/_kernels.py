"""Numba-compiled inner loops.

Everything here operates on CSR adjacency arrays (indptr, indices) of the
currently alive out-edges, plus an ``eids`` array mapping CSR slots back to
primal edge ids where needed. All kernels are single-threaded and consume
randomness in a fixed order, so results are bit-reproducible given seeds.
"""

import numpy as np
from numba import njit

# status codes used by the SIR kernel
_S, _I, _R, _NEW = 0, 1, 2, 3


@njit(cache=True)
def sir_batch(indptr, indices, n, source, beta, gamma, seeds, cap):
    """Run one SIR cascade per seed; return per-sim totals and step sums.

    Dynamics per step: every infectious node attempts to infect each
    susceptible out-neighbor with probability beta (one draw per contact,
    neighbors in CSR order), then each infectious node recovers with
    probability gamma; nodes infected this step become infectious next step.

    Returns (totals, newly_sum, inf_sum, max_len, hit_cap) where newly_sum
    and inf_sum accumulate per-step counts across sims (index 0 is the
    initial state: one newly affected node, one infectious node).
    """
    n_sims = seeds.shape[0]
    totals = np.empty(n_sims, dtype=np.int64)
    newly_sum = np.zeros(cap + 1, dtype=np.int64)
    inf_sum = np.zeros(cap + 1, dtype=np.int64)
    status = np.zeros(n, dtype=np.uint8)
    inf_nodes = np.empty(n, dtype=np.int64)
    new_nodes = np.empty(n, dtype=np.int64)
    max_len = 0
    hit_cap = False
    for k in range(n_sims):
        np.random.seed(seeds[k])
        status[:] = _S
        status[source] = _I
        inf_nodes[0] = source
        n_inf = 1
        total = 1
        newly_sum[0] += 1
        inf_sum[0] += 1
        step = 0
        while n_inf > 0:
            if step >= cap:
                hit_cap = True
                break
            step += 1
            n_new = 0
            for a in range(n_inf):
                i = inf_nodes[a]
                for e in range(indptr[i], indptr[i + 1]):
                    j = indices[e]
                    if status[j] == _S:
                        if np.random.random() < beta:
                            status[j] = _NEW
                            new_nodes[n_new] = j
                            n_new += 1
            survivors = 0
            for a in range(n_inf):
                i = inf_nodes[a]
                if np.random.random() < gamma:
                    status[i] = _R
                else:
                    inf_nodes[survivors] = i
                    survivors += 1
            n_inf = survivors
            for b in range(n_new):
                j = new_nodes[b]
                status[j] = _I
                inf_nodes[n_inf] = j
                n_inf += 1
            total += n_new
            newly_sum[step] += n_new
            inf_sum[step] += n_inf
        if step > max_len:
            max_len = step
        totals[k] = total
    return totals, newly_sum, inf_sum, max_len, hit_cap


@njit(cache=True)
def bfs_distances(indptr, indices, n, root):
    """Hop distances from root along out-edges; -1 marks unreachable."""
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[root] = 0
    queue[0] = root
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue[tail] = w
                tail += 1
    return dist


@njit(cache=True)
def harmonic_closeness(indptr, indices, n):
    """Per-node sum of 1/d(i, j) over nodes reachable via out-edges."""
    scores = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for root in range(n):
        dist[:] = -1
        dist[root] = 0
        queue[0] = root
        head, tail = 0, 1
        acc = 0.0
        while head < tail:
            v = queue[head]
            head += 1
            if v != root:
                acc += 1.0 / dist[v]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue[tail] = w
                    tail += 1
        scores[root] = acc
    return scores


@njit(cache=True)
def brandes(indptr, indices, n, roots):
    """Brandes shortest-path accumulation over the given roots.

    Returns (node_scores, edge_scores) with edge scores indexed by CSR slot.
    Node scores exclude path endpoints. Unweighted, directed.
    """
    node_scores = np.zeros(n, dtype=np.float64)
    edge_scores = np.zeros(indices.shape[0], dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for r in range(roots.shape[0]):
        s = roots[r]
        dist[:] = -1
        sigma[:] = 0.0
        delta[:] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail = 0, 1
        while head < tail:
            v = order[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        # BFS order is non-decreasing in distance, so reverse it for the
        # dependency sweep; edge accumulation avoids predecessor lists.
        for idx in range(tail - 1, -1, -1):
            v = order[idx]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dist[w] == dist[v] + 1:
                    c = sigma[v] / sigma[w] * (1.0 + delta[w])
                    edge_scores[e] += c
                    delta[v] += c
            if v != s:
                node_scores[v] += delta[v]
    return node_scores, edge_scores


@njit(cache=True)
def diffusion_importance_all(indptr, indices, n):
    """For each edge slot (i, j): |out(j) \\ ({i} U out(i))|.

    Requires indices sorted within each row.
    """
    out = np.empty(indices.shape[0], dtype=np.float64)
    for i in range(n):
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            count = 0
            a = indptr[i]
            for f in range(indptr[j], indptr[j + 1]):
                k = indices[f]
                if k == i:
                    continue
                while a < indptr[i + 1] and indices[a] < k:
                    a += 1
                if a < indptr[i + 1] and indices[a] == k:
                    continue
                count += 1
            out[e] = count
    return out


@njit(cache=True)
def reach_count(indptr, indices, n, source, open_slot, banned_slot):
    """Nodes reachable from source using only open CSR slots (banned excluded)."""
    seen = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    seen[source] = 1
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            if not open_slot[e] or e == banned_slot:
                continue
            w = indices[e]
            if seen[w] == 0:
                seen[w] = 1
                queue[tail] = w
                tail += 1
    return tail


@njit(cache=True)
def percolation_candidate_sums(indptr, indices, n, source, patterns, candidates):
    """Sum of reachable-set sizes over percolation patterns per candidate.

    patterns is (n_samples, nnz) boolean; candidate edges are CSR slots that
    get removed before measuring reach.
    """
    sums = np.zeros(candidates.shape[0], dtype=np.float64)
    for c in range(candidates.shape[0]):
        banned = candidates[c]
        for p in range(patterns.shape[0]):
            sums[c] += reach_count(indptr, indices, n, source, patterns[p], banned)
    return sums


@njit(cache=True)
def exact_expected_reach(indptr, indices, n, source, subset_prob):
    """Expected reachable-set size over all 2^nnz edge open/closed patterns.

    ``subset_prob[d, k]`` is the probability that a specific k-subset of a
    node's d out-edges ever transmits while the rest do not; out-edges of one
    node share its infectious period, so the pattern probability is a product
    of per-tail-node terms, not per-edge terms. Caller bounds nnz.
    """
    nnz = indices.shape[0]
    seen = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    open_slot = np.zeros(nnz, dtype=np.bool_)
    expected = 0.0
    for pattern in range(1 << nnz):
        for e in range(nnz):
            open_slot[e] = (pattern >> e) & 1 == 1
        prob = 1.0
        for i in range(n):
            d = indptr[i + 1] - indptr[i]
            if d == 0:
                continue
            k = 0
            for e in range(indptr[i], indptr[i + 1]):
                if open_slot[e]:
                    k += 1
            prob *= subset_prob[d, k]
            if prob == 0.0:
                break
        if prob == 0.0:
            continue
        seen[:] = 0
        seen[source] = 1
        queue[0] = source
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                if not open_slot[e]:
                    continue
                w = indices[e]
                if seen[w] == 0:
                    seen[w] = 1
                    queue[tail] = w
                    tail += 1
        expected += prob * tail
    return expected


@njit(cache=True)
def segment_sum(values, seg_ids, n_segments):
    """Sum rows of ``values`` into ``n_segments`` buckets given by seg_ids."""
    out = np.zeros((n_segments, values.shape[1]), dtype=np.float64)
    for r in range(values.shape[0]):
        s = seg_ids[r]
        for c in range(values.shape[1]):
            out[s, c] += values[r, c]
    return out
