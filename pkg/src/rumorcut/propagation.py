"""Discrete-time SIR rumor propagation and Monte Carlo impact estimation.

Step ordering: every infectious node attempts to infect each susceptible
out-neighbor with probability beta, then each infectious node recovers with
probability gamma; nodes infected during a step become infectious at the
next one. "Affected" means ever-infected, source included. Under this
ordering an edge transmits with probability
T = 1 - gamma*(1-beta) / (1 - (1-gamma)*(1-beta)), which is what the bond
percolation sampler and the exact enumeration oracle use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SimulationDivergenceError
from .graph import SocialGraph

DEFAULT_BETA = 0.08
DEFAULT_GAMMA = 0.20

# exact_expected_spread enumerates 2^edges patterns; keep it honest
EXACT_MAX_NODES = 10
EXACT_MAX_EDGES = 14

# 10 * node_count steps, but never below the floor: on tiny graphs long
# geometric recovery tails are legitimate (0.8^60 per chain is ~6e-7, which
# 1e5-simulation estimates do hit), while a true gamma~0 divergence blows
# through any floor
STEP_CAP_FACTOR = 10
STEP_CAP_FLOOR = 500


@dataclass(frozen=True)
class SirParams:
    """Per-contact infection probability and per-step recovery probability."""

    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")


@dataclass
class PropagationTrace:
    """Per-step counts of one cascade; index 0 is the initial state."""

    newly_affected_per_step: list
    infectious_per_step: list
    total_affected: int

    def cumulative_fractions(self, node_count):
        return [float(s / node_count) for s in np.cumsum(self.newly_affected_per_step)]

    def to_csv(self, sink, node_count):
        """Write the fixed trace schema: step, newly_affected, infectious,
        cumulative_fraction."""
        sink.write("step,newly_affected,infectious,cumulative_fraction\n")
        cumulative = self.cumulative_fractions(node_count)
        for step_i, (newly, infectious) in enumerate(
            zip(self.newly_affected_per_step, self.infectious_per_step)
        ):
            sink.write(f"{step_i},{newly},{infectious},{cumulative[step_i]!r}\n")


@dataclass
class ImpactEstimate:
    """Monte Carlo estimate of the affected-population fraction."""

    mean_eta: float
    std_error: float
    n_sims: int


def transmissibility(params: SirParams) -> float:
    """Probability that an edge ever transmits under the step ordering above."""
    q = (1.0 - params.gamma) * (1.0 - params.beta)
    return 1.0 - params.gamma * (1.0 - params.beta) / (1.0 - q)


def _sim_seeds(rng, n_sims):
    """Per-simulation seeds derived from one master draw, indexed by sim."""
    master = int(rng.integers(0, 2**32))
    return np.random.SeedSequence(master).generate_state(n_sims).astype(np.uint32)


def _run_batch(g: SocialGraph, source, params: SirParams, seeds):
    indptr, indices, _ = g.out_csr()
    cap = max(STEP_CAP_FACTOR * g.node_count, STEP_CAP_FLOOR)
    totals, newly_sum, inf_sum, max_len, hit_cap = _kernels.sir_batch(
        indptr, indices, g.node_count, source, params.beta, params.gamma, seeds, cap
    )
    if hit_cap:
        raise SimulationDivergenceError(
            f"SIR simulation still active after {cap} steps"
        )
    return totals, newly_sum, inf_sum, max_len


def simulate_sir(g: SocialGraph, source, params: SirParams, rng) -> PropagationTrace:
    """Run a single cascade from ``source``; deterministic given the rng state."""
    if not 0 <= source < g.node_count:
        raise ValueError(f"source {source} out of range")
    seeds = _sim_seeds(rng, 1)
    totals, newly, inf, max_len, = _run_batch(g, source, params, seeds)
    return PropagationTrace(
        newly_affected_per_step=[int(x) for x in newly[: max_len + 1]],
        infectious_per_step=[int(x) for x in inf[: max_len + 1]],
        total_affected=int(totals[0]),
    )


def estimate_impact(g: SocialGraph, source, params: SirParams, n_sims, rng) -> ImpactEstimate:
    """Mean affected fraction over ``n_sims`` independent cascades.

    Reusing a generator with the same state yields identical per-simulation
    seeds, which is how episode rewards share common random numbers.
    """
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    if not 0 <= source < g.node_count:
        raise ValueError(f"source {source} out of range")
    seeds = _sim_seeds(rng, n_sims)
    totals, _, _, _ = _run_batch(g, source, params, seeds)
    # mean over integer totals first so degenerate cases stay exact (beta=0
    # must give exactly 1/|N|)
    mean = float(totals.mean() / g.node_count)
    if n_sims > 1:
        std_error = float(totals.std(ddof=1) / g.node_count / math.sqrt(n_sims))
    else:
        std_error = 0.0
    return ImpactEstimate(mean_eta=mean, std_error=std_error, n_sims=n_sims)


def average_curves(g: SocialGraph, source, params: SirParams, n_sims, rng):
    """Mean per-step population fractions over ``n_sims`` cascades.

    Returns (newly_frac, infectious_frac, cumulative_frac, estimate); arrays
    are aligned on step index, finished cascades contribute zeros.
    """
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    seeds = _sim_seeds(rng, n_sims)
    totals, newly_sum, inf_sum, max_len = _run_batch(g, source, params, seeds)
    scale = 1.0 / (n_sims * g.node_count)
    newly = newly_sum[: max_len + 1] * scale
    infectious = inf_sum[: max_len + 1] * scale
    cumulative = np.cumsum(newly)
    fractions = totals / g.node_count
    mean = float(fractions.mean())
    std_error = float(fractions.std(ddof=1) / math.sqrt(n_sims)) if n_sims > 1 else 0.0
    return newly, infectious, cumulative, ImpactEstimate(mean, std_error, n_sims)


def _open_subset_probs(params: SirParams, max_degree):
    """subset_prob[d, k]: probability a specific k of d out-edges transmit.

    A node infectious for G ~ Geom(gamma) steps transmits along each out-edge
    independently given G with probability 1 - (1-beta)^G, so
    P(subset S open, rest closed | d) depends only on k = |S|:
        sum_a C(k, a) (-1)^a E[q^(G(a + d - k))],  q = 1 - beta,
    with E[q^(G m)] = gamma q^m / (1 - (1-gamma) q^m). The k=1, d=1 entry is
    the marginal transmissibility T.
    """
    q = 1.0 - params.beta
    c = 1.0 - params.gamma

    def moment(m):
        qm = q**m
        return params.gamma * qm / (1.0 - c * qm)

    table = np.zeros((max_degree + 1, max_degree + 1))
    for d in range(max_degree + 1):
        for k in range(d + 1):
            table[d, k] = sum(
                math.comb(k, a) * (-1) ** a * moment(a + d - k) for a in range(k + 1)
            )
    return table


def exact_expected_spread(g: SocialGraph, source, params: SirParams) -> float:
    """Exact affected fraction via enumeration of all 2^|E| transmission patterns.

    Pattern probabilities are grouped per tail node because a node's
    out-edges share its infectious period; the per-edge marginal equals the
    transmissibility T. Only valid on tiny graphs; this is the independent
    oracle for the Monte Carlo estimator and the greedy baselines.
    """
    if g.node_count > EXACT_MAX_NODES:
        raise ValueError(f"exact oracle limited to {EXACT_MAX_NODES} nodes")
    if g.alive_edge_count > EXACT_MAX_EDGES:
        raise ValueError(f"exact oracle limited to {EXACT_MAX_EDGES} alive edges")
    indptr, indices, _ = g.out_csr()
    max_degree = int((indptr[1:] - indptr[:-1]).max()) if g.node_count else 0
    table = _open_subset_probs(params, max_degree)
    expected = _kernels.exact_expected_reach(indptr, indices, g.node_count, source, table)
    return float(expected / g.node_count)


def bond_percolation_sample(g: SocialGraph, params: SirParams, rng):
    """Edge ids kept open when each alive edge opens independently with prob T."""
    eids = g.alive_edge_ids()
    t = transmissibility(params)
    return eids[rng.random(eids.size) < t]
