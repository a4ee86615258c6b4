"""Policy-gradient training over randomized episodes, and greedy evaluation.

One REINFORCE update per episode: sample a full deletion rollout, form
suffix-sum returns, subtract an exponential moving average of episode
returns, add an entropy bonus, backpropagate through every step's cached
forward pass, clip the global gradient norm, and apply plain gradient
descent. Everything is deterministic given the master seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .environment import (
    DEFAULT_BUDGET_FRACTION,
    DEFAULT_REWARD_SIMS,
    DeletionPlan,
    EpisodeState,
    GeneratorConfig,
    reset,
    step,
)
from .errors import TrainingDivergedError
from .graph import SocialGraph
from .neural import Ablation, GnnConfig, Parameters, backward, gnn_forward, init_parameters
from .policy import (
    DEFAULT_RETENTION,
    greedy_action,
    policy_output,
    sample_action,
    score_edges,
)
from .propagation import SirParams, estimate_impact


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 2000
    learning_rate: float = 0.02
    entropy_coef: float = 0.01
    baseline_momentum: float = 0.9
    grad_clip: float = 5.0
    n_sims_reward: int = DEFAULT_REWARD_SIMS
    master_seed: int = 0
    generator: GeneratorConfig = GeneratorConfig()
    gnn: GnnConfig = GnnConfig()
    sir: SirParams = SirParams()
    budget_fraction: float = DEFAULT_BUDGET_FRACTION
    retention: float = DEFAULT_RETENTION
    betweenness_mode: str = "source"
    ablation: Ablation = Ablation()

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.learning_rate < 0 or self.entropy_coef < 0 or self.grad_clip <= 0:
            raise ValueError("learning_rate/entropy_coef must be >= 0, grad_clip > 0")
        if not 0.0 <= self.baseline_momentum < 1.0:
            raise ValueError("baseline_momentum must be in [0, 1)")


class _ReturnBaseline:
    """Per-step-index exponential moving average of suffix returns.

    Suffix returns shrink toward the end of an episode by construction, so a
    single scalar baseline leaves late steps with large action-independent
    advantages; tracking one EMA per step index removes that variance.
    """

    def __init__(self, momentum):
        self.momentum = momentum
        self.values = np.zeros(0)
        self.seen = np.zeros(0, dtype=bool)

    def advantages(self, returns):
        t = returns.size
        if t > self.values.size:
            grown = np.zeros(t)
            grown[: self.values.size] = self.values
            seen = np.zeros(t, dtype=bool)
            seen[: self.seen.size] = self.seen
            self.values, self.seen = grown, seen
        baseline = np.where(self.seen[:t], self.values[:t], returns)
        return returns - baseline

    def update(self, returns):
        t = returns.size
        fresh = ~self.seen[:t]
        self.values[:t][fresh] = returns[fresh]
        self.values[:t][~fresh] *= self.momentum
        self.values[:t][~fresh] += (1.0 - self.momentum) * returns[~fresh]
        self.seen[:t] = True


@dataclass
class EpisodeLog:
    episode: int
    episode_return: float
    loss: float
    entropy: float
    eta_0: float
    eta_final: float


TRAINING_LOG_HEADER = ("episode", "return", "loss", "entropy", "eta_0", "eta_final")


def policy_gradient_dlogits(probabilities, feasible, action_index, advantage,
                            entropy_coef):
    """d(loss)/d(logits) for one step of the REINFORCE objective.

    loss_t = -log pi(a_t) * advantage - entropy_coef * H(pi_t), differentiated
    through the masked softmax; infeasible entries stay zero.
    """
    p = probabilities
    dlogits = np.zeros_like(p)
    onehot = np.zeros_like(p)
    onehot[action_index] = 1.0
    logp = np.zeros_like(p)
    active = feasible & (p > 0)
    logp[active] = np.log(p[active])
    entropy = -float((p[active] * logp[active]).sum())
    dlogits[feasible] = advantage * (p[feasible] - onehot[feasible])
    dlogits[active] += entropy_coef * p[active] * (logp[active] + entropy)
    return dlogits, entropy


def _rollout(state: EpisodeState, params: Parameters, ablation: Ablation,
             action_rng, sample=True, keep_caches=False):
    """Play one episode; returns (rewards, records) where each record is
    (cache, probabilities, feasible, action_row)."""
    rewards, records = [], []
    while not state.done:
        cache = gnn_forward(state.graph, state.line_graph, state.features, params,
                            ablation)
        logits = score_edges(cache, state.communities, state.source, params)
        output = policy_output(state.graph, logits, state.retention)
        if output.terminal:
            break
        if sample:
            action = sample_action(output, action_rng)
        else:
            action = greedy_action(output)
        action_row = int(np.searchsorted(output.edge_ids, action))
        if keep_caches:
            records.append((cache, output.probabilities, output.feasible, action_row))
        reward, _ = step(state, action)
        rewards.append(reward)
    return rewards, records


def train(config: TrainConfig, graphs=None, progress=None, initial_params=None):
    """Run the REINFORCE loop; returns (parameters, per-episode logs).

    ``graphs`` overrides the generator with a fixed graph or list of graphs.
    ``progress`` is an optional callback(episode_log). ``initial_params``
    resumes from a checkpoint; its config must equal config.gnn.
    """
    if initial_params is not None:
        if initial_params.config != config.gnn:
            raise ValueError(
                f"checkpoint config {initial_params.config} does not match {config.gnn}"
            )
        params = initial_params.copy()
    else:
        init_rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((config.master_seed, 0))))
        params = init_parameters(config.gnn, init_rng)
    source_of_graphs = graphs if graphs is not None else config.generator
    logs = []
    baseline = _ReturnBaseline(config.baseline_momentum)
    for episode in range(config.episodes):
        env_rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((config.master_seed, 1, episode))))
        act_rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((config.master_seed, 2, episode))))
        state = reset(
            source_of_graphs, env_rng, sir=config.sir,
            budget_fraction=config.budget_fraction, retention=config.retention,
            n_sims=config.n_sims_reward, betweenness_mode=config.betweenness_mode,
        )
        eta_0 = state.eta_prev
        rewards, records = _rollout(state, params, config.ablation, act_rng,
                                    sample=True, keep_caches=True)
        episode_return = float(sum(rewards))
        returns = np.cumsum(rewards[::-1])[::-1] if rewards else np.array([])
        advantages = baseline.advantages(returns)
        # scale-free advantages keep one learning rate usable across graph
        # sizes and diffusion strengths
        spread = float(advantages.std())
        if spread > 0:
            advantages = advantages / spread
        grads = params.zeros_like()
        loss = 0.0
        entropies = []
        for (cache, probs, feasible, action_row), adv in zip(records, advantages):
            dlogits, entropy = policy_gradient_dlogits(
                probs, feasible, action_row, float(adv), config.entropy_coef
            )
            entropies.append(entropy)
            loss += -np.log(max(probs[action_row], 1e-300)) * float(adv)
            loss -= config.entropy_coef * entropy
            grads.axpy(1.0, backward(cache, dlogits, params))
        if not np.isfinite(loss) or not np.isfinite(grads.grad_norm()):
            raise TrainingDivergedError(episode, {
                "loss": float(loss),
                "grad_norm": grads.grad_norm(),
                "episode_return": episode_return,
                "eta_0": eta_0,
            })
        norm = grads.grad_norm()
        scale = 1.0 if norm <= config.grad_clip else config.grad_clip / norm
        params.axpy(-config.learning_rate * scale, grads)
        baseline.update(returns)
        log = EpisodeLog(
            episode=episode,
            episode_return=episode_return,
            loss=float(loss),
            entropy=float(np.mean(entropies)) if entropies else 0.0,
            eta_0=eta_0,
            eta_final=state.eta_prev,
        )
        logs.append(log)
        if progress is not None:
            progress(log)
    return params, logs


# -- evaluation --------------------------------------------------------------


@dataclass
class SourceResult:
    """Mitigation outcome for one rumor source."""

    method: str
    source: int
    source_raw: int
    eta_original: float
    eta_mitigated: float
    mitigation_pct: float
    plan: DeletionPlan


@dataclass
class MitigationReport:
    method: str
    rows: list = field(default_factory=list)
    skipped_sources: list = field(default_factory=list)
    wall_clock_seconds: float = 0.0

    @property
    def mean_mitigation(self):
        return float(np.mean([r.mitigation_pct for r in self.rows])) if self.rows else 0.0

    @property
    def std_mitigation(self):
        if len(self.rows) < 2:
            return 0.0
        return float(np.std([r.mitigation_pct for r in self.rows], ddof=1))


def _mitigation_pct(eta_0, eta_final):
    return 100.0 * (eta_0 - eta_final) / eta_0 if eta_0 > 0 else 0.0


def evaluate(params: Parameters, g: SocialGraph, sources, *,
             budget_fraction=DEFAULT_BUDGET_FRACTION, retention=DEFAULT_RETENTION,
             sir=SirParams(), n_sims=2000, betweenness_mode="source",
             ablation=Ablation(), seed=0, method="rl") -> MitigationReport:
    """Greedy rollouts of a trained policy, one per source.

    Sources without out-edges are skipped and flagged. Per-source common
    random numbers make the report deterministic and the step rewards
    telescoping; works unchanged on graphs larger than the training graphs.
    """
    start = time.perf_counter()
    report = MitigationReport(method=method)
    for source in sources:
        if not 0 <= source < g.node_count:
            raise ValueError(f"source {source} out of range")
        if g.out_degree[source] == 0:
            report.skipped_sources.append(int(source))
            continue
        env_rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((seed, int(source)))))
        state = reset(
            g, env_rng, sir=sir, budget_fraction=budget_fraction,
            retention=retention, n_sims=n_sims,
            betweenness_mode=betweenness_mode, source=source,
        )
        eta_0 = state.eta_prev
        _rollout(state, params, ablation, env_rng, sample=False)
        report.rows.append(SourceResult(
            method=method,
            source=int(source),
            source_raw=int(g.raw_ids[source]),
            eta_original=eta_0,
            eta_mitigated=state.eta_prev,
            mitigation_pct=_mitigation_pct(eta_0, state.eta_prev),
            plan=state.plan,
        ))
    report.wall_clock_seconds = time.perf_counter() - start
    return report


def score_plan(g: SocialGraph, source, plan: DeletionPlan, *, sir=SirParams(),
               n_sims=2000, seed=0, method="plan") -> SourceResult:
    """Replay a deletion plan, measuring impact with common random numbers."""
    work = g.copy()
    sim_seed = int(np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed, int(source))))).integers(0, 2**63))

    def impact():
        rng = np.random.Generator(np.random.PCG64(sim_seed))
        return estimate_impact(work, source, sir, n_sims, rng).mean_eta

    eta_0 = impact()
    etas = []
    for eid in plan.edges:
        work.remove_edge(eid)
        etas.append(impact())
    eta_final = etas[-1] if etas else eta_0
    plan.eta_after = etas
    return SourceResult(
        method=method,
        source=int(source),
        source_raw=int(g.raw_ids[source]),
        eta_original=eta_0,
        eta_mitigated=eta_final,
        mitigation_pct=_mitigation_pct(eta_0, eta_final),
        plan=plan,
    )
