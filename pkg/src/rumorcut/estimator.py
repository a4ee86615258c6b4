"""Scikit-learn-style facade so the engine composes with the wider ecosystem.

``RumorCutAgent`` is the trainable policy (fit on randomized episodes,
predict deletion plans per source, score by mean mitigation percentage);
``BaselinePlanner`` wraps the classical methods behind the same surface.
Hyperparameters are flat constructor arguments, so ``get_params`` /
``set_params`` and grid-search tooling work as usual.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .baselines import BASELINE_METHODS, BaselineConfig, run_baseline
from .environment import DEFAULT_BUDGET_FRACTION, GeneratorConfig, default_budget
from .neural import Ablation, GnnConfig, load_parameters, save_parameters
from .policy import DEFAULT_RETENTION
from .propagation import SirParams
from .training import MitigationReport, TrainConfig, evaluate, score_plan, train
from .validation import check_fraction, check_graph, check_rng, check_sources


class RumorCutAgent(BaseEstimator):
    """Deletes a budgeted set of edges to suppress simulated rumor cascades.

    fit() trains the edge-scoring policy with randomized episodes; predict()
    returns one DeletionPlan per source via greedy rollout; score() is the
    mean mitigation percentage over sources.
    """

    def __init__(self, episodes=2000, learning_rate=0.02, entropy_coef=0.01,
                 baseline_momentum=0.9, grad_clip=5.0, n_sims_reward=200,
                 hidden_dim=32, layers=3, mlp_hidden=64,
                 beta=0.08, gamma=0.20, budget_fraction=DEFAULT_BUDGET_FRACTION,
                 retention=DEFAULT_RETENTION, betweenness_mode="source",
                 gen_family="preferential_attachment", gen_n_min=60, gen_n_max=250,
                 gen_m=4, gen_reciprocity=0.3, gen_k=2, gen_rewire_prob=0.1,
                 gen_radius=2, eval_n_sims=2000, random_state=0):
        self.episodes = episodes
        self.learning_rate = learning_rate
        self.entropy_coef = entropy_coef
        self.baseline_momentum = baseline_momentum
        self.grad_clip = grad_clip
        self.n_sims_reward = n_sims_reward
        self.hidden_dim = hidden_dim
        self.layers = layers
        self.mlp_hidden = mlp_hidden
        self.beta = beta
        self.gamma = gamma
        self.budget_fraction = budget_fraction
        self.retention = retention
        self.betweenness_mode = betweenness_mode
        self.gen_family = gen_family
        self.gen_n_min = gen_n_min
        self.gen_n_max = gen_n_max
        self.gen_m = gen_m
        self.gen_reciprocity = gen_reciprocity
        self.gen_k = gen_k
        self.gen_rewire_prob = gen_rewire_prob
        self.gen_radius = gen_radius
        self.eval_n_sims = eval_n_sims
        self.random_state = random_state

    # -- config assembly ---------------------------------------------------

    def _generator_config(self, base_graph=None):
        return GeneratorConfig(
            family=self.gen_family, n_min=self.gen_n_min, n_max=self.gen_n_max,
            m=self.gen_m, reciprocity=self.gen_reciprocity, k=self.gen_k,
            rewire_prob=self.gen_rewire_prob, radius=self.gen_radius,
            base_graph=base_graph,
        )

    def _train_config(self):
        return TrainConfig(
            episodes=self.episodes,
            learning_rate=self.learning_rate,
            entropy_coef=self.entropy_coef,
            baseline_momentum=self.baseline_momentum,
            grad_clip=self.grad_clip,
            n_sims_reward=self.n_sims_reward,
            master_seed=int(self.random_state),
            generator=self._generator_config(),
            gnn=GnnConfig(hidden_dim=self.hidden_dim, layers=self.layers,
                          mlp_hidden=self.mlp_hidden),
            sir=SirParams(beta=self.beta, gamma=self.gamma),
            budget_fraction=check_fraction(self.budget_fraction, "budget_fraction"),
            retention=self.retention,
            betweenness_mode=self.betweenness_mode,
        )

    # -- estimator surface ---------------------------------------------------

    def fit(self, X=None, y=None, progress=None):
        """Train the policy. X is optional: a SocialGraph or list of graphs
        to episode-sample instead of the synthetic generator."""
        if X is not None and not isinstance(X, (list, tuple)):
            check_graph(X)
        self.params_, self.training_log_ = train(self._train_config(), graphs=X,
                                                 progress=progress)
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit() or load() before predicting")

    def predict(self, X, sources=None, *, seed=0, ablation=Ablation()):
        """Greedy deletion plans for the given sources on graph X."""
        report = self.report(X, sources, seed=seed, ablation=ablation)
        return [row.plan for row in report.rows]

    def report(self, X, sources=None, *, seed=0, ablation=Ablation()) -> MitigationReport:
        """Full mitigation report (per-source impacts and plans)."""
        self._check_fitted()
        check_graph(X)
        if sources is None:
            sources = [int(s) for s in np.flatnonzero(X.out_degree > 0)]
        return evaluate(
            self.params_, X, check_sources(X, sources),
            budget_fraction=self.budget_fraction, retention=self.retention,
            sir=SirParams(beta=self.beta, gamma=self.gamma),
            n_sims=self.eval_n_sims, betweenness_mode=self.betweenness_mode,
            ablation=ablation, seed=seed,
        )

    def score(self, X, y=None, sources=None, *, seed=0):
        """Mean mitigation percentage over the sources (higher is better)."""
        return self.report(X, sources, seed=seed).mean_mitigation

    # -- persistence -------------------------------------------------------

    def save(self, path):
        self._check_fitted()
        save_parameters(self.params_, path)
        return self

    def load(self, path):
        expected = GnnConfig(hidden_dim=self.hidden_dim, layers=self.layers,
                             mlp_hidden=self.mlp_hidden)
        self.params_ = load_parameters(path, expected_config=expected)
        return self


class BaselinePlanner(BaseEstimator):
    """Classical edge-deletion methods behind the same predict/score surface."""

    def __init__(self, method="hsd", budget_fraction=DEFAULT_BUDGET_FRACTION,
                 retention=DEFAULT_RETENTION, beta=0.08, gamma=0.20,
                 eval_n_sims=2000, ga_population=24, ga_generations=40,
                 ga_crossover=0.9, ga_mutation=0.3, sa_t0=0.05, sa_cooling=0.99,
                 sa_iters=500, gbp_samples=200, gbp_pool=None, exact_fitness=False,
                 fitness_sims=300, random_state=0):
        self.method = method
        self.budget_fraction = budget_fraction
        self.retention = retention
        self.beta = beta
        self.gamma = gamma
        self.eval_n_sims = eval_n_sims
        self.ga_population = ga_population
        self.ga_generations = ga_generations
        self.ga_crossover = ga_crossover
        self.ga_mutation = ga_mutation
        self.sa_t0 = sa_t0
        self.sa_cooling = sa_cooling
        self.sa_iters = sa_iters
        self.gbp_samples = gbp_samples
        self.gbp_pool = gbp_pool
        self.exact_fitness = exact_fitness
        self.fitness_sims = fitness_sims
        self.random_state = random_state

    def _config(self):
        if self.method not in BASELINE_METHODS:
            raise ValueError(f"method must be one of {BASELINE_METHODS}")
        return BaselineConfig(
            sir=SirParams(beta=self.beta, gamma=self.gamma),
            ga_population=self.ga_population, ga_generations=self.ga_generations,
            ga_crossover=self.ga_crossover, ga_mutation=self.ga_mutation,
            sa_t0=self.sa_t0, sa_cooling=self.sa_cooling, sa_iters=self.sa_iters,
            gbp_samples=self.gbp_samples, gbp_pool=self.gbp_pool,
            exact_fitness=self.exact_fitness, fitness_sims=self.fitness_sims,
        )

    def fit(self, X=None, y=None):
        """Baselines have nothing to learn; kept for pipeline compatibility."""
        self._config()
        return self

    def predict(self, X, sources=None, *, seed=0):
        return [row.plan for row in self.report(X, sources, seed=seed).rows]

    def report(self, X, sources=None, *, seed=0) -> MitigationReport:
        check_graph(X)
        cfg = self._config()
        if sources is None:
            sources = [int(s) for s in np.flatnonzero(X.out_degree > 0)]
        sources = check_sources(X, sources)
        sir = SirParams(beta=self.beta, gamma=self.gamma)
        report = MitigationReport(method=self.method)
        start = time.perf_counter()
        d = default_budget(X.alive_edge_count,
                           check_fraction(self.budget_fraction, "budget_fraction"))
        for source in sources:
            if X.out_degree[source] == 0:
                report.skipped_sources.append(source)
                continue
            rng = check_rng(np.random.Generator(np.random.PCG64(
                np.random.SeedSequence((int(self.random_state), source)))))
            plan = run_baseline(self.method, X, source, d, cfg, rng,
                                retention=self.retention)
            report.rows.append(score_plan(X, source, plan, sir=sir,
                                          n_sims=self.eval_n_sims, seed=seed,
                                          method=self.method))
        report.wall_clock_seconds = time.perf_counter() - start
        return report

    def score(self, X, y=None, sources=None, *, seed=0):
        return self.report(X, sources, seed=seed).mean_mitigation
