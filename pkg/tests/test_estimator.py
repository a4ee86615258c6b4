import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rumorcut.estimator import BaselinePlanner, RumorCutAgent

from _fixtures import random_graph

FAST = dict(episodes=4, n_sims_reward=25, hidden_dim=8, layers=2, mlp_hidden=12,
            gen_n_min=18, gen_n_max=24, gen_m=2, eval_n_sims=40, random_state=1)


@pytest.fixture(scope="module")
def fitted_agent():
    return RumorCutAgent(**FAST).fit()


class TestAgentEstimatorContract:
    def test_get_set_params_roundtrip(self):
        agent = RumorCutAgent(**FAST)
        params = agent.get_params()
        assert params["episodes"] == 4
        agent.set_params(episodes=7)
        assert agent.episodes == 7

    def test_clone_preserves_params(self):
        agent = RumorCutAgent(**FAST)
        twin = clone(agent)
        assert twin.get_params() == agent.get_params()

    def test_predict_before_fit_raises(self):
        g = random_graph(15, 40, seed=0)
        with pytest.raises(NotFittedError):
            RumorCutAgent(**FAST).predict(g, [0])

    def test_fit_predict_score(self, fitted_agent):
        g = random_graph(20, 80, seed=1)
        plans = fitted_agent.predict(g, [0, 2], seed=3)
        assert len(plans) == 2
        assert all(len(p.edges) <= p.budget for p in plans)
        score = fitted_agent.score(g, sources=[0, 2], seed=3)
        assert np.isfinite(score)

    def test_fit_on_fixed_graphs(self):
        graphs = [random_graph(18, 50, seed=s) for s in (2, 3)]
        agent = RumorCutAgent(**FAST).fit(graphs)
        assert hasattr(agent, "params_")
        assert len(agent.training_log_) == 4

    def test_save_load_roundtrip(self, fitted_agent, tmp_path):
        path = tmp_path / "agent.bin"
        fitted_agent.save(path)
        other = RumorCutAgent(**FAST).load(path)
        g = random_graph(20, 80, seed=4)
        a = fitted_agent.report(g, [0], seed=5)
        b = other.report(g, [0], seed=5)
        assert a.rows[0].plan.edges == b.rows[0].plan.edges
        assert a.rows[0].eta_mitigated == b.rows[0].eta_mitigated

    def test_input_validation(self, fitted_agent):
        with pytest.raises(TypeError, match="SocialGraph"):
            fitted_agent.report(np.zeros((3, 3)), [0])
        g = random_graph(10, 30, seed=6)
        with pytest.raises(ValueError, match="outside"):
            fitted_agent.report(g, [99])


class TestBaselinePlanner:
    def test_planner_runs_each_method(self):
        g = random_graph(20, 90, seed=7)
        for method in ("hsd", "pr", "ked"):
            planner = BaselinePlanner(method=method, eval_n_sims=30).fit()
            report = planner.report(g, [0], seed=1)
            assert report.method == method
            assert len(report.rows) == 1

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError, match="method"):
            BaselinePlanner(method="magic").fit()

    def test_deterministic_given_state(self):
        g = random_graph(20, 90, seed=8)
        a = BaselinePlanner(method="gbp", gbp_samples=40, gbp_pool=6,
                            eval_n_sims=30, random_state=5).report(g, [0], seed=2)
        b = BaselinePlanner(method="gbp", gbp_samples=40, gbp_pool=6,
                            eval_n_sims=30, random_state=5).report(g, [0], seed=2)
        assert a.rows[0].plan.edges == b.rows[0].plan.edges

    def test_sklearn_clone(self):
        planner = BaselinePlanner(method="sa", sa_iters=10)
        twin = clone(planner)
        assert twin.get_params()["sa_iters"] == 10
