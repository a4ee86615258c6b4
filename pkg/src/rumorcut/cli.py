"""Command-line entry point.

Subcommands: simulate | features | train | evaluate | baseline | ablate.
Configuration comes from a flat JSON file plus CLI overrides; every run
writes the fully-resolved config (with a version stamp) next to its outputs,
and all CSV output is byte-reproducible given (config, seed).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BASELINE_METHODS, BaselineConfig, run_baseline
from .environment import GeneratorConfig, default_budget, random_graph
from .features import EDGE_FEATURE_NAMES, NODE_FEATURE_NAMES, compute_features
from .graph import SocialGraph, load_edge_list
from .neural import (
    ABLATION_SWITCHES,
    Ablation,
    GnnConfig,
    load_parameters,
    save_parameters,
)
from .propagation import SirParams, average_curves
from .training import (
    TRAINING_LOG_HEADER,
    TrainConfig,
    evaluate,
    score_plan,
    train,
)
from .validation import check_fraction

DEFAULTS = {
    "seed": 0,
    "out_dir": None,
    "dataset": None,
    "dataset_directed": True,
    "beta": 0.08,
    "gamma": 0.20,
    "n_sims": 2000,
    "budget_fraction": 0.10,
    "retention": 0.60,
    "betweenness_mode": "source",
    "source": None,
    "sources": None,
    "sample_sources": None,
    "gnn_hidden": 32,
    "gnn_layers": 3,
    "gnn_mlp_hidden": 64,
    "train_episodes": 2000,
    "train_learning_rate": TrainConfig().learning_rate,
    "train_entropy_coef": 0.01,
    "train_baseline_momentum": 0.9,
    "train_grad_clip": 5.0,
    "train_n_sims_reward": 200,
    "train_ablation": "none",
    "gen_family": "preferential_attachment",
    "gen_n_min": 60,
    "gen_n_max": 250,
    "gen_m": 4,
    "gen_reciprocity": 0.3,
    "gen_k": 2,
    "gen_rewire_prob": 0.1,
    "gen_radius": 2,
    "checkpoint": None,
    "resume": None,
    "baseline_method": "hsd",
    "ga_population": 24,
    "ga_generations": 40,
    "ga_crossover": 0.9,
    "ga_mutation": 0.3,
    "sa_t0": 0.05,
    "sa_cooling": 0.99,
    "sa_iters": 500,
    "gbp_samples": 200,
    "gbp_pool": 32,
    "exact_fitness": False,
    "fitness_sims": 300,
    "ablate_switches": None,
}


class CliError(Exception):
    """User-facing failure; rendered as one machine-readable line."""


def _load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise CliError(f"config file is not valid JSON: {err}") from None
    if not isinstance(data, dict):
        raise CliError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(unknown)}")
    return data


def resolve_config(args) -> dict:
    """defaults <- config file <- CLI flags; returns the flat config dict."""
    config = dict(DEFAULTS)
    if getattr(args, "config", None):
        config.update(_load_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    check_fraction(config["budget_fraction"], "budget_fraction")
    if config["betweenness_mode"] not in ("source", "global"):
        raise CliError("betweenness_mode must be 'source' or 'global'")
    return config


def _out_dir(config, command):
    out = config["out_dir"] or f"runs/{command}"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_resolved(path: Path, config, command):
    resolved = dict(sorted(config.items()))
    resolved["_command"] = command
    resolved["_version"] = __version__
    (path / "config.json").write_text(
        json.dumps(resolved, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v
                             for v in row])


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _sir(config):
    return SirParams(beta=config["beta"], gamma=config["gamma"])


def _gnn(config):
    return GnnConfig(hidden_dim=config["gnn_hidden"], layers=config["gnn_layers"],
                     mlp_hidden=config["gnn_mlp_hidden"])


def _generator(config, base_graph=None):
    return GeneratorConfig(
        family=config["gen_family"], n_min=config["gen_n_min"],
        n_max=config["gen_n_max"], m=config["gen_m"],
        reciprocity=config["gen_reciprocity"], k=config["gen_k"],
        rewire_prob=config["gen_rewire_prob"], radius=config["gen_radius"],
        base_graph=base_graph,
    )


def _load_graph(config) -> SocialGraph:
    """The working graph: the dataset if given, else one generated graph."""
    if config["dataset"]:
        path = Path(config["dataset"])
        if not path.exists():
            raise CliError(f"dataset not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return load_edge_list(f, directed=config["dataset_directed"],
                                  graph_id=f"dataset:{path}")
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((config["seed"], 100))))
    g = random_graph(_generator(config), rng)
    if g is None or g.alive_edge_count == 0:
        raise CliError("generator produced an empty graph")
    return g


def _write_id_map(path: Path, g: SocialGraph):
    _write_csv(path / "id_map.csv", ("dense_id", "raw_id"),
               [(i, int(raw)) for i, raw in enumerate(g.raw_ids)])


def _resolve_source(config, g) -> int:
    """Single source for simulate/features: raw id if given, else the
    highest-out-degree node (ties toward the smallest id)."""
    if config["source"] is not None:
        return _raw_to_dense(g, [config["source"]])[0]
    return int(np.argmax(g.out_degree))


def _raw_to_dense(g, raw_sources):
    lookup = {int(r): i for i, r in enumerate(g.raw_ids)}
    dense = []
    for raw in raw_sources:
        if int(raw) not in lookup:
            raise CliError(f"source {raw} not present in the graph")
        dense.append(lookup[int(raw)])
    return dense


def _resolve_sources(config, g):
    """Evaluation sources: explicit raw-id list, or a seeded sample of
    nodes with out-edges."""
    if config["sources"] is not None:
        return _raw_to_dense(g, config["sources"])
    k = config["sample_sources"] or 5
    candidates = np.flatnonzero(g.out_degree > 0)
    if candidates.size == 0:
        raise CliError("graph has no node with out-edges")
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((config["seed"], 200))))
    k = min(int(k), candidates.size)
    return [int(s) for s in rng.choice(candidates, size=k, replace=False)]


def _export_plan(path: Path, g: SocialGraph, plan):
    rows = []
    for step_i, (eid, eta) in enumerate(zip(plan.edges, plan.eta_after)):
        u, v = g.edge_endpoints(eid)
        rows.append((step_i, int(g.raw_ids[u]), int(g.raw_ids[v]), float(eta)))
    _write_csv(path, ("step", "edge_src_raw_id", "edge_dst_raw_id", "eta_after"), rows)


def _write_report(out: Path, report, g: SocialGraph, config):
    plans_dir = out / "plans"
    plans_dir.mkdir(exist_ok=True)
    rows = []
    for r in report.rows:
        plan_file = f"plans/plan_{r.method}_{r.source_raw}.csv"
        _export_plan(out / plan_file, g, r.plan)
        rows.append((r.method, r.source, r.source_raw, r.eta_original,
                     r.eta_mitigated, r.mitigation_pct, len(r.plan.edges),
                     r.plan.budget, r.plan.exhausted, plan_file))
    _write_csv(out / "report.csv",
               ("method", "source", "source_raw", "eta_original", "eta_mitigated",
                "mitigation_pct", "plan_size", "budget", "exhausted", "plan_file"),
               rows)
    _write_json(out / "summary.json", {
        "method": report.method,
        "mean_mitigation_pct": report.mean_mitigation,
        "std_mitigation_pct": report.std_mitigation,
        "n_sources": len(report.rows),
        "skipped_sources": report.skipped_sources,
        "wall_clock_seconds": report.wall_clock_seconds,
        "graph_id": g.graph_id,
        "node_count": g.node_count,
        "edge_count": int(g.alive_edge_count),
        "budget": default_budget(g.alive_edge_count, config["budget_fraction"]),
    })


# -- commands ----------------------------------------------------------------


def cmd_simulate(config) -> int:
    out = _out_dir(config, "simulate")
    _write_resolved(out, config, "simulate")
    g = _load_graph(config)
    source = _resolve_source(config, g)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((config["seed"], 300))))
    newly, infectious, cumulative, estimate = average_curves(
        g, source, _sir(config), config["n_sims"], rng
    )
    _write_csv(out / "curves.csv",
               ("step", "newly_affected", "infectious", "cumulative_fraction"),
               [(i, float(newly[i]), float(infectious[i]), float(cumulative[i]))
                for i in range(newly.size)])
    _write_json(out / "impact.json", {
        "mean_eta": estimate.mean_eta,
        "std_error": estimate.std_error,
        "n_sims": estimate.n_sims,
        "source_raw": int(g.raw_ids[source]),
        "graph_id": g.graph_id,
        "node_count": g.node_count,
        "edge_count": int(g.alive_edge_count),
        "beta": config["beta"],
        "gamma": config["gamma"],
    })
    _write_id_map(out, g)
    print(f"simulate: eta={estimate.mean_eta:.4f} +- {estimate.std_error:.4f} "
          f"over {estimate.n_sims} sims -> {out}")
    return 0


def cmd_features(config) -> int:
    out = _out_dir(config, "features")
    _write_resolved(out, config, "features")
    g = _load_graph(config)
    source = _resolve_source(config, g)
    feats = compute_features(g, source, config["betweenness_mode"])
    node_header = ("node_raw_id",) + NODE_FEATURE_NAMES
    for name, matrix in (("raw", feats.raw_node_features),
                         ("normalized", feats.node_features)):
        _write_csv(out / f"node_features_{name}.csv", node_header,
                   [(int(g.raw_ids[i]), *map(float, matrix[i]))
                    for i in range(g.node_count)])
    edge_header = ("edge_src_raw_id", "edge_dst_raw_id") + EDGE_FEATURE_NAMES
    for name, matrix in (("raw", feats.raw_edge_features),
                         ("normalized", feats.edge_features)):
        rows = []
        for row_i, eid in enumerate(feats.alive_edge_ids):
            u, v = g.edge_endpoints(int(eid))
            rows.append((int(g.raw_ids[u]), int(g.raw_ids[v]),
                         *map(float, matrix[row_i])))
        _write_csv(out / f"edge_features_{name}.csv", edge_header, rows)
    _write_id_map(out, g)
    print(f"features: {g.node_count} nodes, {g.alive_edge_count} edges -> {out}")
    return 0


def cmd_train(config) -> int:
    out = _out_dir(config, "train")
    _write_resolved(out, config, "train")
    base_graph = None
    graphs = None
    if config["dataset"]:
        dataset_graph = _load_graph(config)
        if config["gen_family"] == "dataset_subsample":
            base_graph = dataset_graph
        else:
            graphs = dataset_graph
    train_cfg = TrainConfig(
        episodes=config["train_episodes"],
        learning_rate=config["train_learning_rate"],
        entropy_coef=config["train_entropy_coef"],
        baseline_momentum=config["train_baseline_momentum"],
        grad_clip=config["train_grad_clip"],
        n_sims_reward=config["train_n_sims_reward"],
        master_seed=config["seed"],
        generator=_generator(config, base_graph=base_graph),
        gnn=_gnn(config),
        sir=_sir(config),
        budget_fraction=config["budget_fraction"],
        retention=config["retention"],
        betweenness_mode=config["betweenness_mode"],
        ablation=Ablation.from_switch(config["train_ablation"]),
    )
    initial = None
    if config["resume"]:
        initial = load_parameters(config["resume"], expected_config=_gnn(config))
    start = time.perf_counter()
    params, logs = train(train_cfg, graphs=graphs, initial_params=initial)
    elapsed = time.perf_counter() - start
    checkpoint = out / (config["checkpoint"] or "checkpoint.bin")
    save_parameters(params, checkpoint)
    _write_csv(out / "training_log.csv", TRAINING_LOG_HEADER,
               [(l.episode, l.episode_return, l.loss, l.entropy, l.eta_0,
                 l.eta_final) for l in logs])
    _write_json(out / "train_summary.json", {
        "episodes": len(logs),
        "mean_return_first_100": float(np.mean([l.episode_return for l in logs[:100]])),
        "mean_return_last_100": float(np.mean([l.episode_return for l in logs[-100:]])),
        "checkpoint": checkpoint.name,
        "wall_clock_seconds": elapsed,
    })
    print(f"train: {len(logs)} episodes -> {checkpoint}")
    return 0


def cmd_evaluate(config) -> int:
    if not config["checkpoint"]:
        raise CliError("evaluate requires --checkpoint")
    out = _out_dir(config, "evaluate")
    _write_resolved(out, config, "evaluate")
    params = load_parameters(config["checkpoint"], expected_config=_gnn(config))
    g = _load_graph(config)
    sources = _resolve_sources(config, g)
    report = evaluate(
        params, g, sources,
        budget_fraction=config["budget_fraction"], retention=config["retention"],
        sir=_sir(config), n_sims=config["n_sims"],
        betweenness_mode=config["betweenness_mode"], seed=config["seed"],
        method="rl",
    )
    _write_report(out, report, g, config)
    _write_id_map(out, g)
    print(f"evaluate: mean M = {report.mean_mitigation:.2f}% over "
          f"{len(report.rows)} sources -> {out}")
    return 0


def cmd_baseline(config) -> int:
    method = config["baseline_method"]
    if method not in BASELINE_METHODS:
        raise CliError(f"baseline_method must be one of {BASELINE_METHODS}")
    out = _out_dir(config, f"baseline_{method}")
    _write_resolved(out, config, "baseline")
    g = _load_graph(config)
    sources = _resolve_sources(config, g)
    cfg = BaselineConfig(
        sir=_sir(config), ga_population=config["ga_population"],
        ga_generations=config["ga_generations"], ga_crossover=config["ga_crossover"],
        ga_mutation=config["ga_mutation"], sa_t0=config["sa_t0"],
        sa_cooling=config["sa_cooling"], sa_iters=config["sa_iters"],
        gbp_samples=config["gbp_samples"], gbp_pool=config["gbp_pool"],
        exact_fitness=config["exact_fitness"], fitness_sims=config["fitness_sims"],
    )
    d = default_budget(g.alive_edge_count, config["budget_fraction"])
    from .training import MitigationReport

    report = MitigationReport(method=method)
    start = time.perf_counter()
    for source in sources:
        if g.out_degree[source] == 0:
            report.skipped_sources.append(int(source))
            continue
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((config["seed"], 400, int(source)))))
        plan = run_baseline(method, g, source, d, cfg, rng,
                            retention=config["retention"])
        report.rows.append(score_plan(g, source, plan, sir=_sir(config),
                                      n_sims=config["n_sims"], seed=config["seed"],
                                      method=method))
    report.wall_clock_seconds = time.perf_counter() - start
    _write_report(out, report, g, config)
    _write_id_map(out, g)
    print(f"baseline[{method}]: mean M = {report.mean_mitigation:.2f}% over "
          f"{len(report.rows)} sources -> {out}")
    return 0


def cmd_ablate(config) -> int:
    if not config["checkpoint"]:
        raise CliError("ablate requires --checkpoint")
    out = _out_dir(config, "ablate")
    _write_resolved(out, config, "ablate")
    params = load_parameters(config["checkpoint"], expected_config=_gnn(config))
    g = _load_graph(config)
    sources = _resolve_sources(config, g)
    switches = config["ablate_switches"] or list(ABLATION_SWITCHES)
    for switch in switches:
        Ablation.from_switch(switch)  # validate before the expensive loop
    if "none" not in switches:
        switches = ["none"] + list(switches)
    results = {}
    for switch in switches:
        report = evaluate(
            params, g, sources,
            budget_fraction=config["budget_fraction"], retention=config["retention"],
            sir=_sir(config), n_sims=config["n_sims"],
            betweenness_mode=config["betweenness_mode"], seed=config["seed"],
            ablation=Ablation.from_switch(switch), method=f"rl[{switch}]",
        )
        results[switch] = report
    base = results["none"].mean_mitigation
    rows = []
    for switch in switches:
        m = results[switch].mean_mitigation
        delta = 0.0 if switch == "none" else (
            100.0 * (m - base) / base if base != 0 else 0.0)
        rows.append((switch, m, results[switch].std_mitigation, delta))
    _write_csv(out / "ablation.csv",
               ("ablation", "mean_mitigation_pct", "std_mitigation_pct",
                "delta_pct_vs_none"),
               rows)
    _write_json(out / "summary.json", {
        "base_mean_mitigation_pct": base,
        "sources": [int(g.raw_ids[s]) for s in sources],
        "switches": list(switches),
        "graph_id": g.graph_id,
    })
    print(f"ablate: base M = {base:.2f}%, {len(switches)} switches -> {out}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "features": cmd_features,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "baseline": cmd_baseline,
    "ablate": cmd_ablate,
}


def _add_common_flags(parser):
    parser.add_argument("--config", help="JSON config file with flat keys")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory")
    parser.add_argument("--dataset", help="SNAP edge-list path")
    parser.add_argument("--undirected", dest="dataset_directed",
                        action="store_const", const=False,
                        help="treat the dataset as undirected pairs")
    parser.add_argument("--n-sims", dest="n_sims", type=int,
                        help="Monte Carlo simulations per impact estimate")
    parser.add_argument("--budget-fraction", dest="budget_fraction", type=float,
                        help="fraction of edges to delete")
    parser.add_argument("--retention", type=float,
                        help="per-user fraction of relationships to keep")
    parser.add_argument("--checkpoint", help="parameter checkpoint path")
    parser.add_argument("--source", type=int, help="single source (raw id)")
    parser.add_argument("--sources", type=lambda s: [int(t) for t in s.split(",")],
                        help="comma-separated source raw ids")
    parser.add_argument("--sample-sources", dest="sample_sources", type=int,
                        help="sample this many sources with out-edges")
    parser.add_argument("--episodes", dest="train_episodes", type=int,
                        help="training episodes")
    parser.add_argument("--baseline-method", dest="baseline_method",
                        choices=BASELINE_METHODS, help="baseline to run")
    parser.add_argument("--resume", help="checkpoint to resume training from")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rumorcut",
        description="Curb simulated rumor cascades by deleting a budgeted set "
                    "of edges; includes an SIR simulator, a trainable "
                    "edge-scoring policy, and classical baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common_flags(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](config)
    except CliError as err:
        print(json.dumps({"error": str(err), "command": args.command}),
              file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(json.dumps({"error": str(err), "command": args.command,
                          "type": type(err).__name__}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
