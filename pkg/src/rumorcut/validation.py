"""Input-validation helpers shared by the estimator layer and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .graph import SocialGraph


def check_rng(seed_or_rng):
    """Accept an int seed, a Generator, or None (fresh entropy); return a Generator."""
    if seed_or_rng is None:
        return np.random.Generator(np.random.PCG64())
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    if isinstance(seed_or_rng, numbers.Integral):
        return np.random.Generator(np.random.PCG64(int(seed_or_rng)))
    raise TypeError(f"expected int seed or numpy Generator, got {type(seed_or_rng)!r}")


def check_graph(g):
    """Validate SocialGraph structural invariants; returns the graph."""
    if not isinstance(g, SocialGraph):
        raise TypeError(f"expected SocialGraph, got {type(g)!r}")
    if np.any(g.src == g.dst):
        raise ValueError("graph contains self-loops")
    if np.any(g.out_degree > g.original_out_degree) or np.any(
        g.in_degree > g.original_in_degree
    ):
        raise ValueError("current degrees exceed frozen originals")
    eids = g.alive_edge_ids()
    if np.bincount(g.src[eids], minlength=g.node_count).tolist() != g.out_degree.tolist():
        raise ValueError("out-degree bookkeeping is inconsistent with alive edges")
    return g


def check_sources(g, sources):
    """Validate a list of node ids against the graph; returns a list of ints."""
    out = []
    for s in sources:
        s = int(s)
        if not 0 <= s < g.node_count:
            raise ValueError(f"source {s} outside [0, {g.node_count})")
        out.append(s)
    return out


def check_fraction(value, name, *, closed_low=True):
    value = float(value)
    low_ok = value >= 0.0 if closed_low else value > 0.0
    if not (low_ok and value <= 1.0):
        raise ValueError(f"{name} must be in {'[' if closed_low else '('}0, 1], got {value}")
    return value
