"""Embedding network and its exact reverse-mode gradients.

The architecture is fixed: a linear projection of node/edge features, L
residual message-passing layers on the primal graph (node side) and on the
line graph (edge side), tanh applied to the unnormalized neighbor sum, and a
final per-edge concatenation [n_i || n_j || e_ij]. The scoring MLP body also
lives here so one backward pass can run the whole chain. All math is float64
numpy; no autodiff framework.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CheckpointError
from .features import FeatureMatrix
from .graph import LineGraph, SocialGraph

CHECKPOINT_MAGIC = b"RCUT"
CHECKPOINT_VERSION = 1

# evaluation-time switches: feature columns, message passing sides, and the
# community/source terms of the scoring input
ABLATION_SWITCHES = (
    "none",
    "fn1", "fn2", "fn3", "fn4", "fn5",
    "fe6", "fe7", "fe8",
    "link", "route",
    "community", "source",
)


@dataclass(frozen=True)
class GnnConfig:
    hidden_dim: int = 32
    layers: int = 3
    mlp_hidden: int = 64

    def __post_init__(self):
        for name in ("hidden_dim", "layers", "mlp_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def policy_input_dim(self):
        # [e_f (3h) || C_i (h) || C_j (h) || n_source (h)]
        return 6 * self.hidden_dim


@dataclass(frozen=True)
class Ablation:
    """What to zero out or skip; the default ablates nothing."""

    drop_node_columns: tuple = ()
    drop_edge_columns: tuple = ()
    disable_node_passing: bool = False
    disable_edge_passing: bool = False
    drop_community: bool = False
    drop_source: bool = False

    @staticmethod
    def from_switch(name: str) -> "Ablation":
        if name == "none":
            return Ablation()
        if name.startswith("fn"):
            col = int(name[2:]) - 1
            if 0 <= col < 5:
                return Ablation(drop_node_columns=(col,))
        if name.startswith("fe"):
            col = int(name[2:]) - 6
            if 0 <= col < 3:
                return Ablation(drop_edge_columns=(col,))
        if name == "link":
            return Ablation(disable_node_passing=True)
        if name == "route":
            return Ablation(disable_edge_passing=True)
        if name == "community":
            return Ablation(drop_community=True)
        if name == "source":
            return Ablation(drop_source=True)
        raise ValueError(f"unknown ablation switch {name!r}")


@dataclass
class Parameters:
    """All trainable matrices; biases only in the scoring MLP."""

    config: GnnConfig
    w_node_in: np.ndarray        # (h, 5)
    w_edge_in: np.ndarray        # (h, 3)
    w_node: list                 # L x (h, h)
    w_edge: list                 # L x (h, h)
    mlp_w1: np.ndarray           # (mlp_hidden, 6h)
    mlp_b1: np.ndarray           # (mlp_hidden,)
    mlp_w2: np.ndarray           # (1, mlp_hidden)
    mlp_b2: np.ndarray           # (1,)

    def matrices(self):
        """(name, array) pairs in declaration (serialization) order."""
        out = [("w_node_in", self.w_node_in), ("w_edge_in", self.w_edge_in)]
        for l, w in enumerate(self.w_node):
            out.append((f"w_node_{l + 1}", w))
        for l, w in enumerate(self.w_edge):
            out.append((f"w_edge_{l + 1}", w))
        out += [("mlp_w1", self.mlp_w1), ("mlp_b1", self.mlp_b1[None, :]),
                ("mlp_w2", self.mlp_w2), ("mlp_b2", self.mlp_b2[None, :])]
        return out

    def zeros_like(self):
        return Parameters(
            config=self.config,
            w_node_in=np.zeros_like(self.w_node_in),
            w_edge_in=np.zeros_like(self.w_edge_in),
            w_node=[np.zeros_like(w) for w in self.w_node],
            w_edge=[np.zeros_like(w) for w in self.w_edge],
            mlp_w1=np.zeros_like(self.mlp_w1),
            mlp_b1=np.zeros_like(self.mlp_b1),
            mlp_w2=np.zeros_like(self.mlp_w2),
            mlp_b2=np.zeros_like(self.mlp_b2),
        )

    def copy(self):
        return Parameters(
            config=self.config,
            w_node_in=self.w_node_in.copy(),
            w_edge_in=self.w_edge_in.copy(),
            w_node=[w.copy() for w in self.w_node],
            w_edge=[w.copy() for w in self.w_edge],
            mlp_w1=self.mlp_w1.copy(),
            mlp_b1=self.mlp_b1.copy(),
            mlp_w2=self.mlp_w2.copy(),
            mlp_b2=self.mlp_b2.copy(),
        )

    def flat_arrays(self):
        """Mutable views of every parameter array, fixed order."""
        return ([self.w_node_in, self.w_edge_in] + self.w_node + self.w_edge
                + [self.mlp_w1, self.mlp_b1, self.mlp_w2, self.mlp_b2])

    def axpy(self, scale, other: "Parameters"):
        """self += scale * other, in place."""
        for a, b in zip(self.flat_arrays(), other.flat_arrays()):
            a += scale * b

    def grad_norm(self):
        return float(np.sqrt(sum(float((a * a).sum()) for a in self.flat_arrays())))


def _xavier(rng, out_dim, in_dim):
    bound = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-bound, bound, size=(out_dim, in_dim))


def init_parameters(config: GnnConfig, rng) -> Parameters:
    """Xavier-uniform weights, zero biases; deterministic given the rng state."""
    h = config.hidden_dim
    return Parameters(
        config=config,
        w_node_in=_xavier(rng, h, 5),
        w_edge_in=_xavier(rng, h, 3),
        w_node=[_xavier(rng, h, h) for _ in range(config.layers)],
        w_edge=[_xavier(rng, h, h) for _ in range(config.layers)],
        mlp_w1=_xavier(rng, config.mlp_hidden, config.policy_input_dim),
        mlp_b1=np.zeros(config.mlp_hidden),
        mlp_w2=_xavier(rng, 1, config.mlp_hidden),
        mlp_b2=np.zeros(1),
    )


@dataclass
class EmbeddingCache:
    """Forward-pass intermediates kept around for the backward pass."""

    config: GnnConfig
    ablation: Ablation
    node_count: int
    alive_count: int
    src_idx: np.ndarray          # (m,) tail node per alive edge
    dst_idx: np.ndarray          # (m,) head node per alive edge
    nbr_i: np.ndarray            # aggregation pairs: i receives from j
    nbr_j: np.ndarray
    line_q: np.ndarray           # line node q receives from line node p
    line_p: np.ndarray
    node_inputs: np.ndarray      # (n, 5) after ablation zeroing
    edge_inputs: np.ndarray      # (m, 3)
    node_layers: list            # L+1 x (n, h)
    node_tanh: list              # L x (n, h) or None when passing disabled
    line_layers: list
    line_tanh: list
    final_edge: np.ndarray       # (m, 3h)
    # set by the policy scoring pass
    mlp_input: np.ndarray | None = None
    mlp_hidden: np.ndarray | None = None
    logits: np.ndarray | None = None
    community_of: np.ndarray | None = None
    community_sizes: np.ndarray | None = None
    source: int | None = None


def _neighbor_pairs(g: SocialGraph):
    """Union-of-directions neighbor pairs (i, j): j is adjacent to i."""
    eids = g.alive_edge_ids()
    a = np.concatenate([g.src[eids], g.dst[eids]])
    b = np.concatenate([g.dst[eids], g.src[eids]])
    pairs = np.unique(np.stack([a, b], axis=1), axis=0)
    return pairs[:, 0], pairs[:, 1]


def gnn_forward(g: SocialGraph, lg: LineGraph, feats: FeatureMatrix,
                params: Parameters, ablation: Ablation = Ablation()) -> EmbeddingCache:
    """Compute all layer embeddings and the final per-edge concatenation."""
    config = params.config
    eids = feats.alive_edge_ids
    if lg.line_node_count != eids.size or not np.array_equal(lg.primal_edge_of, eids):
        raise ValueError("line graph is stale for this graph/feature snapshot")
    node_inputs = feats.node_features.copy()
    edge_inputs = feats.edge_features.copy()
    for col in ablation.drop_node_columns:
        node_inputs[:, col] = 0.0
    for col in ablation.drop_edge_columns:
        edge_inputs[:, col] = 0.0

    nbr_i, nbr_j = _neighbor_pairs(g)
    line_pairs = lg.line_edge_indices()
    line_p, line_q = line_pairs[:, 0], line_pairs[:, 1]

    node_layers = [node_inputs @ params.w_node_in.T]
    node_tanh = []
    for l in range(config.layers):
        if ablation.disable_node_passing:
            node_layers.append(node_layers[-1])
            node_tanh.append(None)
            continue
        z = node_layers[-1] @ params.w_node[l].T
        agg = _kernels.segment_sum(z[nbr_j], nbr_i, g.node_count)
        t = np.tanh(agg)
        node_tanh.append(t)
        node_layers.append(node_layers[-1] + t)

    line_layers = [edge_inputs @ params.w_edge_in.T]
    line_tanh = []
    m = eids.size
    for l in range(config.layers):
        if ablation.disable_edge_passing:
            line_layers.append(line_layers[-1])
            line_tanh.append(None)
            continue
        z = line_layers[-1] @ params.w_edge[l].T
        if line_p.size:
            agg = _kernels.segment_sum(z[line_p], line_q, m)
        else:
            agg = np.zeros_like(z)
        t = np.tanh(agg)
        line_tanh.append(t)
        line_layers.append(line_layers[-1] + t)

    src_idx = g.src[eids]
    dst_idx = g.dst[eids]
    final_edge = np.concatenate(
        [node_layers[-1][src_idx], node_layers[-1][dst_idx], line_layers[-1]], axis=1
    )
    return EmbeddingCache(
        config=config,
        ablation=ablation,
        node_count=g.node_count,
        alive_count=m,
        src_idx=src_idx,
        dst_idx=dst_idx,
        nbr_i=nbr_i,
        nbr_j=nbr_j,
        line_q=line_q,
        line_p=line_p,
        node_inputs=node_inputs,
        edge_inputs=edge_inputs,
        node_layers=node_layers,
        node_tanh=node_tanh,
        line_layers=line_layers,
        line_tanh=line_tanh,
        final_edge=final_edge,
    )


def mlp_forward(x, params: Parameters):
    """Scoring MLP body: one tanh hidden layer, scalar output per row."""
    hidden = np.tanh(x @ params.mlp_w1.T + params.mlp_b1)
    logits = (hidden @ params.mlp_w2.T + params.mlp_b2).ravel()
    return hidden, logits


def backward(cache: EmbeddingCache, dlogits, params: Parameters) -> Parameters:
    """Exact gradients of sum(dlogits * logits) w.r.t. every parameter.

    Requires the cache to have been completed by a scoring pass (the MLP
    input and hidden activations are needed to run the chain in reverse).
    """
    if cache.mlp_input is None or cache.mlp_hidden is None:
        raise ValueError("cache is missing the scoring pass; call score_edges first")
    dlogits = np.asarray(dlogits, dtype=np.float64)
    if dlogits.shape != (cache.alive_count,):
        raise ValueError(
            f"dlogits shape {dlogits.shape} does not match {cache.alive_count} alive edges"
        )
    config = cache.config
    h = config.hidden_dim
    grads = params.zeros_like()

    # scoring MLP
    hidden = cache.mlp_hidden
    x = cache.mlp_input
    grads.mlp_w2 += dlogits[None, :] @ hidden
    grads.mlp_b2 += dlogits.sum()
    dhidden = dlogits[:, None] @ params.mlp_w2
    da1 = dhidden * (1.0 - hidden * hidden)
    grads.mlp_w1 += da1.T @ x
    grads.mlp_b1 += da1.sum(axis=0)
    dx = da1 @ params.mlp_w1

    # split the concatenated scoring input
    d_nl = np.zeros((cache.node_count, h))
    np.add.at(d_nl, cache.src_idx, dx[:, 0:h])
    np.add.at(d_nl, cache.dst_idx, dx[:, h:2 * h])
    d_ml = dx[:, 2 * h:3 * h].copy()
    if not cache.ablation.drop_community:
        comm_of = cache.community_of
        k = cache.community_sizes.shape[0]
        dcomm = _kernels.segment_sum(dx[:, 3 * h:4 * h], comm_of[cache.src_idx], k)
        dcomm += _kernels.segment_sum(dx[:, 4 * h:5 * h], comm_of[cache.dst_idx], k)
        d_nl += (dcomm / cache.community_sizes[:, None])[comm_of]
    if not cache.ablation.drop_source:
        d_nl[cache.source] += dx[:, 5 * h:6 * h].sum(axis=0)

    # node message-passing chain
    for l in range(config.layers - 1, -1, -1):
        if cache.ablation.disable_node_passing:
            continue
        t = cache.node_tanh[l]
        da = d_nl * (1.0 - t * t)
        dz = _kernels.segment_sum(da[cache.nbr_i], cache.nbr_j, cache.node_count)
        grads.w_node[l] += dz.T @ cache.node_layers[l]
        d_nl = d_nl + dz @ params.w_node[l]
    grads.w_node_in += d_nl.T @ cache.node_inputs

    # line-graph chain
    for l in range(config.layers - 1, -1, -1):
        if cache.ablation.disable_edge_passing:
            continue
        t = cache.line_tanh[l]
        da = d_ml * (1.0 - t * t)
        if cache.line_q.size:
            dz = _kernels.segment_sum(da[cache.line_q], cache.line_p, cache.alive_count)
        else:
            dz = np.zeros_like(da)
        grads.w_edge[l] += dz.T @ cache.line_layers[l]
        d_ml = d_ml + dz @ params.w_edge[l]
    grads.w_edge_in += d_ml.T @ cache.edge_inputs
    return grads


def save_parameters(params: Parameters, sink):
    """Write a self-describing binary checkpoint (little-endian float64)."""
    own = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
    f = open(sink, "wb") if own else sink
    try:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<IIII", CHECKPOINT_VERSION, params.config.hidden_dim,
                            params.config.layers, params.config.mlp_hidden))
        for _, matrix in params.matrices():
            rows, cols = matrix.shape
            f.write(struct.pack("<II", rows, cols))
            f.write(np.ascontiguousarray(matrix, dtype="<f8").tobytes())
    finally:
        if own:
            f.close()


def _read_exact(f, size, what):
    data = f.read(size)
    if len(data) != size:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return data


def load_parameters(source, expected_config: GnnConfig | None = None) -> Parameters:
    """Read a checkpoint; optionally reject configs other than the expected one."""
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    f = open(source, "rb") if own else source
    try:
        if _read_exact(f, 4, "magic") != CHECKPOINT_MAGIC:
            raise CheckpointError("not a parameter checkpoint (bad magic)")
        version, hidden, layers, mlp_hidden = struct.unpack(
            "<IIII", _read_exact(f, 16, "header")
        )
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        config = GnnConfig(hidden_dim=hidden, layers=layers, mlp_hidden=mlp_hidden)
        if expected_config is not None and config != expected_config:
            raise CheckpointError(
                f"checkpoint config {config} does not match expected {expected_config}"
            )
        template = init_parameters(config, np.random.Generator(np.random.PCG64(0)))
        loaded = []
        for name, matrix in template.matrices():
            rows, cols = struct.unpack("<II", _read_exact(f, 8, f"{name} shape"))
            if (rows, cols) != matrix.shape:
                raise CheckpointError(
                    f"{name} has shape ({rows}, {cols}), expected {matrix.shape}"
                )
            data = np.frombuffer(
                _read_exact(f, rows * cols * 8, name), dtype="<f8"
            ).reshape(rows, cols)
            loaded.append(data.astype(np.float64))
        if f.read(1):
            raise CheckpointError("trailing bytes after last matrix")
    finally:
        if own:
            f.close()
    layers_n = config.layers
    return Parameters(
        config=config,
        w_node_in=loaded[0],
        w_edge_in=loaded[1],
        w_node=loaded[2:2 + layers_n],
        w_edge=loaded[2 + layers_n:2 + 2 * layers_n],
        mlp_w1=loaded[2 + 2 * layers_n],
        mlp_b1=loaded[3 + 2 * layers_n].ravel(),
        mlp_w2=loaded[4 + 2 * layers_n],
        mlp_b2=loaded[5 + 2 * layers_n].ravel(),
    )
