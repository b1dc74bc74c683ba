"""GNN layers and multi-layer pipelines under two computational models.

Three models (GCN, GIN, GraphSAGE) are each expressed over the core
kernels, under the message-passing (MP) model and, for GCN and GIN, the
sparse-matrix (SpMM) model as well:

- GCN-MP: per-node update ``act( sum_{u in N(v)+{v}} x_u Theta / sqrt(d_u d_v) )``,
  realized as linear transform, gather by edge source, per-edge scaling,
  scatter-sum by edge destination. The linear transform runs first; by
  linearity that is equivalent to transforming after the sum.
- GCN-SpMM: ``act( norm_adj @ X @ Theta )`` with the symmetrically
  normalized self-looped adjacency built once per run.
- GIN-MP: ``act( ((1 + eps) * X + neighbor_sum) @ Theta )`` where the
  neighbor sum runs over the raw edge list (the ``1 + eps`` term carries
  the self contribution, so no self-loops are inserted).
- GIN-SpMM: ``act( (A + (1 + eps) I) @ X @ Theta )``.
- SAGE-MP: ``act( X @ W1 + neighbor_mean @ W2 )`` with the mean taken over
  ``N(v) + {v}`` (self-loops inserted). SAGE has no SpMM formulation here,
  and requesting one is rejected.

The two computational models of the same network agree within floating
point reordering error; that equivalence is the central correctness
property and is enforced by the test suite and the ``check`` CLI command.

Weights are dense matrices drawn uniformly from [-1/sqrt(f_in),
+1/sqrt(f_in)] by a SplitMix64 stream keyed on (seed, layer, role), so a
given ``ModelSpec`` always produces bit-identical weights. There are no
bias terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, ShapeError
from .graph import (
    CooGraph,
    CsrGraph,
    add_self_loops,
    compute_degrees,
    coo_to_csr,
    normalized_adjacency,
    sym_norm_coefficients,
)
from .kernels import ReduceOp
from .rng import mix_key, uniform_array

__all__ = [
    "Model",
    "CompModel",
    "Activation",
    "ModelSpec",
    "LayerParams",
    "PipelineContext",
    "init_weights",
    "prepare",
    "forward",
    "gcn_layer_mp",
    "gcn_layer_spmm",
    "gin_layer_mp",
    "gin_layer_spmm",
    "sage_layer_mp",
    "relu",
    "sigmoid",
    "apply_activation",
    "gin_operator",
]


class Model(Enum):
    GCN = "gcn"
    GIN = "gin"
    SAGE = "sage"


class CompModel(Enum):
    MP = "mp"
    SPMM = "spmm"


class Activation(Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    IDENTITY = "identity"


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Elementwise 1 / (1 + exp(-x)), evaluated in overflow-safe form."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def apply_activation(x: np.ndarray, act: Activation) -> np.ndarray:
    if act is Activation.RELU:
        return relu(x)
    if act is Activation.SIGMOID:
        return sigmoid(x)
    return x


@dataclass(frozen=True)
class ModelSpec:
    """Fully determined pipeline description."""

    model: Model
    comp_model: CompModel
    num_layers: int
    dims: tuple
    activation: Activation = Activation.RELU
    epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.num_layers < 1:
            raise ConfigError("num_layers must be >= 1")
        if len(self.dims) != self.num_layers + 1:
            raise ConfigError(
                f"dims must have num_layers + 1 = {self.num_layers + 1} entries, "
                f"got {len(self.dims)}"
            )
        if any(d < 1 for d in self.dims):
            raise ConfigError("feature widths must be positive")
        if self.model is Model.SAGE and self.comp_model is CompModel.SPMM:
            raise ConfigError(
                "sage has no spmm formulation; it is implemented under the "
                "mp computational model only"
            )

    def summary(self) -> dict:
        return {
            "model": self.model.value,
            "comp": self.comp_model.value,
            "layers": self.num_layers,
            "dims": list(self.dims),
            "activation": self.activation.value,
            "epsilon": self.epsilon,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class LayerParams:
    """Per-layer weights; which matrices are present depends on the model.

    GCN and GIN carry ``theta`` only; SAGE carries ``w1`` (self) and ``w2``
    (neighbor). The paper-level scalar weights of SAGE are generalized to
    full matrices so layers can change feature width; a scalar is the 1x1
    special case.
    """

    theta: Optional[np.ndarray] = None
    w1: Optional[np.ndarray] = None
    w2: Optional[np.ndarray] = None
    epsilon: float = 0.0

    def astype(self, dtype) -> "LayerParams":
        cast = lambda m: None if m is None else m.astype(dtype, copy=False)
        return LayerParams(cast(self.theta), cast(self.w1), cast(self.w2),
                           self.epsilon)


_ROLE_THETA = 0
_ROLE_W1 = 1
_ROLE_W2 = 2


def _draw_matrix(seed: int, layer: int, role: int, f_in: int, f_out: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(f_in)
    u = uniform_array(mix_key(seed, layer, role), f_in * f_out)
    return ((2.0 * u - 1.0) * bound).reshape(f_in, f_out)


def init_weights(spec: ModelSpec) -> list:
    """Deterministic weight initialization for every layer of ``spec``.

    Entries are uniform in [-1/sqrt(f_in), +1/sqrt(f_in)]; the stream is
    keyed by (seed, layer index, matrix role), so identical specs yield
    bit-identical weights and different seeds decorrelate.
    """
    params = []
    for layer in range(spec.num_layers):
        f_in, f_out = spec.dims[layer], spec.dims[layer + 1]
        if spec.model is Model.SAGE:
            params.append(LayerParams(
                w1=_draw_matrix(spec.seed, layer, _ROLE_W1, f_in, f_out),
                w2=_draw_matrix(spec.seed, layer, _ROLE_W2, f_in, f_out),
                epsilon=spec.epsilon,
            ))
        else:
            params.append(LayerParams(
                theta=_draw_matrix(spec.seed, layer, _ROLE_THETA, f_in, f_out),
                epsilon=spec.epsilon,
            ))
    return params


def gin_operator(g: CooGraph, epsilon: float) -> CsrGraph:
    """CSR of ``A + (1 + eps) I`` built from the raw edge list."""
    nodes = np.arange(g.num_nodes, dtype=np.int64)
    src = np.concatenate([g.src, nodes])
    dst = np.concatenate([g.dst, nodes])
    loop_w = np.full(g.num_nodes, 1.0 + epsilon, dtype=g.weights.dtype)
    weights = np.concatenate([g.weights, loop_w])
    return coo_to_csr(CooGraph(g.num_nodes, src, dst, weights))


@dataclass(frozen=True)
class PipelineContext:
    """Per-run edge structures, computed once and reused across layers."""

    src: Optional[np.ndarray] = None
    dst: Optional[np.ndarray] = None
    coeff: Optional[np.ndarray] = None
    adj: Optional[CsrGraph] = None


def _gcn_mp_context(g: CooGraph) -> PipelineContext:
    # per-edge message scale: edge weight times 1/sqrt(d_src * d_dst), so
    # weighted graphs stay equivalent to the normalized-adjacency route
    looped = add_self_loops(g)
    coeff = sym_norm_coefficients(looped, compute_degrees(looped))
    return PipelineContext(src=looped.src, dst=looped.dst,
                           coeff=coeff * looped.weights)


def prepare(spec: ModelSpec, g: CooGraph) -> PipelineContext:
    """Precompute the edge structures the selected pipeline needs."""
    if spec.comp_model is CompModel.SPMM:
        if spec.model is Model.GCN:
            return PipelineContext(adj=normalized_adjacency(g))
        return PipelineContext(adj=gin_operator(g, spec.epsilon))
    if spec.model is Model.GCN:
        return _gcn_mp_context(g)
    if spec.model is Model.SAGE:
        looped = add_self_loops(g)
        return PipelineContext(src=looped.src, dst=looped.dst)
    return PipelineContext(src=g.src, dst=g.dst, coeff=g.weights)


def _kernel_backend(instr):
    # Instrumented runs pass an object duck-typing the kernels module.
    return kernels if instr is None else instr


def _check_rows(g: CooGraph, x: np.ndarray):
    if x.ndim != 2 or x.shape[0] != g.num_nodes:
        raise ShapeError(
            f"feature matrix shape {x.shape} does not match {g.num_nodes} nodes"
        )


def _gcn_mp_apply(ctx, n, x, p, act, instr):
    k = _kernel_backend(instr)
    y = k.sgemm(x, p.theta)
    msgs = ctx.coeff[:, None] * k.index_select(y, ctx.src)
    return apply_activation(k.scatter(msgs, ctx.dst, n, ReduceOp.SUM), act)


def _spmm_apply(ctx, x, p, act, instr):
    k = _kernel_backend(instr)
    return apply_activation(k.sgemm(k.spmm(ctx.adj, x), p.theta), act)


def _gin_mp_apply(ctx, n, x, p, act, instr):
    k = _kernel_backend(instr)
    msgs = ctx.coeff[:, None] * k.index_select(x, ctx.src)
    agg = k.scatter(msgs, ctx.dst, n, ReduceOp.SUM)
    return apply_activation(k.sgemm((1.0 + p.epsilon) * x + agg, p.theta), act)


def _sage_mp_apply(ctx, n, x, p, act, instr):
    k = _kernel_backend(instr)
    mean = k.scatter(k.index_select(x, ctx.src), ctx.dst, n, ReduceOp.MEAN)
    return apply_activation(k.sgemm(x, p.w1) + k.sgemm(mean, p.w2), act)


def gcn_layer_mp(g: CooGraph, x: np.ndarray, p: LayerParams, act: Activation,
                 instr=None) -> np.ndarray:
    """One GCN layer under message passing (self-loops inserted internally)."""
    _check_rows(g, x)
    return _gcn_mp_apply(_gcn_mp_context(g), g.num_nodes, x, p, act, instr)


def gcn_layer_spmm(g: CooGraph, x: np.ndarray, p: LayerParams, act: Activation,
                   instr=None) -> np.ndarray:
    """One GCN layer as normalized-adjacency times features times weights."""
    _check_rows(g, x)
    ctx = PipelineContext(adj=normalized_adjacency(g))
    return _spmm_apply(ctx, x, p, act, instr)


def gin_layer_mp(g: CooGraph, x: np.ndarray, p: LayerParams, act: Activation,
                 instr=None) -> np.ndarray:
    """One GIN layer under message passing over the raw edge list."""
    _check_rows(g, x)
    ctx = PipelineContext(src=g.src, dst=g.dst, coeff=g.weights)
    return _gin_mp_apply(ctx, g.num_nodes, x, p, act, instr)


def gin_layer_spmm(g: CooGraph, x: np.ndarray, p: LayerParams, act: Activation,
                   instr=None) -> np.ndarray:
    """One GIN layer as ``(A + (1 + eps) I) @ X @ Theta``."""
    _check_rows(g, x)
    ctx = PipelineContext(adj=gin_operator(g, p.epsilon))
    return _spmm_apply(ctx, x, p, act, instr)


def sage_layer_mp(g: CooGraph, x: np.ndarray, p: LayerParams, act: Activation,
                  instr=None) -> np.ndarray:
    """One GraphSAGE layer; neighbor mean is over N(v) plus the node itself."""
    _check_rows(g, x)
    looped = add_self_loops(g)
    ctx = PipelineContext(src=looped.src, dst=looped.dst)
    return _sage_mp_apply(ctx, g.num_nodes, x, p, act, instr)


def _check_params(spec: ModelSpec, params: Sequence[LayerParams]):
    if len(params) != spec.num_layers:
        raise ShapeError(
            f"expected {spec.num_layers} layer params, got {len(params)}"
        )
    for i, p in enumerate(params):
        want = (spec.dims[i], spec.dims[i + 1])
        mats = (p.w1, p.w2) if spec.model is Model.SAGE else (p.theta,)
        for m in mats:
            if m is None or m.shape != want:
                got = None if m is None else m.shape
                raise ShapeError(
                    f"layer {i} weight shape {got} breaks dims chain {want}"
                )


def forward(spec: ModelSpec, params: Sequence[LayerParams], g: CooGraph,
            x: np.ndarray, instr=None, ctx: Optional[PipelineContext] = None
            ) -> np.ndarray:
    """Run the full pipeline, threading the feature matrix through every layer.

    The activation is applied after every layer including the last. Edge
    structures are computed once (or taken from a caller-supplied ``ctx``)
    and reused across layers.
    """
    _check_rows(g, x)
    if x.shape[1] != spec.dims[0]:
        raise ShapeError(
            f"input feature width {x.shape[1]} != dims[0] = {spec.dims[0]}"
        )
    _check_params(spec, params)
    if ctx is None:
        ctx = prepare(spec, g)
    n = g.num_nodes
    h = x
    for p in params:
        if spec.comp_model is CompModel.SPMM:
            h = _spmm_apply(ctx, h, p, spec.activation, instr)
        elif spec.model is Model.GCN:
            h = _gcn_mp_apply(ctx, n, h, p, spec.activation, instr)
        elif spec.model is Model.GIN:
            h = _gin_mp_apply(ctx, n, h, p, spec.activation, instr)
        else:
            h = _sage_mp_apply(ctx, n, h, p, spec.activation, instr)
    return h
