"""Edge-label prediction loss: concatenated endpoint embeddings through a
small feed-forward classifier, multi-label binary cross-entropy.

Edge vectors are built from the center table only, with endpoints in
canonical (low index, high index) order so the undirected edge (u, v) and
(v, u) compose identically. Hidden layers use ReLU, the output layer a
per-label sigmoid. Gradients flow into the classifier parameters and into
the endpoint rows of the center table; the context table is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import NumericsError, ValidationError
from .params import EmbeddingTables, SparseGrad, accumulate_rows

PROB_FLOOR = 1e-12  # predicted probabilities are clamped to [floor, 1 - floor]


@dataclass
class MlpParams:
    """Weights[k] has shape (fan_out, fan_in); one hidden layer by default."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_mlp(input_dim: int, hidden_dim: int, output_dim: int,
             rng: np.random.Generator, dtype=np.float64) -> MlpParams:
    """Glorot-uniform weights, zero biases."""
    sizes = [input_dim, hidden_dim, output_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return MlpParams(weights=weights, biases=biases)


def compose_edge_embedding(u: int, v: int, tables: EmbeddingTables) -> np.ndarray:
    """Concatenate the center rows of min(u, v) and max(u, v)."""
    lo, hi = (u, v) if u < v else (v, u)
    return np.concatenate([tables.center[lo], tables.center[hi]])


def compose_batch(edges: np.ndarray, tables: EmbeddingTables) -> tuple[np.ndarray, np.ndarray]:
    """Edge vectors for an (N, 2) index array; returns (vectors, canonical edges)."""
    edges = np.asarray(edges)
    canon = np.sort(edges, axis=1)
    x = np.concatenate([tables.center[canon[:, 0]], tables.center[canon[:, 1]]], axis=1)
    return x, canon


def mlp_forward(x: np.ndarray, params: MlpParams) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass; returns per-label probabilities and cached activations.

    ``x`` may be one vector or an (N, input_dim) batch. The cache holds the
    input of every layer (post-activation), for the backward pass.
    """
    single = x.ndim == 1
    h = np.atleast_2d(x)
    cache = [h]
    depth = len(params.weights)
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w.T + b
        if not np.isfinite(z).all():
            raise NumericsError(f"non-finite activation at classifier layer {k}")
        h = expit(z) if k == depth - 1 else np.maximum(z, 0.0)
        cache.append(h)
    y_hat = cache[-1]
    return (y_hat[0] if single else y_hat), cache


def bce_loss(y: np.ndarray, y_hat: np.ndarray) -> float:
    """Multi-label binary cross-entropy, summed over labels.

    Probabilities are clamped to [1e-12, 1 - 1e-12] so the result stays
    finite for any parameters.
    """
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise ValidationError(f"target shape {y.shape} != prediction shape {y_hat.shape}")
    p = np.clip(y_hat, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return float(-(y * np.log(p) + (1.0 - y) * np.log1p(-p)).sum())


def relational_loss(edges: np.ndarray, targets: np.ndarray, tables: EmbeddingTables,
                    params: MlpParams) -> float:
    """Mean per-edge cross-entropy of a batch (forward only)."""
    x, _ = compose_batch(edges, tables)
    y_hat, _ = mlp_forward(x, params)
    targets = np.asarray(targets, dtype=np.float64)
    p = np.clip(y_hat, PROB_FLOOR, 1.0 - PROB_FLOOR)
    per_edge = -(targets * np.log(p) + (1.0 - targets) * np.log1p(-p)).sum(axis=1)
    return float(per_edge.mean())


@dataclass
class RelationalBatchResult:
    loss: float
    grads: SparseGrad


def relational_backward(edges: np.ndarray, targets: np.ndarray, tables: EmbeddingTables,
                        params: MlpParams) -> RelationalBatchResult:
    """Loss plus exact gradients of the mean batch cross-entropy.

    Gradients cover every classifier weight and bias and the endpoint rows
    of the center table (through the concatenation); the context table gets
    no gradient.
    """
    edges = np.asarray(edges)
    if len(edges) == 0:
        raise ValidationError("relational batch must be non-empty")
    targets = np.asarray(targets, dtype=np.float64)
    x, canon = compose_batch(edges, tables)
    y_hat, cache = mlp_forward(x, params)
    n = len(edges)

    p = np.clip(y_hat, PROB_FLOOR, 1.0 - PROB_FLOOR)
    loss = float(-(targets * np.log(p) + (1.0 - targets) * np.log1p(-p)).sum(axis=1).mean())

    # Sigmoid + cross-entropy collapse to (y_hat - y) at the output layer.
    delta = (y_hat - targets) / n
    weight_grads: list[np.ndarray] = [None] * len(params.weights)
    bias_grads: list[np.ndarray] = [None] * len(params.biases)
    for k in range(len(params.weights) - 1, -1, -1):
        h_in = cache[k]
        weight_grads[k] = delta.T @ h_in
        bias_grads[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ params.weights[k]) * (cache[k] > 0.0)
    d_x = delta @ params.weights[0]  # (N, 2d): gradient w.r.t. the edge vectors

    dim = tables.dim
    rows = np.concatenate([canon[:, 0], canon[:, 1]])
    row_grads = np.concatenate([d_x[:, :dim], d_x[:, dim:]])
    center_rows, center_grads = accumulate_rows(rows, row_grads)

    grad = SparseGrad(
        center_rows=center_rows,
        center_grads=center_grads,
        mlp_weight_grads=weight_grads,
        mlp_bias_grads=bias_grads,
    )
    return RelationalBatchResult(loss=loss, grads=grad)
