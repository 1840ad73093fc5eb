"""Skip-gram structural loss with negative sampling.

A (center v, context u) pair contributes

    -log sigmoid(c_v . q_u) - sum_k log sigmoid(-c_v . q_{n_k})

where c is the center table, q the context table, and the K negatives n_k
are drawn from a degree^power noise distribution, redrawn whenever they
collide with the pair's own context. The batch loss is the mean over
pairs, and gradients are exact analytic gradients of that mean.

Log-sigmoid terms are evaluated with logaddexp and the logistic function
with scipy's expit, so no score magnitude can produce an infinity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigError, ValidationError
from .params import EmbeddingTables, SparseGrad, accumulate_rows


class NoiseDistribution:
    """Negative-sampling distribution with weight proportional to degree**power."""

    def __init__(self, degrees: np.ndarray, power: float = 0.75):
        degrees = np.asarray(degrees, dtype=np.float64)
        if (degrees < 0).any():
            raise ConfigError("degrees must be non-negative")
        weights = degrees ** power
        total = weights.sum()
        if total <= 0:
            raise ConfigError("noise distribution needs at least one positive-degree node")
        self.power = power
        self.probs = weights / total
        self._cumulative = np.cumsum(self.probs)
        self._cumulative[-1] = 1.0  # guard the tail against rounding

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.searchsorted(self._cumulative, rng.random(size), side="right")


def sample_negatives(
    contexts: np.ndarray, k: int, noise: NoiseDistribution, rng: np.random.Generator
) -> np.ndarray:
    """Draw k negatives per pair, redrawing any that equal the pair's context."""
    if k < 1:
        raise ConfigError(f"negative count must be >= 1, got {k}")
    negs = noise.sample(rng, (len(contexts), k))
    for _ in range(100):
        clash = negs == contexts[:, None]
        n_clash = int(clash.sum())
        if n_clash == 0:
            return negs
        negs[clash] = noise.sample(rng, n_clash)
    raise ValidationError("negative sampling failed to avoid the positive context")


def softmax_distribution(v: int, tables: EmbeddingTables) -> np.ndarray:
    """Full softmax over all context rows for center node v (reference path,
    O(num_nodes); testing only, never used in training)."""
    scores = tables.context @ tables.center[v]
    scores = scores - scores.max()
    e = np.exp(scores)
    return e / e.sum()


def softmax_prob(u: int, v: int, tables: EmbeddingTables) -> float:
    """Reference probability of context u given center v under the full softmax."""
    return float(softmax_distribution(v, tables)[u])


@dataclass
class StructuralBatchResult:
    loss: float
    grads: SparseGrad
    negatives: np.ndarray


def loss_and_grads(
    pairs: np.ndarray, negatives: np.ndarray, tables: EmbeddingTables
) -> tuple[float, SparseGrad]:
    """Negative-sampling loss and exact gradients for fixed negatives.

    ``pairs`` is (N, 2) [center, context]; ``negatives`` is (N, K).
    Kept separate from the sampling step so gradients can be checked by
    finite differences against the very same function.
    """
    centers = np.asarray(pairs)[:, 0]
    contexts = np.asarray(pairs)[:, 1]
    n = len(centers)
    c = tables.center[centers]            # (N, d)
    q_pos = tables.context[contexts]      # (N, d)
    q_neg = tables.context[negatives]     # (N, K, d)

    pos_scores = np.einsum("nd,nd->n", c, q_pos)
    neg_scores = np.einsum("nd,nkd->nk", c, q_neg)
    loss = (np.logaddexp(0.0, -pos_scores).sum() + np.logaddexp(0.0, neg_scores).sum()) / n

    d_pos = (expit(pos_scores) - 1.0) / n     # (N,)
    d_neg = expit(neg_scores) / n             # (N, K)

    g_center = d_pos[:, None] * q_pos + np.einsum("nk,nkd->nd", d_neg, q_neg)
    g_ctx_pos = d_pos[:, None] * c
    g_ctx_neg = d_neg[:, :, None] * c[:, None, :]

    center_rows, center_grads = accumulate_rows(centers, g_center)
    ctx_rows_all = np.concatenate([contexts, negatives.ravel()])
    ctx_grads_all = np.concatenate([g_ctx_pos, g_ctx_neg.reshape(-1, tables.dim)])
    context_rows, context_grads = accumulate_rows(ctx_rows_all, ctx_grads_all)

    grad = SparseGrad(
        center_rows=center_rows,
        center_grads=center_grads,
        context_rows=context_rows,
        context_grads=context_grads,
    )
    return float(loss), grad


def negative_sampling_loss(
    pairs: np.ndarray,
    k: int,
    tables: EmbeddingTables,
    noise: NoiseDistribution,
    rng: np.random.Generator,
) -> StructuralBatchResult:
    """Draw negatives and evaluate the batch loss and gradients."""
    negatives = sample_negatives(np.asarray(pairs)[:, 1], k, noise, rng)
    loss, grads = loss_and_grads(pairs, negatives, tables)
    return StructuralBatchResult(loss=loss, grads=grads, negatives=negatives)
