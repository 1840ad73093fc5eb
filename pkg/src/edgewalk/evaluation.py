"""Multi-label node-classification harness.

Protocol: sample a fraction of the nodes as training data, fit one-vs-rest
L2-regularized logistic regression on their embeddings, predict labels for
the remaining nodes, and report Macro-F1. Each node's prediction keeps the
top-k scoring labels where k is that node's true label count (ties broken
toward the lower label index), which makes scores comparable across
methods that produce probabilities on different scales. The split/fit/score
cycle is repeated with fresh seeded splits and the per-ratio mean and
standard deviation are reported.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .errors import ConfigError, ValidationError

log = logging.getLogger(__name__)

SOLVER_GRAD_TOL = 1e-6
SOLVER_MAX_ITER = 1000


@dataclass
class EvalConfig:
    """Evaluation protocol knobs."""

    train_ratios: tuple[float, ...] = (0.05, 0.10, 0.20)
    repeats: int = 10
    l2_strength: float = 1.0
    normalize: bool = False
    seed: int = 1

    def validate(self) -> None:
        if not self.train_ratios:
            raise ConfigError("train_ratios must be non-empty")
        if any(not 0.0 < r < 1.0 for r in self.train_ratios):
            raise ConfigError(f"train ratios must lie in (0, 1), got {self.train_ratios}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        if self.l2_strength < 0:
            raise ConfigError(f"l2_strength must be >= 0, got {self.l2_strength}")


@dataclass
class OvrClassifier:
    """One weight vector and bias per label; untrained labels score -inf."""

    weights: np.ndarray          # (num_labels, num_features)
    biases: np.ndarray           # (num_labels,)
    trained: np.ndarray          # (num_labels,) bool
    skipped_labels: list[int] = field(default_factory=list)

    def scores(self, features: np.ndarray) -> np.ndarray:
        s = features @ self.weights.T + self.biases
        s[:, ~self.trained] = -np.inf
        return s


def _logreg_objective(theta, x, sign, l2):
    """Objective and gradient of sum log(1 + exp(-sign * (x.w + b))) + l2/2 ||w||^2.

    The bias (last coordinate) is not regularized.
    """
    w, b = theta[:-1], theta[-1]
    z = sign * (x @ w + b)
    value = np.logaddexp(0.0, -z).sum() + 0.5 * l2 * (w @ w)
    coef = -sign * expit(-z)
    grad = np.empty_like(theta)
    grad[:-1] = x.T @ coef + l2 * w
    grad[-1] = coef.sum()
    return value, grad


def fit_binary_logreg(features: np.ndarray, positive: np.ndarray, l2_strength: float,
                      grad_tol: float = SOLVER_GRAD_TOL,
                      max_iter: int = SOLVER_MAX_ITER) -> tuple[np.ndarray, float]:
    """L-BFGS solve of one binary L2-regularized logistic regression.

    Returns (weights, bias). The problem is convex, so the stopping rule is
    a projected-gradient tolerance plus an iteration cap.
    """
    x = np.asarray(features, dtype=np.float64)
    sign = np.where(positive, 1.0, -1.0)
    theta0 = np.zeros(x.shape[1] + 1)
    res = minimize(_logreg_objective, theta0, args=(x, sign, l2_strength),
                   jac=True, method="L-BFGS-B",
                   options={"gtol": grad_tol, "maxiter": max_iter, "maxfun": 20 * max_iter})
    return res.x[:-1], float(res.x[-1])


def train_ovr_logreg(features: np.ndarray, label_sets: Sequence[frozenset[int]],
                     num_labels: int, l2_strength: float = 1.0) -> OvrClassifier:
    """Fit one binary classifier per label.

    Labels with no positive or no negative training example cannot be fit;
    they are skipped with a warning and recorded on the classifier.
    """
    x = np.asarray(features, dtype=np.float64)
    n = len(label_sets)
    if x.shape[0] != n:
        raise ValidationError(f"{x.shape[0]} feature rows for {n} label sets")
    weights = np.zeros((num_labels, x.shape[1]))
    biases = np.zeros(num_labels)
    trained = np.zeros(num_labels, dtype=bool)
    skipped = []
    for lab in range(num_labels):
        positive = np.fromiter((lab in s for s in label_sets), dtype=bool, count=n)
        pos = int(positive.sum())
        if pos == 0 or pos == n:
            skipped.append(lab)
            log.warning("label %d skipped: %s training examples", lab,
                        "no positive" if pos == 0 else "no negative")
            continue
        weights[lab], biases[lab] = fit_binary_logreg(x, positive, l2_strength)
        trained[lab] = True
    return OvrClassifier(weights=weights, biases=biases, trained=trained, skipped_labels=skipped)


def predict_top_k(classifier: OvrClassifier, features: np.ndarray,
                  k_per_node: Sequence[int]) -> list[frozenset[int]]:
    """Per node, the k highest-scoring labels; ties go to the lower index."""
    scores = classifier.scores(np.asarray(features, dtype=np.float64))
    order = np.argsort(-scores, axis=1, kind="stable")
    return [frozenset(order[i, : k_per_node[i]].tolist()) for i in range(len(order))]


def macro_f1(true_sets: Sequence[frozenset[int]], pred_sets: Sequence[frozenset[int]]) -> float:
    """Unweighted mean of per-label F1 over labels present in the ground truth.

    Per label: F1 = 2PR / (P + R), taken as 0 when P + R = 0.
    """
    if len(true_sets) != len(pred_sets):
        raise ValidationError("truth and prediction cover different node counts")
    labels = sorted(set().union(*true_sets)) if true_sets else []
    if not labels:
        return 0.0
    scores = []
    for lab in labels:
        tp = fp = fn = 0
        for truth, pred in zip(true_sets, pred_sets):
            has, got = lab in truth, lab in pred
            tp += has and got
            fp += got and not has
            fn += has and not got
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return float(np.mean(scores))


@dataclass
class EvalReport:
    """Per-ratio Macro-F1 summary plus the individual repeat scores."""

    ratios: tuple[float, ...]
    means: list[float]
    stds: list[float]
    scores: list[list[float]]    # scores[i][j]: ratio i, repeat j

    def format_table(self) -> str:
        lines = ["train_ratio  macro_f1_mean  macro_f1_std  repeats"]
        for ratio, mean, std, rep in zip(self.ratios, self.means, self.stds, self.scores):
            lines.append(f"{ratio:>11.2%}  {mean:>13.4f}  {std:>12.4f}  {len(rep):>7d}")
        return "\n".join(lines) + "\n"

    def write_tsv(self, stream) -> None:
        stream.write("ratio\trepeat\tmacro_f1\n")
        for ratio, rep in zip(self.ratios, self.scores):
            for j, score in enumerate(rep):
                stream.write(f"{ratio:.17g}\t{j}\t{score:.17g}\n")


def split_nodes(n: int, ratio: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint (train, test) index split with ceil(ratio * n) training nodes."""
    n_train = math.ceil(ratio * n)
    if n_train == 0 or n_train >= n:
        raise ConfigError(f"ratio {ratio} leaves an empty train or test set for {n} nodes")
    perm = rng.permutation(n)
    return perm[:n_train], perm[n_train:]


def node_classification_experiment(features: np.ndarray,
                                   label_sets: Sequence[frozenset[int]],
                                   num_labels: int,
                                   config: EvalConfig) -> EvalReport:
    """Repeated random-split evaluation over every configured train ratio."""
    config.validate()
    x = np.asarray(features, dtype=np.float64)
    n = len(label_sets)
    if x.shape[0] != n:
        raise ValidationError(f"{x.shape[0]} feature rows for {n} label sets")
    if any(not s for s in label_sets):
        raise ValidationError("every evaluated node needs at least one label")
    if config.normalize:
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        x = x / np.where(norms > 0, norms, 1.0)

    means, stds, all_scores = [], [], []
    for ratio_idx, ratio in enumerate(config.train_ratios):
        repeat_scores = []
        for repeat in range(config.repeats):
            rng = np.random.default_rng(
                np.random.SeedSequence([config.seed, ratio_idx, repeat]))
            train_idx, test_idx = split_nodes(n, ratio, rng)
            classifier = train_ovr_logreg(x[train_idx],
                                          [label_sets[i] for i in train_idx],
                                          num_labels, config.l2_strength)
            truth = [label_sets[i] for i in test_idx]
            preds = predict_top_k(classifier, x[test_idx], [len(t) for t in truth])
            repeat_scores.append(macro_f1(truth, preds))
        means.append(float(np.mean(repeat_scores)))
        stds.append(float(np.std(repeat_scores, ddof=1)) if len(repeat_scores) > 1 else 0.0)
        all_scores.append(repeat_scores)
    return EvalReport(ratios=tuple(config.train_ratios), means=means, stds=stds,
                      scores=all_scores)
