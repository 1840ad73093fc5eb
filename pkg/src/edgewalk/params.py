"""Trainable parameters: embedding tables, lazy sparse Adam, checkpoints.

The optimizer is plain Adam (beta1=0.9, beta2=0.999, eps=1e-8) applied
lazily: embedding rows that a batch did not touch keep their first/second
moment accumulators undecayed. On a fully dense gradient this reduces to
ordinary dense Adam. One ``step`` call increments the shared step counter
once, whatever mix of blocks the gradient covers.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericsError, ParseError


@dataclass
class EmbeddingTables:
    """Center and context embedding matrices, one row per node."""

    center: np.ndarray
    context: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.center.shape[0]

    @property
    def dim(self) -> int:
        return self.center.shape[1]

    def copy(self) -> "EmbeddingTables":
        return EmbeddingTables(self.center.copy(), self.context.copy())


def init_embeddings(node_count: int, dim: int, seed: int, dtype=np.float64) -> EmbeddingTables:
    """Center rows uniform in [-0.5/dim, 0.5/dim], context rows zero."""
    if dim < 1:
        raise ConfigError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    bound = 0.5 / dim
    center = rng.uniform(-bound, bound, size=(node_count, dim)).astype(dtype)
    context = np.zeros((node_count, dim), dtype=dtype)
    return EmbeddingTables(center=center, context=context)


@dataclass
class SparseGrad:
    """Gradients of one batch: touched embedding rows plus dense MLP grads.

    Row index arrays are unique within one instance. Any group may be
    absent (None) when the batch did not touch it.
    """

    center_rows: np.ndarray | None = None
    center_grads: np.ndarray | None = None
    context_rows: np.ndarray | None = None
    context_grads: np.ndarray | None = None
    mlp_weight_grads: list[np.ndarray] | None = None
    mlp_bias_grads: list[np.ndarray] | None = None


def accumulate_rows(rows: np.ndarray, grads: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum duplicate row contributions; returns (unique_rows, summed_grads)."""
    unique, inverse = np.unique(rows, return_inverse=True)
    acc = np.zeros((len(unique), grads.shape[1]), dtype=grads.dtype)
    np.add.at(acc, inverse, grads)
    return unique, acc


class AdamOptimizer:
    """Lazy sparse Adam over the embedding tables and optional MLP params."""

    def __init__(self, tables: EmbeddingTables, mlp=None, lr: float = 0.01,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.tables = tables
        self.mlp = mlp
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m_center = np.zeros_like(tables.center)
        self._v_center = np.zeros_like(tables.center)
        self._m_context = np.zeros_like(tables.context)
        self._v_context = np.zeros_like(tables.context)
        if mlp is not None:
            self._m_mlp = [np.zeros_like(a) for a in mlp.weights + mlp.biases]
            self._v_mlp = [np.zeros_like(a) for a in mlp.weights + mlp.biases]

    def _update_rows(self, param, m, v, rows, grads, bc1, bc2, block):
        if not np.isfinite(grads).all():
            raise NumericsError(f"non-finite gradient in parameter block {block!r}")
        m[rows] = self.beta1 * m[rows] + (1.0 - self.beta1) * grads
        v[rows] = self.beta2 * v[rows] + (1.0 - self.beta2) * grads * grads
        m_hat = m[rows] / bc1
        v_hat = v[rows] / bc2
        param[rows] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def _update_dense(self, param, m, v, grad, bc1, bc2, block):
        if not np.isfinite(grad).all():
            raise NumericsError(f"non-finite gradient in parameter block {block!r}")
        m += (1.0 - self.beta1) * (grad - m)
        v += (1.0 - self.beta2) * (grad * grad - v)
        param -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def step(self, grad: SparseGrad) -> None:
        """Apply one Adam update; the step counter advances exactly once."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        if grad.center_rows is not None:
            self._update_rows(self.tables.center, self._m_center, self._v_center,
                              grad.center_rows, grad.center_grads, bc1, bc2, "center")
        if grad.context_rows is not None:
            self._update_rows(self.tables.context, self._m_context, self._v_context,
                              grad.context_rows, grad.context_grads, bc1, bc2, "context")
        if grad.mlp_weight_grads is not None:
            if self.mlp is None:
                raise ConfigError("MLP gradients supplied but optimizer holds no MLP")
            dense = grad.mlp_weight_grads + grad.mlp_bias_grads
            params = self.mlp.weights + self.mlp.biases
            names = [f"mlp.weights[{i}]" for i in range(len(self.mlp.weights))] + \
                    [f"mlp.biases[{i}]" for i in range(len(self.mlp.biases))]
            for p, m, v, g, name in zip(params, self._m_mlp, self._v_mlp, dense, names):
                self._update_dense(p, m, v, g, bc1, bc2, name)

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {"adam_m_center": self._m_center, "adam_v_center": self._v_center,
               "adam_m_context": self._m_context, "adam_v_context": self._v_context}
        if self.mlp is not None:
            for i, (m, v) in enumerate(zip(self._m_mlp, self._v_mlp)):
                out[f"adam_m_mlp{i}"] = m
                out[f"adam_v_mlp{i}"] = v
        return out


# ---------------------------------------------------------------------------
# Checkpoint file format (binary, versioned):
#   bytes 0..7   magic b"EWCHKPT1"
#   bytes 8..11  uint32 little-endian: byte length of the JSON header
#   JSON header  {"config": {...}, "config_hash": "...", "ids": [...],
#                 "adam_t": int, "arrays": [{"name", "shape", "dtype"}, ...]}
#   raw array data, C order, in the header's "arrays" order
# The zip-free layout keeps byte output identical across reruns.
# ---------------------------------------------------------------------------

CHECKPOINT_MAGIC = b"EWCHKPT1"


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class Checkpoint:
    """Deserialized checkpoint contents; object graphs are rebuilt by callers."""

    center: np.ndarray
    context: np.ndarray
    mlp_weights: list[np.ndarray]
    mlp_biases: list[np.ndarray]
    adam: dict[str, np.ndarray]
    adam_t: int
    config: dict
    ids: list[str] = field(default_factory=list)


def save_checkpoint(path, tables: EmbeddingTables, mlp, optimizer: AdamOptimizer,
                    config_dict: dict, ids) -> None:
    arrays: list[tuple[str, np.ndarray]] = [("center", tables.center), ("context", tables.context)]
    if mlp is not None:
        for i, w in enumerate(mlp.weights):
            arrays.append((f"mlp_w{i}", w))
        for i, b in enumerate(mlp.biases):
            arrays.append((f"mlp_b{i}", b))
    for name, arr in optimizer.state_arrays().items():
        arrays.append((name, arr))

    header = {
        "config": config_dict,
        "config_hash": config_hash(config_dict),
        "ids": list(ids),
        "adam_t": optimizer.t,
        "arrays": [{"name": n, "shape": list(a.shape), "dtype": str(a.dtype)} for n, a in arrays],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr).tobytes())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CHECKPOINT_MAGIC:
            raise ParseError(f"{path}: not an edgewalk checkpoint (bad magic {magic!r})")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len))
        loaded: dict[str, np.ndarray] = {}
        for meta in header["arrays"]:
            shape = tuple(meta["shape"])
            dtype = np.dtype(meta["dtype"])
            count = int(np.prod(shape)) if shape else 1
            data = fh.read(count * dtype.itemsize)
            loaded[meta["name"]] = np.frombuffer(data, dtype=dtype).reshape(shape).copy()

    weights = [loaded[k] for k in sorted(loaded) if k.startswith("mlp_w")]
    biases = [loaded[k] for k in sorted(loaded) if k.startswith("mlp_b")]
    adam = {k: v for k, v in loaded.items() if k.startswith("adam_")}
    return Checkpoint(
        center=loaded["center"],
        context=loaded["context"],
        mlp_weights=weights,
        mlp_biases=biases,
        adam=adam,
        adam_t=header["adam_t"],
        config=header["config"],
        ids=header["ids"],
    )
