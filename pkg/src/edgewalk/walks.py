"""Random-walk corpus generation and (center, context) pair streaming.

Walks are uniform first-order random walks: each step moves to a uniformly
random neighbor of the current node. Every node starts the same number of
walks, and each walk draws from its own seeded substream keyed by
(seed, start node, walk index), so corpora are reproducible and walk
generation can be parallelized without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigError, ParseError, ValidationError
from .graph import Graph


@dataclass(frozen=True)
class WalkCorpus:
    """A fixed batch of equal-length walks, ``walks_per_node`` per start node."""

    walks: np.ndarray  # (num_walks, walk_length) int64 node indices
    walks_per_node: int
    walk_length: int
    seed: int

    @property
    def num_walks(self) -> int:
        return len(self.walks)

    def pair_capacity(self, window: int) -> int:
        """Total ordered (center, context) pairs the corpus contains."""
        return self.num_walks * _pairs_per_walk(self.walk_length, window)


def _pairs_per_walk(length: int, window: int) -> int:
    total = 0
    for i in range(length):
        total += min(i + window, length - 1) - max(i - window, 0)
    return total


def generate_walks(graph: Graph, walks_per_node: int, walk_length: int, seed: int) -> WalkCorpus:
    """Start ``walks_per_node`` uniform random walks of ``walk_length`` nodes
    from every node of ``graph``.

    Walk (v, k) is row ``v * walks_per_node + k`` of the result.
    """
    if walks_per_node < 1:
        raise ConfigError(f"walks_per_node must be >= 1, got {walks_per_node}")
    if walk_length < 2:
        raise ConfigError(f"walk_length must be >= 2, got {walk_length}")
    degrees = graph.degrees
    if graph.num_nodes == 0 or (degrees == 0).any():
        raise ValidationError("walk generation requires every node to have degree >= 1")

    indptr, indices = graph.adj_indptr, graph.adj_indices
    walks = np.empty((graph.num_nodes * walks_per_node, walk_length), dtype=np.int64)
    for start in range(graph.num_nodes):
        for k in range(walks_per_node):
            rng = np.random.default_rng(np.random.SeedSequence([seed, start, k]))
            # One float per step; floor(u * degree) picks a uniform neighbor.
            draws = rng.random(walk_length - 1)
            row = walks[start * walks_per_node + k]
            row[0] = cur = start
            for step in range(1, walk_length):
                lo = indptr[cur]
                deg = indptr[cur + 1] - lo
                cur = indices[lo + int(draws[step - 1] * deg)]
                row[step] = cur
    walks.setflags(write=False)
    return WalkCorpus(walks=walks, walks_per_node=walks_per_node, walk_length=walk_length, seed=seed)


def extract_pairs(walk, window: int) -> list[tuple[int, int]]:
    """Enumerate every (center, context) pair of a walk within ``window``.

    For each position i, all (walk[i], walk[j]) with j != i and
    |i - j| <= window, truncated at the ends of the walk.
    """
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    length = len(walk)
    pairs = []
    for i in range(length):
        for j in range(max(i - window, 0), min(i + window, length - 1) + 1):
            if j != i:
                pairs.append((int(walk[i]), int(walk[j])))
    return pairs


def sample_pair_batch(
    corpus: WalkCorpus, window: int, batch_size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``batch_size`` (center, context) pairs from the corpus.

    Walks are sampled uniformly, then a center position uniformly within
    the walk, then a context offset uniformly among the valid window
    positions. Successive calls advance ``rng``. Returns an
    (batch_size, 2) int64 array of [center, context] rows.
    """
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    if corpus.num_walks == 0:
        raise ValidationError("cannot sample pairs from an empty corpus")
    length = corpus.walk_length
    walk_idx = rng.integers(0, corpus.num_walks, size=batch_size)
    pos = rng.integers(0, length, size=batch_size)
    lo = np.maximum(pos - window, 0)
    hi = np.minimum(pos + window, length - 1)
    offset = rng.integers(0, hi - lo)  # context slots excluding the center
    ctx = lo + offset
    ctx += ctx >= pos  # skip over the center position itself
    batch = np.empty((batch_size, 2), dtype=np.int64)
    batch[:, 0] = corpus.walks[walk_idx, pos]
    batch[:, 1] = corpus.walks[walk_idx, ctx]
    return batch


def write_walks(corpus: WalkCorpus, graph: Graph, stream) -> None:
    """Dump the corpus, one walk per line of space-separated external ids."""
    stream.write(
        f"# walks_per_node={corpus.walks_per_node} "
        f"walk_length={corpus.walk_length} seed={corpus.seed}\n"
    )
    ids = graph.ids
    for row in corpus.walks:
        stream.write(" ".join(ids[v] for v in row) + "\n")


def read_walks(lines: Iterable[str], graph: Graph) -> WalkCorpus:
    """Load a walk corpus dumped by :func:`write_walks`.

    The header comment is optional; without it, walks_per_node is inferred
    and the recorded seed is -1 (unknown provenance).
    """
    walks_per_node = -1
    seed = -1
    rows: list[list[int]] = []
    header_keys = ("walks_per_node=", "walk_length=", "seed=")
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if all(key in line for key in header_keys):
                parts = dict(p.split("=", 1) for p in line[1:].split())
                walks_per_node = int(parts["walks_per_node"])
                seed = int(parts["seed"])
            continue
        try:
            rows.append([graph.index[token] for token in line.split()])
        except KeyError as exc:
            raise ValidationError(f"walk file names unknown node {exc.args[0]!r}") from None
    if not rows:
        raise ParseError("walk file holds no walks")
    length = len(rows[0])
    if any(len(r) != length for r in rows):
        raise ParseError("walk file mixes walk lengths")
    if walks_per_node < 0:
        starts = len({r[0] for r in rows})
        walks_per_node = max(1, len(rows) // max(starts, 1))
    walks = np.asarray(rows, dtype=np.int64)
    walks.setflags(write=False)
    return WalkCorpus(walks=walks, walks_per_node=walks_per_node, walk_length=length, seed=seed)
