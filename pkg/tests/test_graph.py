import io

import numpy as np
import pytest

from edgewalk.errors import ConfigError, ParseError, ValidationError
from edgewalk.graph import (
    load_edge_labels,
    load_edge_list,
    load_node_labels,
    split_labeled_edges,
    write_edge_list,
)


def test_basic_load():
    g = load_edge_list(["a b", "b c"])
    assert g.num_nodes == 3
    assert g.num_edges == 2
    b = g.index["b"]
    assert sorted(g.neighbors(b).tolist()) == [g.index["a"], g.index["c"]]


def test_reversed_duplicate_collapses():
    g = load_edge_list(["a b", "b a"])
    assert g.num_nodes == 2
    assert g.num_edges == 1


def test_duplicate_line_collapses():
    g = load_edge_list(["a b", "a b", "c a"])
    assert g.num_edges == 2


def test_self_loop_rejected():
    with pytest.raises(ValidationError):
        load_edge_list(["a a"])


def test_malformed_line_reports_number():
    with pytest.raises(ParseError, match="line 3"):
        load_edge_list(["a b", "", "a b c"])


def test_comments_and_blanks_skipped():
    g = load_edge_list(["# header", "", "a b", "   ", "# trailing"])
    assert g.num_edges == 1


def test_first_seen_interning_order():
    g = load_edge_list(["x y", "y z", "w x"])
    assert g.ids == ("x", "y", "z", "w")
    assert g.index == {"x": 0, "y": 1, "z": 2, "w": 3}


def test_adjacency_sorted_and_unique():
    lines = ["a b", "a c", "a d", "c a", "b d", "d c"]
    g = load_edge_list(lines)
    for v in range(g.num_nodes):
        nbrs = g.neighbors(v).tolist()
        assert nbrs == sorted(set(nbrs))
        assert v not in nbrs


def test_round_trip():
    lines = ["a b", "b c", "c a", "c d"]
    g = load_edge_list(lines)
    buf = io.StringIO()
    write_edge_list(g, buf)
    g2 = load_edge_list(io.StringIO(buf.getvalue()))
    assert g.ids == g2.ids
    assert np.array_equal(g.edges, g2.edges)
    assert np.array_equal(g.adj_indptr, g2.adj_indptr)
    assert np.array_equal(g.adj_indices, g2.adj_indices)


def test_degrees_and_has_edge():
    g = load_edge_list(["a b", "b c"])
    assert g.degrees.tolist() == [1, 2, 1]
    assert g.has_edge(g.index["a"], g.index["b"])
    assert g.has_edge(g.index["b"], g.index["a"])
    assert not g.has_edge(g.index["a"], g.index["c"])


# edge labels ---------------------------------------------------------------


def two_edge_graph():
    return load_edge_list(["a b", "b c"])


def test_edge_labels_basic():
    g = two_edge_graph()
    vocab, labels = load_edge_labels(["a b t1,t2"], g)
    assert len(vocab) == 2
    assert vocab.labels == ("t1", "t2")
    edge_ab = g.edge_index[(g.index["a"], g.index["b"])]
    assert labels.labeled == {edge_ab: frozenset({0, 1})}
    assert labels.unlabeled == {g.edge_index[(min(g.index["b"], g.index["c"]),
                                              max(g.index["b"], g.index["c"]))]}


def test_edge_labels_empty_stream():
    g = two_edge_graph()
    vocab, labels = load_edge_labels([], g)
    assert len(vocab) == 0
    assert labels.labeled == {}
    assert labels.unlabeled == frozenset(range(g.num_edges))


def test_edge_labels_non_edge_rejected():
    g = load_edge_list(["a b"])
    with pytest.raises(ValidationError):
        load_edge_labels(["a c t1"], g)


def test_edge_labels_unknown_node_rejected():
    g = load_edge_list(["a b"])
    with pytest.raises(ValidationError):
        load_edge_labels(["a z t1"], g)


def test_edge_labels_union_across_lines():
    g = two_edge_graph()
    _, labels = load_edge_labels(["a b t1", "b a t2", "a b t1"], g)
    (label_set,) = labels.labeled.values()
    assert label_set == frozenset({0, 1})


def test_edge_labels_empty_label_rejected():
    g = two_edge_graph()
    with pytest.raises(ValidationError):
        load_edge_labels(["a b t1,,t2"], g)


def test_edge_labels_partition_invariant():
    g = load_edge_list(["a b", "b c", "c d", "d a", "a c"])
    _, labels = load_edge_labels(["a b x", "c d y,z"], g)
    assert set(labels.labeled) | set(labels.unlabeled) == set(range(g.num_edges))
    assert set(labels.labeled) & set(labels.unlabeled) == set()
    assert len(labels.labeled) + len(labels.unlabeled) == g.num_edges


# split ----------------------------------------------------------------------


def ten_labeled_edges():
    lines = [f"a{i} b{i}" for i in range(10)]
    g = load_edge_list(lines)
    _, labels = load_edge_labels([f"a{i} b{i} t{i % 3}" for i in range(10)], g)
    return labels


def test_split_sizes():
    labels = ten_labeled_edges()
    train, val = split_labeled_edges(labels, 0.9, seed=7)
    assert len(train.labeled) == 9
    assert len(val.labeled) == 1


def test_split_full_fraction_gives_empty_validation():
    labels = ten_labeled_edges()
    train, val = split_labeled_edges(labels, 1.0, seed=7)
    assert len(train.labeled) == 10
    assert len(val.labeled) == 0


def test_split_deterministic():
    labels = ten_labeled_edges()
    a = split_labeled_edges(labels, 0.7, seed=13)
    b = split_labeled_edges(labels, 0.7, seed=13)
    assert a[0].labeled == b[0].labeled
    assert a[1].labeled == b[1].labeled


def test_split_is_partition():
    labels = ten_labeled_edges()
    train, val = split_labeled_edges(labels, 0.6, seed=3)
    assert set(train.labeled) | set(val.labeled) == set(labels.labeled)
    assert set(train.labeled) & set(val.labeled) == set()


def test_split_bad_fraction():
    labels = ten_labeled_edges()
    for frac in (0.0, -0.1, 1.5):
        with pytest.raises(ConfigError):
            split_labeled_edges(labels, frac, seed=1)


def test_split_empty_set_rejected():
    g = load_edge_list(["a b"])
    _, labels = load_edge_labels([], g)
    with pytest.raises(ValidationError):
        split_labeled_edges(labels, 0.5, seed=1)


# node labels ----------------------------------------------------------------


def test_node_labels_basic():
    g = two_edge_graph()
    label_set, skipped = load_node_labels(["a red", "b red,blue"], g.index)
    assert skipped == []
    assert label_set.vocab.labels == ("red", "blue")
    assert label_set.labels[g.index["a"]] == frozenset({0})
    assert label_set.labels[g.index["b"]] == frozenset({0, 1})


def test_node_labels_unknown_node_error_and_skip():
    g = two_edge_graph()
    with pytest.raises(ValidationError):
        load_node_labels(["zz red"], g.index)
    label_set, skipped = load_node_labels(["zz red", "a red"], g.index, on_missing="skip")
    assert skipped == ["zz"]
    assert len(label_set) == 1
