"""Shared fixtures-in-function-form for trainer and acceptance tests."""

import io

from edgewalk.graph import load_edge_labels, load_edge_list, load_node_labels
from edgewalk.synth import generate_planted_partition, write_dataset


def dataset_streams(dataset):
    e, el, nl = io.StringIO(), io.StringIO(), io.StringIO()
    write_dataset(dataset, e, el, nl)
    return e.getvalue(), el.getvalue(), nl.getvalue()


def load_synth(dataset):
    """Round a generated dataset through the text formats and loaders."""
    e, el, nl = dataset_streams(dataset)
    graph = load_edge_list(io.StringIO(e))
    vocab, labeled = load_edge_labels(io.StringIO(el), graph)
    node_labels, _ = load_node_labels(io.StringIO(nl), graph.index)
    return graph, vocab, labeled, node_labels


def toy_community_inputs(seed=0, communities=3, size=10, p_in=0.5, p_out=0.05,
                         label_fraction=0.8):
    dataset = generate_planted_partition(communities, size, p_in, p_out,
                                         label_fraction, seed)
    return load_synth(dataset)
