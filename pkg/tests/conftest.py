import numpy as np
import pytest

from graphdiag import Dataset, FeatureMatrix, LabelVector, to_undirected


def make_dataset(edges, n, labels, features=None, num_labels=None, tokens=None):
    """Small helper to assemble a Dataset from plain Python pieces."""
    labels = np.asarray(labels)
    num = num_labels if num_labels is not None else int(labels.max()) + 1
    if features is None:
        features = np.zeros((n, 2))
    return Dataset(graph=to_undirected(edges, n),
                   features=FeatureMatrix(np.asarray(features, dtype=float)),
                   labels=LabelVector(labels, num),
                   node_tokens=tuple(tokens) if tokens else ())


@pytest.fixture
def path3():
    """Path graph 0-1-2."""
    return to_undirected([(0, 1), (1, 2)], n=3)


@pytest.fixture
def triangle():
    return to_undirected([(0, 1), (0, 2), (1, 2)], n=3)


@pytest.fixture
def bridged_triangles():
    """Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3."""
    return to_undirected(
        [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)], n=6)


@pytest.fixture
def disjoint_triangles():
    return to_undirected([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)], n=6)


def random_simple_graph(rng, n=None, p=0.3):
    """Random graph guaranteed to have at least one edge."""
    if n is None:
        n = int(rng.integers(4, 12))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p]
    if not edges:
        edges = [(0, 1)]
    return to_undirected(edges, n=n)
