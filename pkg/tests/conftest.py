import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_graph(n, rng, edge_prob=0.6, lo=0.0, hi=2.0 * np.pi):
    """Random interaction graph with uniform phases."""
    from spingas import InteractionGraph
    g = InteractionGraph(n)
    for k in range(n):
        for l in range(k + 1, n):
            if rng.random() < edge_prob:
                g.add_phase(k, l, float(rng.uniform(lo, hi)))
    return g
