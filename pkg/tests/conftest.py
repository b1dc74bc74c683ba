import numpy as np
from hypothesis import strategies as st

from gnnbench.graph import CooGraph, coo


@st.composite
def coo_graphs(draw, max_nodes=10, max_edges=24, unit_weights=False):
    n = draw(st.integers(min_value=1, max_value=max_nodes))
    e = draw(st.integers(min_value=0, max_value=max_edges))
    src = draw(st.lists(st.integers(0, n - 1), min_size=e, max_size=e))
    dst = draw(st.lists(st.integers(0, n - 1), min_size=e, max_size=e))
    if unit_weights:
        weights = np.ones(e)
    else:
        weights = draw(st.lists(
            st.floats(min_value=-8, max_value=8, allow_nan=False,
                      allow_infinity=False),
            min_size=e, max_size=e))
    return coo(n, src, dst, np.asarray(weights, dtype=np.float64))


def symmetric_graph(g: CooGraph) -> CooGraph:
    """Mirror every edge so the weighted edge set is symmetric."""
    src = np.concatenate([g.src, g.dst])
    dst = np.concatenate([g.dst, g.src])
    weights = np.concatenate([g.weights, g.weights])
    return CooGraph(g.num_nodes, src, dst, weights)
