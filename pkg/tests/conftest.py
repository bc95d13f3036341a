import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ffgraph.graph import build_graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def feedforward_graphs(draw, min_n=1, max_n=16, self_edges=True, unique_sink=False):
    """Random forward edge sets; optionally all self-edges and a repaired unique sink."""
    n = draw(st.integers(min_n, max_n))
    pairs = [(a, b) for b in range(n) for a in range(b)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    edges = set(chosen)
    if self_edges:
        edges |= {(i, i) for i in range(n)}
    if unique_sink:
        has_out = {a for a, b in edges if a != b}
        edges |= {(i, i + 1) for i in range(n - 1) if i not in has_out}
    return build_graph(n, sorted(edges))


def random_graph(rng: np.random.Generator, n: int, density: float = 0.3, unique_sink=True):
    edges = {(i, i) for i in range(n)}
    for b in range(n):
        for a in range(b):
            if rng.random() < density:
                edges.add((a, b))
    if unique_sink:
        has_out = {a for a, b in edges if a != b}
        edges |= {(i, i + 1) for i in range(n - 1) if i not in has_out}
    return build_graph(n, sorted(edges))
