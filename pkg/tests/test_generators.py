import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ffgraph.errors import InvalidDegree, ParseError
from ffgraph.generators import (GeneratorConfig, block_sizes, bipartite_matching, ceil_log2,
                                default_indegree, fs_top_level_blocks, gen_erdos_renyi,
                                gen_fs, gen_fully_connected, gen_line, gen_locally_connected,
                                gen_oriented_expander, gen_poisson, gen_star, generate)
from ffgraph.graph import serialize, validate
from ffgraph.rng import RngStream


def test_fully_connected_small():
    assert gen_fully_connected(1).edge_set() == {(0, 0)}
    assert gen_fully_connected(3).edge_set() == {(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)}
    assert gen_fully_connected(5).in_degrees().tolist() == [1, 2, 3, 4, 5]
    assert gen_fully_connected(7).num_edges == 28


def test_locally_connected():
    assert gen_locally_connected(3, 1) == gen_line(3)
    assert gen_locally_connected(4, 0).edge_set() == {(i, i) for i in range(4)}
    assert gen_locally_connected(10, 2).in_neighbors(5).tolist() == [3, 4, 5]
    for n in (1, 2):
        assert gen_locally_connected(n, 1) == gen_fully_connected(n)


def test_star():
    assert gen_star(1).edge_set() == {(0, 0)}
    assert gen_star(4).edge_set() == {(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (1, 3), (2, 3)}
    assert validate(gen_star(4)).sinks == [3]


def test_erdos_renyi_extremes():
    assert gen_erdos_renyi(12, 20, seed=3) == gen_fully_connected(12)
    g = gen_erdos_renyi(8, 1, seed=3)
    assert g.edge_set() == {(i, i) for i in range(8)}
    assert validate(g).sinks == list(range(8))


def test_erdos_renyi_extra_sinks_are_likely():
    n = 1024
    budget = ceil_log2(n)
    unique = [validate(gen_erdos_renyi(n, budget, seed=s)).unique_sink for s in range(20)]
    assert not any(unique)


@pytest.mark.parametrize("seed", range(5))
def test_erdos_renyi_budget(seed):
    g = gen_erdos_renyi(100, 7, seed=seed)
    assert g.in_degrees().tolist() == [min(7, i + 1) for i in range(100)]


def test_oriented_expander_degree_errors():
    with pytest.raises(InvalidDegree):
        gen_oriented_expander(8, 0, seed=0)


def test_oriented_expander_two_nodes():
    assert gen_oriented_expander(2, 1, seed=5).edge_set() == {(0, 0), (0, 1), (1, 1)}


def test_oriented_expander_mean_indegree():
    n, d = 512, 8
    means = []
    for s in range(20):
        g = gen_oriented_expander(n, d, seed=s)
        means.append((g.num_edges - n) / n)
    # duplicate matching pairs are merged, so slightly under d/2
    assert 3.9 < np.mean(means) <= 4.0


def test_oriented_expander_odd_n():
    g = gen_oriented_expander(9, 3, seed=1)
    assert validate(g).has_all_self_edges
    assert all(a <= b for a, b in g.edges())


def test_poisson_p0_is_local():
    g = gen_poisson(4, 0.0, 2, seed=0)
    assert g == gen_line(4)


def test_poisson_p1_self_only():
    g = gen_poisson(10, 1.0, 5, seed=2)
    assert g.edge_set() == {(i, i) for i in range(10)}


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_poisson_budget_respected(p):
    g = gen_poisson(256, p, 8, seed=11)
    assert g.in_degrees().max() <= 8


def test_poisson_gap_statistics():
    n, p = 1024, 0.2
    budget = ceil_log2(n)
    gaps = []
    for s in range(20):
        g = gen_poisson(n, p, budget, seed=s)
        for i in range(budget + 20, n):
            nb = g.in_neighbors(i)[::-1]  # i, then descending
            gaps.extend(np.diff(-nb).tolist())
    # the first gap (from the self-edge) is 1 + Geom, the same law as the rest
    assert abs(np.mean(gaps) - 1 / (1 - p)) < 0.02


def test_fs_base_case_is_fully_connected():
    for n in range(1, 5):
        assert gen_fs(n, 3, seed=0) == gen_fully_connected(n)


def test_fs_sixteen():
    g = gen_fs(16, 16, seed=0)
    assert fs_top_level_blocks(16) == [(0, 4), (4, 4), (8, 4), (12, 4)]
    block = np.arange(16) // 4
    for a, b in g.edges():
        assert block[b] - block[a] in (0, 1)
    for s in range(0, 16, 4):
        for a in range(s, s + 4):
            for b in range(a, s + 4):
                assert g.has_edge(a, b)
    assert validate(g).unique_sink


def test_fs_indegree_is_logarithmic():
    n = 1024
    d = default_indegree(n, ("k_logn", 4))
    assert d == 40
    for s in range(5):
        assert gen_fs(n, d, seed=s).in_degrees().max() <= 2 * d


@given(st.integers(2, 300), st.integers(1, 12), st.integers(0, 2 ** 32))
def test_fs_always_unique_sink(n, d, seed):
    g = gen_fs(n, d, seed=seed)
    rep = validate(g)
    assert rep.unique_sink and rep.has_all_self_edges


@pytest.mark.parametrize("n", [2, 3, 17, 100, 1000, 1024])
def test_fs_block_count(n):
    blocks = fs_top_level_blocks(n)
    assert len(blocks) == ceil_log2(n) or (n == 2 and len(blocks) == 1)
    sizes = [s for _, s in blocks]
    assert sum(sizes) == n and max(sizes) - min(sizes) <= 1


def test_block_sizes():
    assert block_sizes(10, 3) == [4, 3, 3]


@given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 1000))
def test_bipartite_matching_covers_both_sides(a, b, seed):
    gen = RngStream(seed).generator()
    src, dst = bipartite_matching(gen, 0, a, a, b)
    assert set(src.tolist()) == set(range(a))
    assert set(dst.tolist()) == set(range(a, a + b))
    assert len(src) == max(a, b)


def test_default_indegree():
    assert default_indegree(256, "k_logn(4)") == 32
    assert default_indegree(1024, "sqrt_n") == 32
    assert default_indegree(1000, "sqrt_n") == math.ceil(math.sqrt(1000))
    assert default_indegree(77, "constant:3") == 3
    assert default_indegree(1024, ("k_logn", 1)) == 10


FAMILY_CONFIGS = [
    {"family": "fully_connected", "n": 40},
    {"family": "locally_connected", "n": 40, "kappa": 3},
    {"family": "line", "n": 40},
    {"family": "star", "n": 40},
    {"family": "erdos_renyi", "n": 40, "budget": 5},
    {"family": "oriented_expander", "n": 40, "expander_degree": 4},
    {"family": "poisson", "n": 40, "p": 0.2, "budget": 5},
    {"family": "fs", "n": 40},
]


@pytest.mark.parametrize("data", FAMILY_CONFIGS, ids=lambda d: d["family"])
def test_generate_is_deterministic(data):
    cfg = GeneratorConfig.from_dict({**data, "seed": 123})
    assert serialize(generate(cfg)) == serialize(generate(cfg))


@pytest.mark.parametrize("data", FAMILY_CONFIGS, ids=lambda d: d["family"])
def test_generate_frozen_edge_counts(data):
    g = generate(GeneratorConfig.from_dict({**data, "seed": 7}))
    assert g.n == 40
    assert all(a <= b for a, b in g.edges())


def test_seeds_change_random_families():
    a = generate(GeneratorConfig("fs", 64, seed=1))
    b = generate(GeneratorConfig("fs", 64, seed=2))
    assert a != b


def test_no_self_edges_mode():
    g = generate(GeneratorConfig("line", 5, self_edges=False))
    assert g.edge_set() == {(i, i + 1) for i in range(4)}
    assert not validate(g).has_all_self_edges


@pytest.mark.parametrize("data, key", [
    ({"family": "warp"}, "family"),
    ({"family": "line"}, "n"),
    ({"family": "line", "n": 4, "colour": 1}, "colour"),
    ({"family": "poisson", "n": 4, "p": 1.5}, "p"),
    ({"family": "fs", "n": 4, "fs_decay_ratio": 1.0}, "fs_decay_ratio"),
])
def test_config_errors(data, key):
    with pytest.raises(ParseError) as info:
        GeneratorConfig.from_dict(data)
    assert info.value.key == key


def test_poisson_requires_p():
    with pytest.raises(ParseError):
        generate(GeneratorConfig("poisson", 8))


def test_config_round_trip():
    cfg = GeneratorConfig("poisson", 64, p=0.2, budget=6, seed=9)
    assert GeneratorConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("family", ["fully_connected", "locally_connected", "line", "star", "fs"])
@pytest.mark.parametrize("n", [1, 2, 17, 128])
def test_unique_sink_families(family, n):
    rep = validate(generate(GeneratorConfig(family, n, seed=n)))
    assert rep.unique_sink and rep.has_all_self_edges


def test_oriented_expander_may_have_extra_sinks():
    # a local label maximum among its matched neighbours has no forward edge
    reps = [validate(gen_oriented_expander(256, 4, seed=s)) for s in range(5)]
    assert any(not r.unique_sink for r in reps)
