import numpy as np
import pytest
from hypothesis import given, settings

from ffgraph.errors import PreconditionFailed, SizeLimit
from ffgraph.generators import gen_fs, gen_fully_connected, gen_line, gen_poisson, gen_star
from ffgraph.graph import build_graph
from ffgraph.metrics import averaged_mixing_time, tau_row_diffusion, tau_row_walk
from ffgraph.oracles import (check_prop_4_2, check_prop_5_1, closed_form_line_fidelity,
                             dense_mixing_time, dense_operator, dense_power, enumerate_paths,
                             monte_carlo_mixing)

from conftest import feedforward_graphs, random_graph


def test_dense_power_examples():
    g = gen_fs(10, 2)
    assert np.array_equal(dense_power(g, "W", 0), np.eye(10))
    assert np.array_equal(dense_power(g, "D", 0), np.eye(10))
    assert np.allclose(dense_power(gen_fully_connected(2), "D", 1), [[1, 0], [0.5, 0.5]])
    assert dense_power(gen_line(3), "D", 2)[2, 0] == pytest.approx(0.25)


def test_dense_power_size_limit():
    with pytest.raises(SizeLimit):
        dense_power(gen_line(600), "A", 1)


def test_dense_operator_unknown():
    with pytest.raises(ValueError):
        dense_operator(gen_line(3), "Q")


@given(feedforward_graphs(min_n=1, max_n=20))
def test_dense_powers_are_stochastic(g):
    assert np.allclose(dense_power(g, "W", 5).sum(axis=0), 1, atol=1e-12)
    assert np.allclose(dense_power(g, "D", 5).sum(axis=1), 1, atol=1e-12)


def test_monte_carlo_star():
    mc = monte_carlo_mixing(gen_star(16), 10_000, 4, seed=0)
    expected = 15 / 32
    assert abs(mc.miss_curve[1] - expected) <= 3 * mc.stderr[1]


def test_monte_carlo_line_mean_steps():
    n = 10
    mc = monte_carlo_mixing(gen_line(n), 4000, 20 * n, seed=1)
    sem = mc.hitting_times[0].std() / np.sqrt(4000)
    assert abs(mc.mean_steps(0) - 2 * (n - 1)) < 4 * sem


def test_monte_carlo_trivial():
    mc = monte_carlo_mixing(gen_line(3), 1, 0, seed=0)
    assert mc.samples(2)[0].steps_to_sink == 0
    assert mc.samples(0)[0].steps_to_sink is None


def test_monte_carlo_matches_engine():
    rng = np.random.default_rng(4)
    for n in (16, 48):
        g = random_graph(rng, n, 0.2)
        mc = monte_carlo_mixing(g, 20_000, 6 * n, seed=n)
        miss = 1 - tau_row_walk(g, 6 * n)
        exact = miss.mean(axis=1)
        sigma = np.sqrt((miss * (1 - miss)).sum(axis=1)) / (n * np.sqrt(20_000))
        # one stray walk is 1/(n T); the normal approximation fails in the far tail
        assert np.all(np.abs(mc.miss_curve - exact) <= 5 * sigma + 2 / (n * 20_000))
        t = averaged_mixing_time(g).mixing_time
        assert abs(mc.mixing_time() - t) <= 1


def test_monte_carlo_deterministic():
    a = monte_carlo_mixing(gen_fs(20, 3), 50, 40, seed=9)
    b = monte_carlo_mixing(gen_fs(20, 3), 50, 40, seed=9)
    assert np.array_equal(a.hitting_times, b.hitting_times)


def test_enumerate_paths_examples():
    assert enumerate_paths(gen_line(3), 0, 2) == 1
    assert enumerate_paths(gen_fully_connected(3), 0, 2) == 3
    assert enumerate_paths(gen_fs(7, 2), 6, 0) == 1
    with pytest.raises(SizeLimit):
        enumerate_paths(gen_line(15), 0, 2)


@settings(max_examples=30)
@given(feedforward_graphs(min_n=1, max_n=12))
def test_enumerate_matches_dense_power(g):
    for t in range(0, 7):
        a = dense_power(g, "A", t)
        assert [enumerate_paths(g, i, t) for i in range(g.n)] == a[g.n - 1].astype(int).tolist()


def test_dense_mixing_matches_engine():
    assert [dense_mixing_time(gen_fully_connected(n)) for n in (16, 32, 64, 128, 256)] == [5, 5, 6, 7, 8]
    for n in (16, 32, 64):
        assert averaged_mixing_time(gen_fully_connected(n)).mixing_time == dense_mixing_time(gen_fully_connected(n))
    assert dense_mixing_time(gen_fully_connected(16), convention="l1") == 6


@pytest.mark.parametrize("n", [4, 8])
def test_prop_4_2_fc(n):
    res = check_prop_4_2(gen_fully_connected(n))
    assert res.holds and res.s <= res.mixing_time


def test_prop_4_2_line():
    for n in range(4, 13):
        assert check_prop_4_2(gen_line(n)).holds


def test_prop_4_2_precondition():
    # node 1 only has its self-edge and the edge to τ... make one node out-degree 1
    g = build_graph(4, [(0, 0), (0, 3), (1, 1), (2, 2), (2, 3), (3, 3), (1, 3), (0, 1)])
    g2 = build_graph(3, [(0, 0), (0, 2), (1, 2), (2, 2)])
    assert check_prop_4_2(g).holds
    with pytest.raises(PreconditionFailed):
        check_prop_4_2(g2)


def test_line_closed_form():
    lf = closed_form_line_fidelity(3)
    assert lf.paper_value == pytest.approx(0.375) and lf.exact_value == pytest.approx(0.5)
    lf = closed_form_line_fidelity(2)
    assert lf.paper_value == pytest.approx(0.5) and lf.exact_value is None
    n = 4096
    lf = closed_form_line_fidelity(n)
    assert abs(n * lf.paper_value / np.sqrt(n / np.pi) - 1) < 0.02


def test_prop_5_1_examples():
    assert check_prop_5_1(gen_fully_connected(16), 256).decays
    res = check_prop_5_1(gen_line(3), 64)
    assert res.decays and res.bound_applies and res.bound_holds
    g = build_graph(4, [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (1, 3), (2, 3)])
    with pytest.raises(PreconditionFailed):
        check_prop_5_1(g)
    with pytest.raises(PreconditionFailed):
        check_prop_5_1(gen_line(5), horizon=10)


@pytest.mark.parametrize("n", [16, 64])
def test_prop_5_1_families(n):
    for g in (gen_fully_connected(n), gen_fs(n, 24, seed=0), gen_poisson(n, 0.2, 6, seed=0)):
        assert check_prop_5_1(g, 8 * n).decays


def test_line3_trace_is_t_over_2t():
    d = tau_row_diffusion(gen_line(3), 20)[:, 1]
    t = np.arange(21)
    assert np.array_equal(d, t / 2.0 ** t)
