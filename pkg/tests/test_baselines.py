
import numpy as np
import pytest
from conftest import make_game, ring, star, unequal_channels
from hypothesis import given, settings
from hypothesis import strategies as st

from spectrum_game.baselines import (
    BaselineConfig,
    GenieGame,
    choice_probabilities,
    run_baseline,
    s_logit_step,
    sap_nc_step,
)
from spectrum_game.game import GameInstance, potential_maximizers, utility
from spectrum_game.topology import build_graph, generate_deployment, load_graph


def oracle_welfare(g, a, n, k):
    b = list(a)
    b[n] = k
    return utility(g, b, n) + sum(utility(g, b, j) for j in g.graph.neighbor_sets[n])


def softmax(x):
    w = np.exp(np.asarray(x) - np.max(x))
    return w / w.sum()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**16), st.integers(2, 4), st.floats(0, 20))
def test_choice_probabilities_match_oracle(seed, m, beta):
    g = make_game(build_graph(generate_deployment(7, (600, 600), seed), 300), m)
    gg = GenieGame(g)
    rng = np.random.default_rng(seed)
    a = tuple(int(x) for x in rng.integers(0, m, 7))
    for n in range(7):
        sap = softmax([beta * oracle_welfare(g, a, n, k) for k in range(m)])
        logit = softmax([beta * utility(g, a[:n] + (k,) + a[n + 1:], n) for k in range(m)])
        assert choice_probabilities(gg, a, n, "sap_nc", beta) == pytest.approx(sap, rel=1e-9, abs=1e-12)
        assert choice_probabilities(gg, a, n, "s_logit", beta) == pytest.approx(logit, rel=1e-9, abs=1e-12)


def test_isolated_node_welfare_is_own_utility():
    g = GameInstance(load_graph([], 1), unequal_channels((3.0, 1.0)))
    p = choice_probabilities(GenieGame(g), (0,), 0, "sap_nc", 2.0)
    assert p == pytest.approx(softmax([6.0, 2.0]))


def test_sap_nc_large_beta_picks_best():
    # from (0, 0) the revising player's best local welfare is the free channel
    gg = GenieGame(make_game(load_graph([(0, 1)], 2), m=2))
    rng = np.random.default_rng(1)
    cfg = BaselineConfig(beta=1e6)
    hits = sum(sap_nc_step(gg, (0, 0), cfg, rng) in {(1, 0), (0, 1)} for _ in range(10**4))
    assert hits / 10**4 >= 0.999


def test_sap_nc_zero_beta_uniform():
    gg = GenieGame(make_game(load_graph([], 1), m=3))
    rng = np.random.default_rng(2)
    draws = [sap_nc_step(gg, (0,), BaselineConfig(beta=0.0), rng)[0] for _ in range(30000)]
    freq = np.bincount(draws, minlength=3) / 30000
    # 4-sigma around 1/3
    assert np.all(np.abs(freq - 1 / 3) < 4 * np.sqrt(2 / 9 / 30000))


def test_s_logit_no_updates():
    gg = GenieGame(make_game(ring(5), m=3))
    rng = np.random.default_rng(3)
    a = (0, 1, 2, 0, 0)
    for _ in range(200):
        assert s_logit_step(gg, a, BaselineConfig(update_prob=0.0), rng) == a


def test_s_logit_single_player_best_response():
    g = GameInstance(load_graph([], 1), unequal_channels((1.0, 3.0)))
    rng = np.random.default_rng(4)
    cfg = BaselineConfig(beta=1e6, update_prob=1.0)
    assert all(s_logit_step(GenieGame(g), (0,), cfg, rng) == (1,) for _ in range(500))


def test_s_logit_two_nodes_time_in_maximizers():
    gg = GenieGame(make_game(load_graph([(0, 1)], 2), m=2))
    rng = np.random.default_rng(5)
    cfg = BaselineConfig(beta=10.0, update_prob=0.1)
    a, good, steps = (0, 0), 0, 20000
    for _ in range(steps):
        a = s_logit_step(gg, a, cfg, rng)
        good += a in {(0, 1), (1, 0)}
    assert good / steps > 0.9


@pytest.mark.parametrize("which,step", [("sap_nc", sap_nc_step), ("s_logit", s_logit_step)])
def test_run_baseline_matches_stepwise(which, step):
    g = make_game(build_graph(generate_deployment(9, (800, 800), 8), 300), 3)
    gg = GenieGame(g)
    cfg = BaselineConfig(iterations=300, seed=17, beta=3.0, update_prob=0.3)
    rec = run_baseline(gg, which, cfg)
    rng = np.random.default_rng(17)
    a = tuple(int(x) for x in np.minimum((rng.random(9) * 3).astype(int), 2))
    for _ in range(300):
        a = step(gg, a, cfg, rng)
        assert all(0 <= x < 3 for x in a)
    assert rec.final_profile == a


@pytest.mark.parametrize("which", ["sap_nc", "s_logit"])
def test_deterministic(which):
    gg = GenieGame(make_game(star(4), 3))
    a = run_baseline(gg, which, BaselineConfig(seed=9))
    b = run_baseline(gg, which, BaselineConfig(seed=9))
    assert a.final_profile == b.final_profile and a.extra == b.extra


@pytest.mark.parametrize("graph", [ring(5), star(4), load_graph([(0, 1), (1, 2), (2, 3), (0, 2)], 4)])
def test_sap_nc_concentrates_on_potential_maximizers(graph):
    g = make_game(graph, 2)
    best = set(potential_maximizers(g))
    finals = [run_baseline(GenieGame(g), "sap_nc", BaselineConfig(beta=50, iterations=2000, seed=s)).final_profile
              for s in range(100)]
    assert np.mean([f in best for f in finals]) >= 0.95


def test_rejects_unknown_and_bad_config():
    gg = GenieGame(make_game(ring(3), 2))
    with pytest.raises(ValueError):
        run_baseline(gg, "best_response", BaselineConfig())
    for kw in ({"beta": -1}, {"update_prob": 1.5}, {"iterations": -2}):
        with pytest.raises(ValueError):
            BaselineConfig(**kw)
