import numpy as np
import pytest
from conftest import make_game
from hypothesis import given, settings
from hypothesis import strategies as st

from spectrum_game.channel import preset_hiperlan2
from spectrum_game.game import is_nash
from spectrum_game.learning import (
    LearningConfig,
    detect_convergence,
    normalize_payoff,
    run_trial,
    select_channel,
    sla_update,
)
from spectrum_game.topology import build_graph, generate_deployment, load_graph


def test_normalize_payoff():
    cm = preset_hiperlan2(3)
    assert normalize_payoff(6, cm) == 1
    assert normalize_payoff(0, cm) == 0
    assert normalize_payoff(3, cm) == 0.5
    with pytest.raises(ValueError):
        normalize_payoff(6.5, cm)
    with pytest.raises(ValueError):
        normalize_payoff(-1, cm)


def test_sla_update_examples():
    q = np.full(3, 1 / 3)
    assert np.array_equal(sla_update(q, 1, 0.0, 0.25), q)
    assert sla_update(q, 0, 1.0, 0.25) == pytest.approx([0.5, 0.25, 0.25], abs=1e-15)
    for payoff in (0.0, 0.3, 1.0):
        assert sla_update(np.array([1.0, 0.0, 0.0]), 0, payoff, 0.9).tolist() == [1.0, 0.0, 0.0]


simplex = st.integers(2, 6).flatmap(lambda m: st.lists(st.floats(0, 1), min_size=m, max_size=m)).filter(
    lambda w: sum(w) > 1e-6).map(lambda w: np.array(w) / sum(w))


@settings(max_examples=300, deadline=None)
@given(simplex, st.data(), st.floats(0, 1), st.floats(1e-6, 1 - 1e-6))
def test_sla_update_properties(q, data, payoff, alpha):
    chosen = data.draw(st.integers(0, q.size - 1))
    out = sla_update(q, chosen, payoff, alpha)
    assert abs(out.sum() - 1) <= 1e-9
    assert np.all(out >= 0) and np.all(out <= 1)
    assert out[chosen] >= q[chosen]


def test_detect_convergence():
    assert detect_convergence(np.eye(3)[[0, 2, 1]]) == (True, (0, 2, 1))
    assert detect_convergence(np.full((2, 2), 0.5))[0] is False
    assert detect_convergence(np.array([[0.991, 0.009]]), 0.99) == (True, (0,))
    assert detect_convergence(np.array([[0.991, 0.009], [0.5, 0.5]]), 0.99)[0] is False


def test_select_channel_inverse_cdf():
    q = np.array([0.2, 0.5, 0.3])
    assert [select_channel(q, u) for u in (0.0, 0.19, 0.2, 0.69, 0.7, 0.999999)] == [0, 0, 1, 1, 2, 2]


@pytest.mark.parametrize("kw", [{"step_size": 0}, {"step_size": 1}, {"convergence_threshold": 0.5},
                                {"max_iterations": -1}, {"engine": "gpu"}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        LearningConfig(**kw)


def test_single_sbs_converges():
    g = make_game(load_graph([], 1), m=2)
    seen = set()
    for seed in range(40):
        rec = run_trial(g, LearningConfig(seed=seed))
        assert rec.converged
        seen.add(rec.final_profile)
    assert seen == {(0,), (1,)}


def test_single_channel_converged_at_start():
    rec = run_trial(make_game(load_graph([(0, 1)], 2), m=1), LearningConfig())
    assert rec.converged and rec.iterations == 0 and rec.final_profile == (0, 0)


def test_two_nodes_separate():
    g = make_game(load_graph([(0, 1)], 2), m=2)
    recs = [run_trial(g, LearningConfig(seed=s, snapshot_every=0)) for s in range(1000)]
    assert np.mean([r.final_profile[0] != r.final_profile[1] for r in recs]) >= 0.95


def random_game(seed, n=10):
    return make_game(build_graph(generate_deployment(n, (1000, 1000), seed), 300), m=3)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_compiled_engine_matches_reference(seed):
    g = random_game(seed)
    cfg = dict(seed=seed, full_trace=True, max_iterations=3000)
    fast = run_trial(g, LearningConfig(**cfg))
    slow = run_trial(g, LearningConfig(engine="python", **cfg))
    assert fast.same_as(slow)
    assert fast.iterations > 0


def test_engines_agree_on_budget_exhaustion():
    g = random_game(4)
    cfg = dict(seed=3, max_iterations=37, snapshot_every=5, step_size=0.01)
    fast = run_trial(g, LearningConfig(**cfg))
    slow = run_trial(g, LearningConfig(engine="python", **cfg))
    assert not fast.converged and fast.iterations == 37
    assert fast.same_as(slow)
    assert fast.snapshot_iterations.tolist() == [5, 10, 15, 20, 25, 30, 35]


def test_determinism():
    g = random_game(5, n=15)
    a = run_trial(g, LearningConfig(seed=11))
    b = run_trial(g, LearningConfig(seed=11))
    assert a.same_as(b)
    assert not a.same_as(run_trial(g, LearningConfig(seed=12)))


def test_record_contents():
    g = random_game(6)
    rec = run_trial(g, LearningConfig(seed=1, max_iterations=20000))
    assert rec.converged
    assert detect_convergence(rec.final_strategies, 0.99) == (True, rec.final_profile)
    assert rec.realized_total.shape == (rec.iterations,)
    assert np.all(rec.realized_total >= 0) and np.all(rec.realized_total <= 6 * g.n_players)
    assert rec.snapshots.shape[1:] == (10, 3)
    assert np.allclose(rec.snapshots.sum(axis=2), 1, atol=1e-9)
    assert rec.realized_rates is None


def test_per_sbs_step_sizes():
    g = make_game(load_graph([(0, 1)], 2), m=2)
    rec = run_trial(g, LearningConfig(step_size=(0.2, 0.3), seed=2))
    assert rec.converged
    with pytest.raises(ValueError):
        run_trial(g, LearningConfig(step_size=(0.2, 0.3, 0.4)))


def test_converged_profiles_mostly_nash_small_step():
    g = random_game(7, n=8)
    recs = [run_trial(g, LearningConfig(step_size=0.05, seed=s, snapshot_every=0)) for s in range(200)]
    conv = [r for r in recs if r.converged]
    assert len(conv) >= 150
    assert np.mean([is_nash(g, r.final_profile)[0] for r in conv]) >= 0.95
