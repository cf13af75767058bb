import numpy as np
import pytest

from core.exceptions import DomainError, ReplayNotReadyError
from models.agent import RlConfig
from services.adam_optimizer import AdamState
from services.dqn_service import DqnLearner, epsilon_greedy, greedy_action, td_target, train_step
from services.q_network import Mlp, mlp_forward
from services.replay_memory import ReplayMemory, Transition


def test_td_target():
    assert td_target(1.0, 2.0, 0.95) == pytest.approx(2.9)
    assert td_target(0.7, 123.0, 0.0) == 0.7
    assert td_target(-1.0, 0.0, 0.95) == -1.0
    np.testing.assert_allclose(td_target(np.array([1.0, 0.0]), np.array([2.0, 1.0]), 0.5), [2.0, 0.5])
    with pytest.raises(DomainError):
        td_target(1.0, 1.0, 1.5)


def test_greedy_selection(rng):
    q = np.array([0.1, 0.9, 0.3])
    assert all(epsilon_greedy(q, 0.0, rng) == 1 for _ in range(100))
    assert greedy_action(np.array([0.5, 0.5])) == 0
    assert epsilon_greedy(np.array([0.5, 0.5]), 0.0, rng) == 0


def test_greedy_choice_ignores_constant_shift(rng):
    for _ in range(50):
        q = rng.normal(size=6)
        assert greedy_action(q) == greedy_action(q + rng.normal() * 10)


def test_full_exploration_is_uniform(rng):
    q = np.array([3.0, 1.0, 0.0, -2.0])
    draws = 100_000
    counts = np.bincount([epsilon_greedy(q, 1.0, rng) for _ in range(draws)], minlength=4)
    np.testing.assert_allclose(counts / draws, 0.25, atol=0.01)


def test_epsilon_must_be_a_probability(rng):
    with pytest.raises(DomainError):
        epsilon_greedy(np.array([1.0]), 1.5, rng)
    with pytest.raises(DomainError):
        greedy_action(np.array([]))


def _zero_output_net(rng):
    net = Mlp.initialize([3, 5, 2], rng)
    net.weights[-1][...] = 0.0
    net.biases[-1][...] = 0.0
    return net


def test_train_step_fixed_point(rng):
    net = _zero_output_net(rng)
    before = [p.copy() for p in net.parameters()]
    opt = AdamState.for_parameters(net.parameters())
    mem = ReplayMemory(10)
    state = np.array([0.2, 0.4, 0.6])
    for _ in range(5):
        mem.push(Transition(state, 1, 0.0, state))

    loss = train_step(net, opt, mem, 4, 0.0, rng)
    assert loss == 0.0
    for p, b in zip(net.parameters(), before):
        np.testing.assert_allclose(p, b, atol=1e-12)


def _single_transition_losses(seed: int, steps: int):
    net = Mlp([3, 2], [np.array([[0.1, -0.2], [0.3, 0.1], [-0.1, 0.2]])], [np.array([0.0, 0.1])])
    opt = AdamState.for_parameters(net.parameters(), lr=0.001)
    mem = ReplayMemory(1)
    state = np.array([0.5, 0.25, 1.0])
    mem.push(Transition(state, 0, 10.0, state))
    rng = np.random.default_rng(seed)
    return [train_step(net, opt, mem, 1, 0.0, rng) for _ in range(steps)]


def test_loss_decreases_on_a_fixed_transition():
    losses = _single_transition_losses(0, 100)
    tail = losses[10:]
    assert all(later <= earlier for earlier, later in zip(tail, tail[1:]))
    assert losses[-1] < losses[0]


def test_train_step_is_deterministic():
    assert _single_transition_losses(4, 20) == _single_transition_losses(4, 20)


@pytest.mark.slow
def test_parameters_stay_finite_over_long_training(rng):
    net = Mlp.initialize([4, 16, 16, 4], rng)
    opt = AdamState.for_parameters(net.parameters())
    mem = ReplayMemory(500)
    for _ in range(500):
        mem.push(Transition(rng.uniform(0, 1, 4), int(rng.integers(4)), float(rng.uniform(-64.0, 64.0)), rng.uniform(0, 1, 4)))
    for _ in range(100_000):
        loss = train_step(net, opt, mem, 32, 0.95, rng)
        assert np.isfinite(loss)
    assert net.all_finite()
    assert np.all(np.isfinite(mlp_forward(net, rng.uniform(0, 1, (10, 4)))))


def test_train_step_needs_a_warm_memory(rng):
    net = Mlp.initialize([3, 2], rng)
    opt = AdamState.for_parameters(net.parameters())
    mem = ReplayMemory(10)
    mem.push(Transition(np.zeros(3), 0, 1.0, np.zeros(3)))
    with pytest.raises(ReplayNotReadyError):
        train_step(net, opt, mem, 2, 0.9, rng)
    assert opt.step_count == 0


def test_learner_skips_until_warm_and_counts_steps(rng):
    learner = DqnLearner.build(3, 2, RlConfig(hidden_layers=[4], batch_size=2, replay_capacity=10), seed=1)
    learner.remember(Transition(np.zeros(3), 0, 1.0, np.zeros(3)))
    assert learner.learn(rng) is None
    learner.remember(Transition(np.ones(3), 1, -1.0, np.ones(3)))
    assert learner.learn(rng) is not None
    assert learner.learn_steps == 1
    assert learner.act(np.zeros(3), 0.0, rng) == greedy_action(mlp_forward(learner.net, np.zeros(3)))


def test_target_network_syncs_on_interval(rng):
    rl = RlConfig(hidden_layers=[4], batch_size=1, replay_capacity=10, target_sync_interval=2)
    learner = DqnLearner.build(3, 2, rl, seed=2)
    learner.remember(Transition(np.full(3, 0.5), 0, 5.0, np.full(3, 0.5)))

    learner.learn(rng)
    assert any(
        not np.array_equal(target, online)
        for target, online in zip(learner.target_net.parameters(), learner.net.parameters())
    )
    learner.learn(rng)
    for target, online in zip(learner.target_net.parameters(), learner.net.parameters()):
        np.testing.assert_array_equal(target, online)


def test_no_target_network_by_default():
    assert DqnLearner.build(3, 2, RlConfig(hidden_layers=[4]), seed=0).target_net is None
