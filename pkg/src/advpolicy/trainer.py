"""Double-DQN training on the grid MDP, optionally with PGD-perturbed states.

All randomness (initialization, exploration, replay sampling) comes from one
``numpy.random.Generator`` seeded from ``TrainConfig.seed``, in that order.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import env as grid
from .nn import argmax_action, backward_batch, forward, forward_batch, init_network
from .perturb import TRAIN_EPSILON, AttackConfig, pgd

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    total_steps: int = 50_000
    replay_capacity: int = 10_000
    batch_size: int = 32
    learning_rate: float = 0.01
    target_sync_interval: int = 500
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    epsilon_horizon: int = 30_000
    learning_starts: int = 500
    update_interval: int = 4
    hidden: tuple = (64,)
    adversarial: bool = False
    attack_config: AttackConfig = field(
        default_factory=lambda: AttackConfig(epsilon=TRAIN_EPSILON, alpha=TRAIN_EPSILON / 4, steps=10)
    )
    seed: int = 0

    def __post_init__(self):
        if self.total_steps < 0:
            raise ValueError("total_steps must be non-negative")
        if min(self.replay_capacity, self.batch_size, self.target_sync_interval, self.epsilon_horizon,
               self.update_interval) < 1:
            raise ValueError("capacity, batch size, intervals and horizon must be positive")
        if self.batch_size > self.replay_capacity:
            raise ValueError("batch_size exceeds replay_capacity")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        for e in (self.epsilon_start, self.epsilon_end):
            if not 0.0 <= e <= 1.0:
                raise ValueError(f"exploration epsilon {e} outside [0, 1]")

    def exploration(self, t):
        frac = min(t / self.epsilon_horizon, 1.0)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest transition is overwritten first."""

    def __init__(self, capacity, obs_size):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_size))
        self.next_obs = np.zeros((capacity, obs_size))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity, dtype=bool)
        self.size = 0
        self._next = 0

    def __len__(self):
        return self.size

    def add(self, obs, action, reward, next_obs, done):
        k = self._next
        self.obs[k] = obs.ravel()
        self.actions[k] = action
        self.rewards[k] = reward
        self.next_obs[k] = next_obs.ravel()
        self.dones[k] = done
        self._next = (k + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng, batch_size):
        idx = rng.integers(0, self.size, size=batch_size)
        return self.obs[idx], self.actions[idx], self.rewards[idx], self.next_obs[idx], self.dones[idx]


def double_dqn_targets(online, target, rewards, next_obs, dones, gamma):
    """y = r + gamma * Q_target(s', argmax_a Q_online(s', a)); y = r on terminal s'."""
    q_online, _ = forward_batch(online, next_obs)
    q_target, _ = forward_batch(target, next_obs)
    best = np.argmax(q_online, axis=1)
    bootstrap = q_target[np.arange(len(best)), best]
    return rewards + np.where(dones, 0.0, gamma * bootstrap)


def sgd_step(net, obs, actions, targets, learning_rate):
    """One SGD step on mean((Q(s, a) - y)^2) over the batch; updates ``net`` in place.

    Returns the loss before the update.
    """
    q, cache = forward_batch(net, obs)
    rows = np.arange(len(actions))
    err = q[rows, actions] - targets
    grad_out = np.zeros_like(q)
    grad_out[rows, actions] = 2.0 * err / len(actions)
    _, grads = backward_batch(net, cache, grad_out)
    for layer, (dw, db) in zip(net.layers, grads):
        layer.weights -= learning_rate * dw
        layer.bias -= learning_rate * db
    return float(np.mean(err * err))


def _sync(target, online):
    for t, o in zip(target.layers, online.layers):
        t.weights[...] = o.weights
        t.bias[...] = o.bias


@dataclass
class EpisodeRecord:
    episode_index: int
    episode_return: float
    steps: int
    epsilon: float


def train(spec, config, progress=None):
    """Train a Q-network on ``spec``; returns (network, list of EpisodeRecord)."""
    rng = np.random.default_rng(config.seed)
    h, w = spec.observation_shape
    net = init_network(h, w, config.hidden, spec.action_count, rng)
    records = []
    if config.total_steps == 0:
        return net, records
    target = net.copy()
    replay = ReplayBuffer(config.replay_capacity, h * w)

    def observe(obs):
        if config.adversarial:
            return pgd(net, obs, config.attack_config).s_adv
        return obs

    state, obs = grid.reset(spec)
    obs = observe(obs)
    ep_return, ep_steps = 0.0, 0
    for t in range(config.total_steps):
        eps = config.exploration(t)
        if rng.random() < eps:
            action = int(rng.integers(spec.action_count))
        else:
            action = argmax_action(forward(net, obs))
        state, next_obs, reward, done = grid.step(spec, state, action)
        next_obs = observe(next_obs)
        replay.add(obs, action, reward, next_obs, done)
        ep_return += reward
        ep_steps += 1
        obs = next_obs

        if (t + 1) % config.update_interval == 0 and len(replay) >= max(config.learning_starts, config.batch_size):
            b_obs, b_act, b_rew, b_next, b_done = replay.sample(rng, config.batch_size)
            y = double_dqn_targets(net, target, b_rew, b_next, b_done, spec.gamma)
            sgd_step(net, b_obs, b_act, y, config.learning_rate)
        if (t + 1) % config.target_sync_interval == 0:
            _sync(target, net)

        if done:
            records.append(EpisodeRecord(len(records), ep_return, ep_steps, eps))
            if progress is not None:
                progress(records[-1])
            state, obs = grid.reset(spec)
            obs = observe(obs)
            ep_return, ep_steps = 0.0, 0
    log.info("trained %d steps, %d episodes", config.total_steps, len(records))
    return net, records


@dataclass
class EvalReport:
    episode_returns: list

    @property
    def episodes(self):
        return len(self.episode_returns)

    @property
    def mean_return(self):
        return float(np.mean(self.episode_returns))


def evaluate(net, spec, episodes=10, attack=None):
    """Undiscounted returns of the greedy policy, optionally under PGD on every observation."""
    if episodes < 1:
        raise ValueError("episodes must be positive")
    returns = []
    for _ in range(episodes):
        state, obs = grid.reset(spec)
        total = 0.0
        while not state.terminal:
            if attack is not None:
                obs = pgd(net, obs, attack).s_adv
            state, obs, reward, _ = grid.step(spec, state, argmax_action(forward(net, obs)))
            total += reward
        returns.append(total)
    return EvalReport(returns)


def greedy_rollout_states(net, spec, max_states, start=None):
    """Distinct observations visited by the greedy policy from reset, in visit order.

    Stops at max_states, at episode end, or when the deterministic rollout
    revisits a cell (it would loop forever).
    """
    if max_states < 1:
        raise ValueError("max_states must be positive")
    if start is not None:
        spec = grid.GridSpec.from_dict({**spec.to_dict(), "start": list(start)})
    state, obs = grid.reset(spec)
    seen = {state.agent_cell}
    states = [obs]
    while len(states) < max_states and not state.terminal:
        state, obs, _, _ = grid.step(spec, state, argmax_action(forward(net, obs)))
        if state.agent_cell in seen:
            break
        seen.add(state.agent_cell)
        states.append(obs)
    return states


def analysis_states(net, spec, count):
    """``count`` distinct observations for attack and map aggregation.

    The greedy rollout from the configured start comes first; if it is shorter
    than ``count``, greedy rollouts from the remaining free cells (row-major)
    are appended, skipping frames already collected.
    """
    states = greedy_rollout_states(net, spec, count)
    seen = {s.tobytes() for s in states}
    starts = [c for c in grid.free_cells(spec) if c not in (spec.start, spec.goal) and c not in spec.distractor_cells]
    for cell in starts:
        if len(states) >= count:
            break
        for s in greedy_rollout_states(net, spec, count, start=cell):
            key = s.tobytes()
            if key not in seen and len(states) < count:
                seen.add(key)
                states.append(s)
    return states
