"""Double-DQN learner: epsilon-greedy exploration, replay memory, training loop.

The trainer drives any environment exposing ``reset() -> obs``,
``step(action_index) -> (reward, executed_index, next_obs)`` plus ``n_actions``
and ``obs_dim``; the maintenance environment reports the *executed* action so
replayed experience always matches the realized dynamics (a corrective
replacement forced at the failure threshold is stored as a replacement).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .environment import Action, SystemState
from .network import (AdamState, Mlp, _forward_batch, adam_step,
                      batch_backward_mse, clone_mlp, forward, init_adam,
                      init_mlp, soft_update)
from .rng import RngStream

__all__ = [
    "Transition",
    "ReplayBuffer",
    "ExplorationSchedule",
    "AgentConfig",
    "EpisodeLog",
    "select_action",
    "ddqn_target",
    "train",
    "greedy_policy",
    "write_training_log",
]

# Substream ids carved out of the master seed, one per source of randomness.
INIT_STREAM = 0
ENV_STREAM = 1
EXPLORE_STREAM = 2
REPLAY_STREAM = 3


@dataclass(frozen=True, slots=True)
class Transition:
    """One replay record; ``action`` is the executed action index."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform minibatch sampling."""

    def __init__(self, capacity: int, obs_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._s = np.empty((capacity, obs_dim))
        self._a = np.empty(capacity, dtype=np.int64)
        self._r = np.empty(capacity)
        self._s2 = np.empty((capacity, obs_dim))
        self._size = 0
        self._pos = 0

    def __len__(self) -> int:
        return self._size

    def push(self, state, action: int, reward: float, next_state) -> None:
        p = self._pos
        self._s[p] = state
        self._a[p] = action
        self._r[p] = reward
        self._s2[p] = next_state
        self._pos = (p + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def push_transition(self, t: Transition) -> None:
        self.push(t.state, t.action, t.reward, t.next_state)

    def sample(self, batch_size: int, rng: RngStream):
        """Uniform sample without replacement within the batch."""
        if batch_size > self._size:
            raise ValueError("not enough stored transitions to sample")
        idx = rng.gen.choice(self._size, size=batch_size, replace=False, shuffle=False)
        return self._s[idx], self._a[idx], self._r[idx], self._s2[idx]


@dataclass
class ExplorationSchedule:
    """Multiplicative epsilon decay with a floor, applied once per environment step."""

    eps_max: float = 1.0
    eps_min: float = 0.01
    decay: float = 0.005
    epsilon: float = field(default=None)

    def __post_init__(self):
        if not 0.0 <= self.eps_min <= self.eps_max <= 1.0:
            raise ValueError("need 0 <= eps_min <= eps_max <= 1")
        if not 0.0 <= self.decay < 1.0:
            raise ValueError("decay must lie in [0, 1)")
        if self.epsilon is None:
            self.epsilon = self.eps_max

    def decay_step(self) -> None:
        self.epsilon = max(self.eps_min, self.epsilon * (1.0 - self.decay))


@dataclass(frozen=True)
class AgentConfig:
    """Hyperparameters of the learner; defaults mirror the study setup."""

    gamma: float = 0.99
    batch_size: int = 64
    max_episodes: int = 50000
    episode_length: int = 500
    buffer_capacity: int = 10000
    hidden_sizes: tuple = (64, 64)
    learn_rate: float = 0.01
    grad_decay: float = 0.9
    squared_grad_decay: float = 0.999
    adam_epsilon: float = 1e-8
    eps_max: float = 1.0
    eps_min: float = 0.01
    eps_decay: float = 0.005
    tau: float = 0.001
    target_update: str = "soft"
    target_update_interval: int = 1000
    # Rewards are scaled inside the learning update only (monotone, so the
    # greedy policy is unchanged); raw rewards are stored and logged.
    reward_scale: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        for name in ("batch_size", "max_episodes", "episode_length",
                     "buffer_capacity", "target_update_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.target_update not in ("soft", "hard"):
            raise ValueError("target_update must be 'soft' or 'hard'")
        if self.reward_scale <= 0.0:
            raise ValueError("reward_scale must be positive")


@dataclass(frozen=True, slots=True)
class EpisodeLog:
    episode: int
    reward: float
    epsilon: float
    mean_loss: float


def select_action(net: Mlp, obs: np.ndarray, sched: ExplorationSchedule,
                  rng: RngStream) -> int:
    """Epsilon-greedy over the Q-vector; exact ties go to the lowest index."""
    if rng.gen.random() < sched.epsilon:
        return int(rng.gen.integers(0, net.n_outputs))
    q = _forward_batch(net, np.asarray(obs, dtype=float).reshape(1, -1))
    return int(np.argmax(q[0]))


def _batch_targets(main: Mlp, target: Mlp, next_states: np.ndarray,
                   rewards: np.ndarray, gamma: float) -> np.ndarray:
    """Double-DQN regression targets: the main net picks the next action, the
    target net prices it."""
    a_star = np.argmax(_forward_batch(main, next_states), axis=1)
    q_next = _forward_batch(target, next_states)[np.arange(len(a_star)), a_star]
    return rewards + gamma * q_next


def ddqn_target(main: Mlp, target: Mlp, t: Transition, gamma: float) -> float:
    y = _batch_targets(main, target, np.asarray(t.next_state, dtype=float).reshape(1, -1),
                       np.array([t.reward]), gamma)
    return float(y[0])


def train(env_factory, cfg: AgentConfig):
    """Run the DDQN loop and return ``(trained_net, per-episode logs)``.

    One gradient update per environment step once the buffer holds a full
    batch; epsilon decays multiplicatively per step; the target net tracks the
    main net by soft update after every learning step (or a hard copy every
    ``target_update_interval`` learning steps).
    """
    env = env_factory(RngStream(cfg.seed, ENV_STREAM))
    explore_rng = RngStream(cfg.seed, EXPLORE_STREAM)
    replay_rng = RngStream(cfg.seed, REPLAY_STREAM)
    net = init_mlp([env.obs_dim, *cfg.hidden_sizes, env.n_actions],
                   RngStream(cfg.seed, INIT_STREAM))
    target = clone_mlp(net)
    opt = init_adam(net, cfg.learn_rate, cfg.grad_decay,
                    cfg.squared_grad_decay, cfg.adam_epsilon)
    buf = ReplayBuffer(cfg.buffer_capacity, env.obs_dim)
    sched = ExplorationSchedule(cfg.eps_max, cfg.eps_min, cfg.eps_decay)
    scale = cfg.reward_scale
    logs = []
    learn_steps = 0
    for episode in range(1, cfg.max_episodes + 1):
        obs = env.reset()
        total = 0.0
        loss_sum = 0.0
        n_updates = 0
        for _ in range(cfg.episode_length):
            a = select_action(net, obs, sched, explore_rng)
            r, executed, obs2 = env.step(a)
            buf.push(obs, executed, r, obs2)
            sched.decay_step()
            if len(buf) >= cfg.batch_size:
                s, acts, rews, s2 = buf.sample(cfg.batch_size, replay_rng)
                y = _batch_targets(net, target, s2, rews * scale, cfg.gamma)
                grad, loss = batch_backward_mse(net, s, acts, y)
                adam_step(net, opt, grad)
                learn_steps += 1
                if cfg.target_update == "soft":
                    soft_update(target, net, cfg.tau)
                elif learn_steps % cfg.target_update_interval == 0:
                    target.flat[...] = net.flat
                loss_sum += loss
                n_updates += 1
            total += r
            obs = obs2
        logs.append(EpisodeLog(episode, total, sched.epsilon,
                               loss_sum / n_updates if n_updates else 0.0))
    return net, logs


def greedy_policy(net: Mlp, failure_threshold: float):
    """Deterministic argmax policy over maintenance states (epsilon = 0)."""
    inv = 1.0 / failure_threshold

    def policy(s: SystemState) -> Action:
        q = forward(net, np.array([s.x * inv, s.x_m * inv]))
        return Action(int(np.argmax(q)))

    return policy


def write_training_log(path, logs, meta: str = "") -> None:
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        w = csv.writer(fh)
        w.writerow(("episode", "cumulative_reward", "epsilon", "mean_loss"))
        for entry in logs:
            w.writerow((entry.episode, entry.reward, entry.epsilon, entry.mean_loss))
