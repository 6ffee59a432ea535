"""Deep Q-learning baseline: epsilon-greedy acting, uniform replay, a
quasi-static target network, and the squared TD-error loss.

The Q-network consumes the same min-max-normalized features as the quantum
policy and is trained on the same Mbit/s reward scale, so the two agents
differ only in their function approximator and update rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import ACTIONS, EnvConfig, Environment, scale_reward
from .nn import AdamState, Mlp, adam_step
from .qpolicy import N_FEATURES, encode_state

__all__ = ["ReplayBuffer", "DqnConfig", "act", "td_loss", "train", "DqnTrainResult"]


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform random sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items = []
        self._cursor = 0

    def __len__(self):
        return len(self._items)

    def push(self, item) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._cursor] = item
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator):
        if not self._items:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._items), size=batch_size)
        return [self._items[i] for i in idx]

    def items(self):
        return list(self._items)


@dataclass(frozen=True)
class DqnConfig:
    hidden_sizes: tuple[int, ...] = (32, 32)
    lr: float = 0.01
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_floor: float = 0.01
    epsilon_decay: float = 0.9999
    target_update_period: int = 5000
    batch_size: int = 32
    buffer_capacity: int = 10000

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 < self.epsilon_floor <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 < epsilon_floor <= epsilon_start <= 1")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise ValueError("epsilon_decay must lie in (0, 1]")

    def layer_sizes(self) -> list[int]:
        return [N_FEATURES, *self.hidden_sizes, len(ACTIONS)]


def act(q_net: Mlp, features: np.ndarray, epsilon: float,
        rng: np.random.Generator) -> int:
    """Epsilon-greedy action; exact ties break toward the lowest index."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(0, len(ACTIONS)))
    return int(np.argmax(q_net.forward(features)))


def td_loss(batch, q_net: Mlp, target_net: Mlp, gamma: float):
    """Mean squared TD error over a batch of (features, action, reward,
    next_features) tuples, plus its gradients for ``q_net``.

    The bootstrap term comes from ``target_net`` and is treated as constant.
    Returns (loss, weight_grads, bias_grads).
    """
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    feats = np.stack([b[0] for b in batch])
    actions = np.array([b[1] for b in batch], dtype=np.intp)
    rewards = np.array([b[2] for b in batch], dtype=np.float64)
    next_feats = np.stack([b[3] for b in batch])

    q_next = target_net.forward(next_feats)
    targets = rewards + gamma * q_next.max(axis=1)
    q = q_net.forward(feats)
    delta = q[np.arange(len(batch)), actions] - targets
    loss = float(np.mean(delta**2))

    out_grad = np.zeros_like(q)
    out_grad[np.arange(len(batch)), actions] = 2.0 * delta / len(batch)
    w_grads, b_grads = q_net.backward(out_grad)
    return loss, w_grads, b_grads


@dataclass
class DqnTrainResult:
    q_net: Mlp
    total_steps: int
    updates: int
    param_count: int
    final_epsilon: float


def train(env_config: EnvConfig, dqn_config: DqnConfig, total_steps: int,
          seed: int, recorder=None) -> DqnTrainResult:
    """One seeded DQL run on the spectrum-access MDP.

    Per slot: act epsilon-greedily, store the transition, and once the buffer
    holds a full batch take one Adam step on the TD loss; the target network
    is refreshed from the online one every ``target_update_period`` steps.
    """
    if total_steps < 1:
        raise ValueError("total_steps must be positive")
    ss = np.random.SeedSequence(seed)
    env_rng, agent_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    env = Environment(env_config, env_rng)
    q_net = Mlp(dqn_config.layer_sizes(), rng=agent_rng)
    target_net = Mlp(dqn_config.layer_sizes(), rng=agent_rng)
    target_net.copy_from(q_net)
    opt = AdamState.for_params(q_net.params, dqn_config.lr)
    buffer = ReplayBuffer(dqn_config.buffer_capacity)

    epsilon = dqn_config.epsilon_start
    horizon = env_config.horizon
    updates = 0
    steps_done = 0

    while steps_done < total_steps:
        state = env.reset()
        feats = encode_state(state, env_config)
        for _ in range(min(horizon, total_steps - steps_done)):
            action = act(q_net, feats, epsilon, agent_rng)
            next_state, reward = env.step(action)
            next_feats = encode_state(next_state, env_config)
            buffer.push((feats, action, scale_reward(reward), next_feats))
            feats = next_feats
            steps_done += 1

            if len(buffer) >= dqn_config.batch_size:
                batch = buffer.sample(dqn_config.batch_size, agent_rng)
                _, w_grads, b_grads = td_loss(batch, q_net, target_net,
                                              dqn_config.gamma)
                grads = []
                for wg, bg in zip(w_grads, b_grads):
                    grads.append(wg)
                    grads.append(bg)
                adam_step(q_net.params, grads, opt)
                updates += 1
            if steps_done % dqn_config.target_update_period == 0:
                target_net.copy_from(q_net)
            epsilon = max(dqn_config.epsilon_floor,
                          epsilon * dqn_config.epsilon_decay)
            if recorder is not None:
                recorder.step(reward, epsilon=epsilon)

    return DqnTrainResult(q_net=q_net, total_steps=steps_done, updates=updates,
                          param_count=q_net.param_count(),
                          final_epsilon=epsilon)
