"""Softmax policy backed by a data re-uploading quantum circuit.

The circuit on ``n`` qubits alternates trainable single-qubit rotation layers
(RX, RY, RZ per qubit, angles ``phi``), CZ entangling layers, and feature
encoding layers (RX with trainable input scalings ``lam``); it opens and
closes with a rotation layer. Each action owns a Z-product observable whose
expectation, scaled by a trainable weight ``w_a`` and an inverse temperature
``xi``, feeds a softmax.

Training follows episodic REINFORCE: act by sampling the policy, accumulate a
batch of episodes, then take one Adam step per parameter group. Angle
gradients use the parameter-shift rule (full circuit evaluations at +-pi/2);
input-scaling gradients carry the encoded feature as a chain-rule factor; the
observable weights are differentiated analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .env import ACTIONS, EnvConfig, EnvState, Environment, Transition, scale_reward
from .nn import AdamState, adam_step

N_FEATURES = 5  # previous action, previous channel state, protected flag, two distances

__all__ = [
    "PqcParams",
    "ActionObservable",
    "CircuitTemplate",
    "QuantumAgentConfig",
    "param_count",
    "encode_state",
    "default_observables",
    "build_circuit",
    "policy",
    "policy_from_features",
    "discounted_returns",
    "reinforce_loss",
    "policy_gradient",
    "train",
    "save_pqc",
    "load_pqc",
]


def param_count(n_layers: int, n_qubits: int, n_actions: int = 3) -> int:
    """Trainable-parameter count (4N + 3) * n + |A| of the circuit policy."""
    if n_layers < 1 or n_qubits < 1:
        raise ValueError("need at least one layer and one qubit")
    return (4 * n_layers + 3) * n_qubits + n_actions


@dataclass
class PqcParams:
    """Trainable parameter groups: rotation angles ``phi`` with shape
    (n_layers+1, n_qubits, 3), input scalings ``lam`` with shape
    (n_layers, n_qubits), observable weights ``w`` with shape (n_actions,),
    and the softmax inverse temperature ``xi`` (not trained)."""

    phi: np.ndarray
    lam: np.ndarray
    w: np.ndarray
    xi: float = 1.0

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        self.lam = np.asarray(self.lam, dtype=np.float64)
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.phi.ndim != 3 or self.phi.shape[2] != 3:
            raise ValueError(f"phi must be (layers+1, qubits, 3), got {self.phi.shape}")
        if self.lam.shape != (self.phi.shape[0] - 1, self.phi.shape[1]):
            raise ValueError(
                f"lam shape {self.lam.shape} inconsistent with phi {self.phi.shape}")

    @property
    def n_layers(self) -> int:
        return self.lam.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.lam.shape[1]

    @property
    def n_actions(self) -> int:
        return self.w.shape[0]

    def count(self) -> int:
        return self.phi.size + self.lam.size + self.w.size

    def copy(self) -> "PqcParams":
        return PqcParams(self.phi.copy(), self.lam.copy(), self.w.copy(), self.xi)

    @classmethod
    def init(cls, n_layers: int, n_qubits: int, n_actions: int,
             rng: np.random.Generator, xi: float = 1.0) -> "PqcParams":
        """Fresh parameters: phi uniform in [0, 2pi), unit scalings and weights."""
        phi = rng.uniform(0.0, 2.0 * np.pi, size=(n_layers + 1, n_qubits, 3))
        lam = np.ones((n_layers, n_qubits))
        w = np.ones(n_actions)
        return cls(phi, lam, w, xi)


@dataclass(frozen=True)
class ActionObservable:
    """Z-product measured for one action's logit."""

    action: int
    qubits: tuple[int, ...]

    def __post_init__(self):
        if not self.qubits:
            raise ValueError("observable needs at least one qubit")

    def mask(self) -> int:
        return qsim.zprod_mask(self.qubits)


def default_observables(n_qubits: int, n_actions: int = 3) -> tuple[ActionObservable, ...]:
    """Disjoint contiguous Z-products, one per action; with five qubits and
    three actions this is Z0Z1 / Z2Z3 / Z4."""
    if n_qubits < n_actions:
        raise ValueError("need at least one qubit per action")
    base, rem = divmod(n_qubits, n_actions)
    out, start = [], 0
    for a in range(n_actions):
        size = base + (1 if a < rem else 0)
        out.append(ActionObservable(a, tuple(range(start, start + size))))
        start += size
    return tuple(out)


def encode_state(state: EnvState, config: EnvConfig) -> np.ndarray:
    """Min-max normalize the five observation features into [0, 1]."""

    def unit(value, lo, hi, name):
        if not lo <= value <= hi:
            raise ValueError(f"{name}={value} outside configured range [{lo}, {hi}]")
        return (value - lo) / (hi - lo) if hi > lo else 0.0

    return np.array([
        state.a / 2.0,
        state.c / 3.0,
        float(state.p),
        unit(state.d_dt, *config.d_st_range, "d_dt"),
        unit(state.d_tr, *config.d_tr_range, "d_tr"),
    ])


class CircuitTemplate:
    """Pre-compiled layout of the policy circuit for fixed (layers, qubits).

    Holds the kernel-ready gate arrays plus, for every rotation gate, which
    parameter it reads: an entry of ``phi``, or an entry of ``lam`` times the
    feature encoded on that qubit.
    """

    RX, RY, RZ, CZ = 0, 1, 2, 3

    def __init__(self, n_layers: int, n_qubits: int, topology: str = "chain"):
        if topology not in ("chain", "ring"):
            raise ValueError(f"unknown entangling topology {topology!r}")
        self.n_layers = n_layers
        self.n_qubits = n_qubits
        self.topology = topology

        kinds, targets, controls = [], [], []
        phi_pos, lam_pos, lam_feat = [], [], []

        def rotation_layer():
            for q in range(n_qubits):
                for code in (self.RX, self.RY, self.RZ):
                    phi_pos.append(len(kinds))
                    kinds.append(code)
                    targets.append(q)
                    controls.append(-1)

        rotation_layer()
        for _ in range(n_layers):
            pairs = [(q, q + 1) for q in range(n_qubits - 1)]
            if topology == "ring" and n_qubits > 2:
                pairs.append((n_qubits - 1, 0))
            for ctrl, tgt in pairs:
                kinds.append(self.CZ)
                targets.append(tgt)
                controls.append(ctrl)
            for q in range(n_qubits):
                lam_pos.append(len(kinds))
                lam_feat.append(q)
                kinds.append(self.RX)
                targets.append(q)
                controls.append(-1)
            rotation_layer()

        self.kinds = np.array(kinds, dtype=np.intc)
        self.targets = np.array(targets, dtype=np.intc)
        self.controls = np.array(controls, dtype=np.intc)
        self.n_gates = len(kinds)
        self.rot_positions = np.nonzero(self.kinds != self.CZ)[0].astype(np.int64)
        # phi/lam gates appear in circuit order that matches the row-major
        # flattening of the (layer, qubit, axis) / (layer, qubit) arrays
        self.phi_positions = np.array(phi_pos, dtype=np.int64)
        self.lam_positions = np.array(lam_pos, dtype=np.int64)
        lookup = {int(p): i for i, p in enumerate(self.rot_positions)}
        self.phi_rot_rows = np.array([lookup[p] for p in phi_pos], dtype=np.int64)
        self.lam_rot_rows = np.array([lookup[p] for p in lam_pos], dtype=np.int64)
        self.phi_src = np.arange(len(phi_pos), dtype=np.int64)
        self.lam_src = np.arange(len(lam_pos), dtype=np.int64)
        self.lam_feat = np.array(lam_feat, dtype=np.int64)

    def angles(self, features: np.ndarray, params: PqcParams) -> np.ndarray:
        return self.angles_batch(features[None, :], params)[0]

    def angles_batch(self, features: np.ndarray, params: PqcParams) -> np.ndarray:
        """Gate-angle matrix (n_states, n_gates) for a batch of feature rows."""
        features = np.atleast_2d(features)
        if features.shape[1] != self.n_qubits:
            raise ValueError(
                f"expected {self.n_qubits} features, got {features.shape[1]}")
        out = np.zeros((features.shape[0], self.n_gates), dtype=np.float64)
        out[:, self.phi_positions] = params.phi.ravel()[self.phi_src]
        out[:, self.lam_positions] = (params.lam.ravel()[self.lam_src]
                                      * features[:, self.lam_feat])
        return out


_TEMPLATE_CACHE: dict[tuple[int, int, str], CircuitTemplate] = {}


def get_template(n_layers: int, n_qubits: int, topology: str = "chain") -> CircuitTemplate:
    key = (n_layers, n_qubits, topology)
    if key not in _TEMPLATE_CACHE:
        _TEMPLATE_CACHE[key] = CircuitTemplate(n_layers, n_qubits, topology)
    return _TEMPLATE_CACHE[key]


def build_circuit(features: np.ndarray, params: PqcParams,
                  topology: str = "chain") -> list[qsim.Gate]:
    """The policy circuit as an explicit gate list (for inspection and for the
    dense-matrix oracle in the tests)."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (params.n_qubits,):
        raise ValueError(
            f"expected {params.n_qubits} features, got shape {features.shape}")
    template = get_template(params.n_layers, params.n_qubits, topology)
    angles = template.angles(features, params)
    names = {0: "rx", 1: "ry", 2: "rz"}
    gates = []
    for g in range(template.n_gates):
        if template.kinds[g] == 3:
            gates.append(qsim.Gate("cz", int(template.targets[g]),
                                   control=int(template.controls[g])))
        else:
            gates.append(qsim.Gate(names[int(template.kinds[g])],
                                   int(template.targets[g]), angle=angles[g]))
    return gates


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _masks(observables) -> np.ndarray:
    return np.array([obs.mask() for obs in observables], dtype=np.uint64)


def policy_from_features(features: np.ndarray, params: PqcParams,
                         observables=None, topology: str = "chain",
                         kernels=None):
    """(action probabilities, raw Z-product expectations) for a feature batch."""
    kernels = kernels if kernels is not None else qsim.get_kernels()
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if observables is None:
        observables = default_observables(params.n_qubits, params.n_actions)
    template = get_template(params.n_layers, params.n_qubits, topology)
    angles = template.angles_batch(features, params)
    pexp = kernels.run_batch_expect(params.n_qubits, template.kinds,
                                    template.targets, template.controls,
                                    angles, _masks(observables))
    probs = _softmax(params.xi * params.w[None, :] * pexp)
    return probs, pexp


def policy(state: EnvState, params: PqcParams, config: EnvConfig,
           observables=None, topology: str = "chain") -> np.ndarray:
    """Action distribution of the circuit policy at one environment state."""
    if params.n_qubits != N_FEATURES:
        raise ValueError(f"policy circuit must use {N_FEATURES} qubits")
    probs, _ = policy_from_features(encode_state(state, config), params,
                                    observables, topology)
    return probs[0]


def discounted_returns(rewards, gamma: float) -> np.ndarray:
    """Reward-to-go G_t = sum_{t'>=t} gamma^(t'-t) r_t' within one episode."""
    out = np.empty(len(rewards), dtype=np.float64)
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def _validate_batch(trajectories, gamma):
    if not trajectories or any(len(t) == 0 for t in trajectories):
        raise ValueError("need a non-empty batch of non-empty trajectories")
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    for traj in trajectories:
        for a, b in zip(traj, traj[1:]):
            if a.next_state != b.state:
                raise ValueError("trajectory is not contiguous")


def _batch_returns(trajectories, gamma, standardize):
    returns = [discounted_returns([scale_reward(tr.reward) for tr in traj], gamma)
               for traj in trajectories]
    if standardize:
        flat = np.concatenate(returns)
        mean, std = flat.mean(), flat.std()
        returns = [(g - mean) / (std + 1e-8) for g in returns]
    return returns


def reinforce_loss(trajectories, params: PqcParams, gamma: float,
                   config: EnvConfig, observables=None,
                   topology: str = "chain", standardize: bool = False) -> float:
    """The REINFORCE surrogate -(1/B) sum_traj sum_t log pi(a_t|s_t) G_t."""
    _validate_batch(trajectories, gamma)
    returns = _batch_returns(trajectories, gamma, standardize)
    total = 0.0
    for traj, g in zip(trajectories, returns):
        feats = np.stack([encode_state(tr.state, config) for tr in traj])
        probs, _ = policy_from_features(feats, params, observables, topology)
        logp = np.log(probs[np.arange(len(traj)), [tr.action for tr in traj]])
        total += float(logp @ g)
    return -total / len(trajectories)


def policy_gradient(trajectories, params: PqcParams, gamma: float,
                    config: EnvConfig, observables=None,
                    topology: str = "chain", standardize: bool = False,
                    kernels=None):
    """Exact gradient of ``reinforce_loss`` for the three parameter groups.

    Returns a dict with keys 'phi', 'lam', 'w' shaped like the parameters.
    Identical states (same previous-slot flags and distances) contribute one
    parameter-shift sweep with their coefficients summed, which changes
    nothing numerically but avoids redundant circuit evaluations.
    """
    _validate_batch(trajectories, gamma)
    kernels = kernels if kernels is not None else qsim.get_kernels()
    if observables is None:
        observables = default_observables(params.n_qubits, params.n_actions)
    template = get_template(params.n_layers, params.n_qubits, topology)
    n_actions = params.n_actions
    batch_size = len(trajectories)
    returns = _batch_returns(trajectories, gamma, standardize)

    index_of: dict = {}
    feat_rows: list[np.ndarray] = []
    coefs: list[np.ndarray] = []
    for traj, g in zip(trajectories, returns):
        for tr, g_t in zip(traj, g):
            key = (tr.state.a, tr.state.c, tr.state.p, tr.state.d_dt, tr.state.d_tr)
            idx = index_of.get(key)
            if idx is None:
                idx = len(feat_rows)
                index_of[key] = idx
                feat_rows.append(encode_state(tr.state, config))
                coefs.append(np.zeros(n_actions))
            coefs[idx][tr.action] -= g_t / batch_size

    feats = np.stack(feat_rows)
    coef = np.stack(coefs)
    masks = _masks(observables)
    angles = template.angles_batch(feats, params)

    pexp = kernels.run_batch_expect(params.n_qubits, template.kinds,
                                    template.targets, template.controls,
                                    angles, masks)
    probs = _softmax(params.xi * params.w[None, :] * pexp)
    jac = kernels.shift_jacobian_batch(params.n_qubits, template.kinds,
                                       template.targets, template.controls,
                                       angles, template.rot_positions, masks)

    # d loss / d logit_a, folded with the observable weights for angle grads
    csum = coef.sum(axis=1, keepdims=True)
    dlogit = params.xi * (coef - csum * probs)
    angle_grad = np.einsum("sra,sa->sr", jac, dlogit * params.w[None, :])

    phi_grad = np.zeros(params.phi.size)
    phi_grad[template.phi_src] = angle_grad[:, template.phi_rot_rows].sum(axis=0)
    lam_grad = np.zeros(params.lam.size)
    lam_contrib = angle_grad[:, template.lam_rot_rows] * feats[:, template.lam_feat]
    np.add.at(lam_grad, template.lam_src, lam_contrib.sum(axis=0))
    w_grad = (dlogit * pexp).sum(axis=0)

    return {
        "phi": phi_grad.reshape(params.phi.shape),
        "lam": lam_grad.reshape(params.lam.shape),
        "w": w_grad,
    }


@dataclass
class QuantumAgentConfig:
    n_layers: int = 3
    xi: float = 1.0
    lr_phi: float = 0.05
    lr_lam: float = 0.01
    lr_w: float = 0.1
    gamma: float = 0.9
    # one full episode per gradient step: within-episode return standardization
    # compares actions at the same distances, which converges far faster than
    # pooling many episodes into one update
    batch_episodes: int = 1
    topology: str = "chain"
    observables: tuple[tuple[int, ...], ...] | None = None
    standardize_returns: bool = True

    def __post_init__(self):
        if self.n_layers < 1:
            raise ValueError("need at least one quantum layer")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.batch_episodes < 1:
            raise ValueError("batch_episodes must be positive")

    def resolve_observables(self, n_qubits: int, n_actions: int):
        if self.observables is None:
            return default_observables(n_qubits, n_actions)
        return tuple(ActionObservable(a, tuple(q))
                     for a, q in enumerate(self.observables))


@dataclass
class TrainResult:
    params: PqcParams
    total_steps: int
    updates: int
    param_count: int


def train(env_config: EnvConfig, agent_config: QuantumAgentConfig,
          total_steps: int, seed: int, recorder=None) -> TrainResult:
    """Episodic REINFORCE on the spectrum-access MDP (one seeded run).

    Acts by sampling the circuit policy; after every ``batch_episodes``
    complete episodes takes one gradient step with three Adam optimizers
    (phi / lam / w learning rates from the agent config). ``recorder``, when
    given, receives one ``step(reward)`` call per slot.
    """
    if total_steps < 1:
        raise ValueError("total_steps must be positive")
    ss = np.random.SeedSequence(seed)
    env_rng, agent_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    env = Environment(env_config, env_rng)
    n_actions = len(ACTIONS)
    params = PqcParams.init(agent_config.n_layers, N_FEATURES, n_actions,
                            agent_rng, xi=agent_config.xi)
    observables = agent_config.resolve_observables(N_FEATURES, n_actions)
    template = get_template(agent_config.n_layers, N_FEATURES,
                            agent_config.topology)
    kernels = qsim.get_kernels()
    opt_phi = AdamState.for_params([params.phi], agent_config.lr_phi)
    opt_lam = AdamState.for_params([params.lam], agent_config.lr_lam)
    opt_w = AdamState.for_params([params.w], agent_config.lr_w)

    horizon = env_config.horizon
    episodes: list[list[Transition]] = []
    updates = 0
    steps_done = 0
    cumprobs_cache: dict[tuple[int, int, int], np.ndarray] = {}

    while steps_done < total_steps:
        state = env.reset()
        cumprobs_cache.clear()
        traj: list[Transition] = []
        episode_len = min(horizon, total_steps - steps_done)
        for _ in range(episode_len):
            key = (state.a, state.c, state.p)
            cum = cumprobs_cache.get(key)
            if cum is None:
                probs, _ = policy_from_features(
                    encode_state(state, env_config), params, observables,
                    agent_config.topology, kernels)
                cum = np.cumsum(probs[0])
                cumprobs_cache[key] = cum
            u = agent_rng.random()
            action = min(int(np.searchsorted(cum, u, side="right")), n_actions - 1)
            next_state, reward = env.step(action)
            traj.append(Transition(state, action, reward, next_state))
            state = next_state
            steps_done += 1
            if recorder is not None:
                recorder.step(reward)
        episodes.append(traj)
        if len(episodes) == agent_config.batch_episodes and len(traj) == horizon:
            grads = policy_gradient(
                episodes, params, agent_config.gamma, env_config, observables,
                agent_config.topology,
                standardize=agent_config.standardize_returns, kernels=kernels)
            adam_step([params.phi], [grads["phi"]], opt_phi)
            adam_step([params.lam], [grads["lam"]], opt_lam)
            adam_step([params.w], [grads["w"]], opt_w)
            episodes = []
            cumprobs_cache.clear()
            updates += 1

    expected = param_count(agent_config.n_layers, N_FEATURES, n_actions)
    assert params.count() == expected
    return TrainResult(params=params, total_steps=steps_done, updates=updates,
                       param_count=expected)


def save_pqc(path, params: PqcParams) -> None:
    """Checkpoint as named arrays (.npz); round-trips bit-exactly."""
    np.savez(path, phi=params.phi, lam=params.lam, w=params.w,
             xi=np.float64(params.xi))


def load_pqc(path) -> PqcParams:
    with np.load(path) as data:
        return PqcParams(data["phi"], data["lam"], data["w"],
                         float(data["xi"]))
