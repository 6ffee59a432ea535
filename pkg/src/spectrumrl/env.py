"""Slotted spectrum-access MDP for one D2D pair sharing a cellular band.

Per slot the D2D transmitter picks one of three actions: stay idle (0),
transmit actively (1), or backscatter the BS signal (2). A cellular user
occupies the band with probability ``p_access``; an active CU sits inside the
interference-tolerant zone near the BS with probability ``p_protected``.
Rewards are rates in bit/s, except for a flat penalty when an active
transmission collides with an unprotected CU.

Distances are redrawn once per episode and held fixed; the observation is the
previous slot's (action, channel state, protected flag) plus both distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkGeometry, backscatter_rate, d2d_rate, dbm_to_watts

ACTIONS = (0, 1, 2)
ACTION_IDLE, ACTION_TRANSMIT, ACTION_BACKSCATTER = ACTIONS

#: channel-state code: idle / CU only / D2D only / CU and D2D
CHANNEL_STATES = (0, 1, 2, 3)

#: rewards are rates in bit/s; learning works on this scale (1e-6 => Mbit/s)
REWARD_SCALE = 1e-6


@dataclass(frozen=True)
class EnvConfig:
    p_access: float = 0.8
    p_protected: float = 0.2
    penalty: float = -100.0
    d_st_range: tuple[float, float] = (100.0, 1000.0)
    d_tr_range: tuple[float, float] = (10.0, 100.0)
    f: float = 2.0
    w: float = 20e6
    p_d_dbm: float = 23.0
    p_t_watts: float = 10.0
    p_n_dbm: float = -114.0
    alpha: float = 0.6
    a_e: float = 0.0086
    horizon: int = 100
    rng_seed: int = 0
    # backscattering needs an ambient downlink to reflect: with time-orthogonal
    # CU scheduling an idle slot carries no BS signal in this band, so action 2
    # pays zero there. Set False to pay C_b unconditionally instead.
    backscatter_requires_cu: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p_access <= 1.0:
            raise ValueError(f"p_access must lie in [0, 1], got {self.p_access}")
        if not 0.0 <= self.p_protected <= 1.0:
            raise ValueError(f"p_protected must lie in [0, 1], got {self.p_protected}")
        for name, (lo, hi) in (("d_st_range", self.d_st_range),
                               ("d_tr_range", self.d_tr_range)):
            if lo <= 0 or hi < lo:
                raise ValueError(f"{name} must satisfy 0 < lo <= hi, got {(lo, hi)}")
        if self.penalty > 0:
            raise ValueError("penalty must be non-positive")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")

    def geometry(self, d_dt: float, d_tr: float) -> LinkGeometry:
        return LinkGeometry(
            d_tr=d_tr,
            d_st=d_dt,
            f=self.f,
            w=self.w,
            p_d_dbm=self.p_d_dbm,
            p_t_watts=self.p_t_watts,
            p_n_watts=dbm_to_watts(self.p_n_dbm),
            alpha=self.alpha,
            a_e=self.a_e,
        )


@dataclass(frozen=True)
class EnvState:
    """Observation: previous action/channel/protected flag plus the episode's
    fixed BS-to-Tx and Tx-to-Rx distances (m)."""

    a: int
    c: int
    p: int
    d_dt: float
    d_tr: float


@dataclass(frozen=True)
class Transition:
    state: EnvState
    action: int
    reward: float
    next_state: EnvState


def reset(config: EnvConfig, rng: np.random.Generator) -> EnvState:
    """Start an episode: draw distances uniformly, clear the history flags."""
    d_dt = rng.uniform(*config.d_st_range)
    d_tr = rng.uniform(*config.d_tr_range)
    return EnvState(a=0, c=0, p=0, d_dt=d_dt, d_tr=d_tr)


def _channel_code(action: int, cu_active: bool) -> int:
    d2d_on = action in (ACTION_TRANSMIT, ACTION_BACKSCATTER)
    if cu_active:
        return 3 if d2d_on else 1
    return 2 if d2d_on else 0


def _outcome(state: EnvState, action: int, cu_active: bool, protected: bool,
             c_d: float, c_b: float, config: EnvConfig) -> tuple[EnvState, float]:
    """Reward and successor state given the slot's CU draw and cached rates."""
    if action == ACTION_IDLE:
        reward = 0.0
    elif action == ACTION_TRANSMIT:
        if cu_active and not protected:
            reward = config.penalty
        else:
            reward = c_d
    elif action == ACTION_BACKSCATTER:
        if cu_active or not config.backscatter_requires_cu:
            reward = c_b
        else:
            reward = 0.0
    else:
        raise ValueError(f"invalid action {action!r}; expected one of {ACTIONS}")
    nxt = EnvState(
        a=action,
        c=_channel_code(action, cu_active),
        p=int(protected) if cu_active else 0,
        d_dt=state.d_dt,
        d_tr=state.d_tr,
    )
    return nxt, reward


def step(state: EnvState, action: int, config: EnvConfig,
         rng: np.random.Generator) -> tuple[EnvState, float]:
    """One slot of the MDP, recomputing rates from the state's distances."""
    if action not in ACTIONS:
        raise ValueError(f"invalid action {action!r}; expected one of {ACTIONS}")
    geom = config.geometry(state.d_dt, state.d_tr)
    cu_active = rng.random() < config.p_access
    protected = bool(cu_active and rng.random() < config.p_protected)
    return _outcome(state, action, cu_active, protected,
                    d2d_rate(geom), backscatter_rate(geom), config)


class Environment:
    """Stateful wrapper owning an RNG and caching the per-episode rates.

    Produces exactly the same trajectories as the functional ``reset``/``step``
    pair for the same generator state; the cache only avoids recomputing the
    two rates every slot.
    """

    def __init__(self, config: EnvConfig, rng: np.random.Generator | None = None):
        self.config = config
        self.rng = rng if rng is not None else np.random.default_rng(config.rng_seed)
        self.state: EnvState | None = None
        self.c_d = 0.0
        self.c_b = 0.0

    def reset(self) -> EnvState:
        self.state = reset(self.config, self.rng)
        geom = self.config.geometry(self.state.d_dt, self.state.d_tr)
        self.c_d = d2d_rate(geom)
        self.c_b = backscatter_rate(geom)
        return self.state

    def step(self, action: int) -> tuple[EnvState, float]:
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        if action not in ACTIONS:
            raise ValueError(f"invalid action {action!r}; expected one of {ACTIONS}")
        cfg = self.config
        cu_active = self.rng.random() < cfg.p_access
        protected = bool(cu_active and self.rng.random() < cfg.p_protected)
        nxt, reward = _outcome(self.state, action, cu_active, protected,
                               self.c_d, self.c_b, cfg)
        self.state = nxt
        return nxt, reward


def average_throughput(rewards) -> float:
    """Mean achieved throughput in bit/s: collision slots count as zero."""
    arr = np.asarray(rewards, dtype=float)
    if arr.size == 0:
        raise ValueError("average_throughput needs at least one reward")
    return float(np.mean(np.maximum(arr, 0.0)))


def scale_reward(reward: float, scale: float = REWARD_SCALE) -> float:
    """Map a raw reward onto the learning scale.

    Rates (non-negative rewards) are multiplied by ``scale`` (default: bit/s
    to Mbit/s); the collision penalty is already a scale-free constant and
    passes through unchanged.
    """
    return reward * scale if reward >= 0.0 else reward
