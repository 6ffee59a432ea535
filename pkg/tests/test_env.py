import itertools

import numpy as np
import pytest

from spectrumrl.channel import backscatter_rate, d2d_rate
from spectrumrl.env import (ACTIONS, EnvConfig, EnvState, Environment,
                            average_throughput, reset, scale_reward, step)


@pytest.fixture
def config():
    return EnvConfig()


class TestReset:
    def test_deterministic_under_fixed_seed(self, config):
        a = reset(config, np.random.default_rng(42))
        b = reset(config, np.random.default_rng(42))
        assert a == b

    def test_distances_in_range(self, config):
        rng = np.random.default_rng(0)
        for _ in range(200):
            s = reset(config, rng)
            assert 100.0 <= s.d_dt <= 1000.0
            assert 10.0 <= s.d_tr <= 100.0

    def test_initial_flags_cleared(self, config):
        s = reset(config, np.random.default_rng(1))
        assert (s.a, s.c, s.p) == (0, 0, 0)


class TestStep:
    def test_idle_always_zero_reward(self, config):
        rng = np.random.default_rng(2)
        s = reset(config, rng)
        for _ in range(50):
            s, r = step(s, 0, config, rng)
            assert r == 0.0

    def test_collision_pays_penalty(self):
        # force an unprotected active CU every slot
        config = EnvConfig(p_access=1.0, p_protected=0.0)
        rng = np.random.default_rng(3)
        s = reset(config, rng)
        _, r = step(s, 1, config, rng)
        assert r == -100.0

    def test_backscatter_pays_cb_when_cu_active(self):
        config = EnvConfig(p_access=1.0)
        rng = np.random.default_rng(4)
        s = reset(config, rng)
        geom = config.geometry(s.d_dt, s.d_tr)
        _, r = step(s, 2, config, rng)
        assert r == pytest.approx(backscatter_rate(geom), rel=1e-12)

    def test_backscatter_idle_slot_pays_nothing(self):
        config = EnvConfig(p_access=0.0)
        rng = np.random.default_rng(4)
        s = reset(config, rng)
        _, r = step(s, 2, config, rng)
        assert r == 0.0

    def test_backscatter_unconditional_mode(self):
        config = EnvConfig(p_access=0.0, backscatter_requires_cu=False)
        rng = np.random.default_rng(4)
        s = reset(config, rng)
        geom = config.geometry(s.d_dt, s.d_tr)
        _, r = step(s, 2, config, rng)
        assert r == pytest.approx(backscatter_rate(geom), rel=1e-12)

    def test_invalid_action(self, config):
        rng = np.random.default_rng(5)
        s = reset(config, rng)
        with pytest.raises(ValueError):
            step(s, 3, config, rng)

    def test_reward_support_exhaustive(self):
        """Brute force the reward table over (action, cu_active, protected)."""
        for p_access, p_protected in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]:
            config = EnvConfig(p_access=p_access, p_protected=p_protected)
            rng = np.random.default_rng(6)
            s = reset(config, rng)
            geom = config.geometry(s.d_dt, s.d_tr)
            c_d, c_b = d2d_rate(geom), backscatter_rate(geom)
            cu = p_access == 1.0
            prot = cu and p_protected == 1.0
            expected = {
                0: 0.0,
                1: config.penalty if (cu and not prot) else c_d,
                2: c_b if cu else 0.0,
            }
            for action in ACTIONS:
                nxt, r = step(s, action, config, rng)
                assert r == pytest.approx(expected[action], rel=1e-12)
                # channel flag consistency
                d2d_on = action in (1, 2)
                if cu:
                    assert nxt.c == (3 if d2d_on else 1)
                else:
                    assert nxt.c == (2 if d2d_on else 0)
                assert nxt.p == (1 if (cu and prot) else 0)

    def test_channel_flag_iff_conditions(self, config):
        rng = np.random.default_rng(7)
        s = reset(config, rng)
        for _ in range(300):
            action = int(rng.integers(0, 3))
            nxt, _ = step(s, action, config, rng)
            assert (nxt.c in (2, 3)) == (action in (1, 2))
            if nxt.c == 0:
                assert action == 0
            s = nxt

    def test_distances_constant_within_episode(self, config):
        rng = np.random.default_rng(8)
        s0 = reset(config, rng)
        s = s0
        for _ in range(100):
            s, _ = step(s, int(rng.integers(0, 3)), config, rng)
            assert s.d_dt == s0.d_dt and s.d_tr == s0.d_tr


class TestEnvironmentWrapper:
    def test_matches_functional_core(self, config):
        """The rate-caching wrapper must replay the functional trajectory."""
        env = Environment(config, np.random.default_rng(99))
        rng = np.random.default_rng(99)
        actions = np.random.default_rng(1).integers(0, 3, size=250)
        s_fn = reset(config, rng)
        s_env = env.reset()
        assert s_fn == s_env
        for a in actions:
            s_fn, r_fn = step(s_fn, int(a), config, rng)
            s_env, r_env = env.step(int(a))
            assert s_fn == s_env
            assert r_fn == pytest.approx(r_env, rel=1e-12, abs=0.0)

    def test_trajectory_reproducible_bit_for_bit(self, config):
        def trajectory(seed):
            env = Environment(config, np.random.default_rng(seed))
            env.reset()
            out = []
            arng = np.random.default_rng(123)
            for _ in range(300):
                _, r = env.step(int(arng.integers(0, 3)))
                out.append(r)
            return out

        assert trajectory(7) == trajectory(7)

    def test_step_before_reset_errors(self, config):
        env = Environment(config)
        with pytest.raises(RuntimeError):
            env.step(0)


class TestAverageThroughput:
    def test_all_zero(self):
        assert average_throughput([0.0, 0.0, 0.0]) == 0.0

    def test_penalty_clamps_to_zero(self):
        c_d = 5e6
        assert average_throughput([c_d, -100.0]) == pytest.approx(c_d / 2)

    def test_constant(self):
        assert average_throughput([3.3e6] * 10) == pytest.approx(3.3e6)

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            average_throughput([])


class TestScaleReward:
    def test_rates_shrink_to_mbps(self):
        assert scale_reward(124.5e6) == pytest.approx(124.5)

    def test_penalty_passes_through(self):
        assert scale_reward(-100.0) == -100.0

    def test_zero(self):
        assert scale_reward(0.0) == 0.0


class TestConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"p_access": 1.2},
        {"p_protected": -0.1},
        {"d_st_range": (0.0, 10.0)},
        {"d_tr_range": (50.0, 10.0)},
        {"penalty": 5.0},
        {"horizon": 0},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            EnvConfig(**kwargs)
