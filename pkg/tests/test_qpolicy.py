import math
from collections import Counter

import numpy as np
import pytest

from spectrumrl import qsim
from spectrumrl.env import EnvConfig, EnvState, Environment, Transition
from spectrumrl.qpolicy import (ActionObservable, PqcParams,
                                QuantumAgentConfig, build_circuit,
                                default_observables, discounted_returns,
                                encode_state, load_pqc, param_count, policy,
                                policy_from_features, policy_gradient,
                                reinforce_loss, save_pqc, train)

import oracles


@pytest.fixture
def config():
    return EnvConfig()


def make_batch(config, params_seed=0, n_episodes=1, horizon=6,
               action_seed=1, env_seed=2):
    """Short random-action trajectories from the real environment."""
    env = Environment(config, np.random.default_rng(env_seed))
    arng = np.random.default_rng(action_seed)
    batch = []
    for _ in range(n_episodes):
        state = env.reset()
        traj = []
        for _ in range(horizon):
            action = int(arng.integers(0, 3))
            nxt, reward = env.step(action)
            traj.append(Transition(state, action, reward, nxt))
            state = nxt
        batch.append(traj)
    return batch


class TestEncodeState:
    def test_all_minima(self, config):
        s = EnvState(0, 0, 0, 100.0, 10.0)
        np.testing.assert_array_equal(encode_state(s, config), np.zeros(5))

    def test_all_maxima(self, config):
        s = EnvState(2, 3, 1, 1000.0, 100.0)
        np.testing.assert_array_equal(encode_state(s, config), np.ones(5))

    def test_interior_point(self, config):
        s = EnvState(1, 2, 0, 550.0, 55.0)
        np.testing.assert_allclose(encode_state(s, config),
                                   [0.5, 2 / 3, 0.0, 0.5, 0.5])

    def test_out_of_range_distance(self, config):
        with pytest.raises(ValueError):
            encode_state(EnvState(0, 0, 0, 99.0, 10.0), config)
        with pytest.raises(ValueError):
            encode_state(EnvState(0, 0, 0, 100.0, 101.0), config)


class TestBuildCircuit:
    def test_gate_count_three_layers(self):
        params = PqcParams.init(3, 5, 3, np.random.default_rng(0))
        gates = build_circuit(np.zeros(5), params)
        assert len(gates) == 87
        kinds = Counter(g.kind for g in gates)
        assert kinds["cz"] == 12
        assert kinds["rx"] + kinds["ry"] + kinds["rz"] == 75

    def test_gate_count_one_layer_two_qubits(self):
        params = PqcParams.init(1, 2, 3, np.random.default_rng(0))
        assert len(build_circuit(np.zeros(2), params)) == 15

    def test_last_layer_is_variational(self):
        params = PqcParams.init(2, 4, 3, np.random.default_rng(0))
        gates = build_circuit(np.ones(4), params)
        tail = gates[-12:]  # 3 rotations x 4 qubits
        assert all(g.kind in ("rx", "ry", "rz") for g in tail)
        assert [g.kind for g in tail[:3]] == ["rx", "ry", "rz"]

    def test_zero_angles_identity(self):
        params = PqcParams(np.zeros((3, 5, 3)), np.zeros((2, 5)), np.ones(3))
        feats = np.random.default_rng(1).uniform(size=5)
        _, pexp = policy_from_features(feats, params)
        np.testing.assert_allclose(pexp, np.ones((1, 3)), atol=1e-12)

    def test_ring_topology_adds_closing_cz(self):
        params = PqcParams.init(1, 4, 3, np.random.default_rng(0))
        chain = build_circuit(np.zeros(4), params, topology="chain")
        ring = build_circuit(np.zeros(4), params, topology="ring")
        assert (sum(g.kind == "cz" for g in ring)
                == sum(g.kind == "cz" for g in chain) + 1)

    def test_shape_mismatch(self):
        params = PqcParams.init(1, 3, 3, np.random.default_rng(0))
        with pytest.raises(ValueError):
            build_circuit(np.zeros(5), params)


class TestParamCount:
    @pytest.mark.parametrize("n_layers,expected", [(1, 38), (3, 78), (5, 118)])
    def test_paper_values(self, n_layers, expected):
        assert param_count(n_layers, 5, 3) == expected

    def test_sweep_matches_storage(self):
        rng = np.random.default_rng(1)
        for n_layers in range(1, 6):
            for n_qubits in range(1, 7):
                params = PqcParams.init(n_layers, n_qubits, 3, rng)
                assert params.count() == param_count(n_layers, n_qubits, 3)


class TestPolicy:
    def test_valid_distribution(self, config):
        rng = np.random.default_rng(3)
        params = PqcParams.init(3, 5, 3, rng)
        env = Environment(config, rng)
        for _ in range(20):
            probs = policy(env.reset(), params, config)
            assert probs.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(probs > 0) and np.all(probs < 1)

    def test_equal_logits_uniform(self, config):
        params = PqcParams(np.zeros((4, 5, 3)), np.zeros((3, 5)), np.ones(3))
        probs = policy(EnvState(0, 0, 0, 500.0, 50.0), params, config)
        np.testing.assert_allclose(probs, np.full(3, 1 / 3), atol=1e-12)

    def test_zero_inverse_temperature_uniform(self, config):
        params = PqcParams.init(3, 5, 3, np.random.default_rng(4), xi=0.0)
        probs = policy(EnvState(1, 2, 1, 300.0, 30.0), params, config)
        np.testing.assert_allclose(probs, np.full(3, 1 / 3), atol=1e-12)

    def test_softmax_shift_invariance(self):
        logits = np.array([0.3, -1.2, 2.0])
        from spectrumrl.qpolicy import _softmax

        np.testing.assert_allclose(_softmax(logits), _softmax(logits + 11.7),
                                   atol=1e-12)

    def test_matches_dense_oracle(self, config):
        """Kernel-path probabilities vs full Kronecker-matrix evaluation."""
        rng = np.random.default_rng(5)
        params = PqcParams.init(3, 5, 3, rng)
        observables = default_observables(5, 3)
        for _ in range(5):
            feats = rng.uniform(size=5)
            probs, pexp = policy_from_features(feats, params)
            state = oracles.dense_run(build_circuit(feats, params), 5)
            dense_exp = np.array([
                oracles.dense_expectation(state,
                                          tuple((q, "Z") for q in obs.qubits), 5)
                for obs in observables
            ])
            np.testing.assert_allclose(pexp[0], dense_exp, atol=1e-10)
            logits = params.xi * params.w * dense_exp
            dense_probs = np.exp(logits - logits.max())
            dense_probs /= dense_probs.sum()
            np.testing.assert_allclose(probs[0], dense_probs, atol=1e-8)


class TestDiscountedReturns:
    def test_hand_example(self):
        got = discounted_returns([1.0, 2.0, 3.0], 0.5)
        np.testing.assert_allclose(got, [1 + 1 + 0.75, 2 + 1.5, 3.0])

    def test_gamma_zero_is_immediate_reward(self):
        r = [5.0, -1.0, 2.0]
        np.testing.assert_allclose(discounted_returns(r, 0.0), r)


class TestPolicyGradient:
    def test_zero_returns_zero_gradient(self, config):
        batch = make_batch(config, horizon=4)
        # rewards all forced to zero => all returns zero
        batch = [[Transition(t.state, t.action, 0.0, t.next_state)
                  for t in traj] for traj in batch]
        params = PqcParams.init(2, 5, 3, np.random.default_rng(7))
        grads = policy_gradient(batch, params, 0.9, config)
        for g in grads.values():
            np.testing.assert_array_equal(g, np.zeros_like(g))

    def test_duplicate_trajectory_equals_single(self, config):
        batch = make_batch(config, horizon=5)
        params = PqcParams.init(2, 5, 3, np.random.default_rng(8))
        single = policy_gradient(batch, params, 0.9, config)
        double = policy_gradient(batch * 2, params, 0.9, config)
        for key in single:
            np.testing.assert_allclose(single[key], double[key], atol=1e-12)

    def test_finite_differences_across_instances(self, config):
        """Parameter-shift + chain rule vs central differences (1e-4 rel).

        Covers >= 100 random (instance, component) pairs over small circuits.
        """
        rng = np.random.default_rng(9)
        checked = 0
        for trial in range(12):
            n_layers = int(rng.integers(1, 3))
            params = PqcParams.init(n_layers, 5, 3, rng,
                                    xi=float(rng.uniform(0.5, 2.0)))
            batch = make_batch(config, horizon=int(rng.integers(2, 6)),
                               action_seed=trial, env_seed=trial + 50)
            grads = policy_gradient(batch, params, 0.9, config)
            h = 1e-4
            for group in ("phi", "lam", "w"):
                arr = getattr(params, group)
                flat_grad = grads[group].ravel()
                sample = rng.choice(arr.size, size=min(4, arr.size),
                                    replace=False)
                for idx in sample:
                    orig = arr.ravel()[idx]
                    arr.ravel()[idx] = orig + h
                    up = reinforce_loss(batch, params, 0.9, config)
                    arr.ravel()[idx] = orig - h
                    down = reinforce_loss(batch, params, 0.9, config)
                    arr.ravel()[idx] = orig
                    fd = (up - down) / (2 * h)
                    assert math.isclose(flat_grad[idx], fd, rel_tol=1e-4,
                                        abs_tol=1e-7), (group, idx)
                    checked += 1
        assert checked >= 100

    def test_gradient_step_decreases_loss(self, config):
        """Plain gradient descent with lr 1e-3 on one fixed trajectory."""
        params = PqcParams.init(2, 5, 3, np.random.default_rng(10))
        batch = make_batch(config, horizon=8)
        before = reinforce_loss(batch, params, 0.9, config)
        grads = policy_gradient(batch, params, 0.9, config)
        params.phi -= 1e-3 * grads["phi"]
        params.lam -= 1e-3 * grads["lam"]
        params.w -= 1e-3 * grads["w"]
        after = reinforce_loss(batch, params, 0.9, config)
        assert after < before

    def test_empty_batch_errors(self, config):
        params = PqcParams.init(1, 5, 3, np.random.default_rng(11))
        with pytest.raises(ValueError):
            policy_gradient([], params, 0.9, config)
        with pytest.raises(ValueError):
            policy_gradient([[]], params, 0.9, config)

    def test_non_contiguous_trajectory_rejected(self, config):
        params = PqcParams.init(1, 5, 3, np.random.default_rng(12))
        traj = make_batch(config, horizon=4)[0]
        broken = [traj[0], traj[2], traj[3]]
        with pytest.raises(ValueError):
            policy_gradient([broken], params, 0.9, config)

    def test_bad_gamma(self, config):
        params = PqcParams.init(1, 5, 3, np.random.default_rng(13))
        batch = make_batch(config, horizon=3)
        with pytest.raises(ValueError):
            policy_gradient(batch, params, 1.0, config)


class TestTrain:
    def test_deterministic_learning_curve(self, config):
        from spectrumrl.harness import RunRecorder

        def curve(seed):
            rec = RunRecorder(record_every=100, window=200)
            train(config, QuantumAgentConfig(n_layers=1), 600, seed, rec)
            return rec.csv_text()

        assert curve(3) == curve(3)
        assert curve(3) != curve(4)

    def test_reports_parameter_count(self, config):
        result = train(config, QuantumAgentConfig(n_layers=3), 300, 0)
        assert result.param_count == 78

    def test_update_cadence(self, config):
        agent = QuantumAgentConfig(n_layers=1, batch_episodes=2)
        result = train(config, agent, 1000, 1)
        # horizon 100, batch 2 episodes -> one update per 200 steps
        assert result.updates == 5


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path, config):
        params = PqcParams.init(3, 5, 3, np.random.default_rng(14), xi=1.7)
        path = tmp_path / "pqc.npz"
        save_pqc(path, params)
        loaded = load_pqc(path)
        assert np.array_equal(loaded.phi, params.phi)
        assert np.array_equal(loaded.lam, params.lam)
        assert np.array_equal(loaded.w, params.w)
        assert loaded.xi == params.xi


class TestObservables:
    def test_default_assignment_five_qubits(self):
        obs = default_observables(5, 3)
        assert [o.qubits for o in obs] == [(0, 1), (2, 3), (4,)]

    def test_masks_disjoint(self):
        obs = default_observables(5, 3)
        masks = [o.mask() for o in obs]
        assert masks == [0b00011, 0b01100, 0b10000]

    def test_too_few_qubits(self):
        with pytest.raises(ValueError):
            default_observables(2, 3)

    def test_empty_observable_rejected(self):
        with pytest.raises(ValueError):
            ActionObservable(0, ())
