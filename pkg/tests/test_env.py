import numpy as np
import pytest

from chanalloc.env import (
    ChannelAllocationEnv,
    EpisodeFinishedError,
    InvalidActionError,
    TraceRecorder,
    decode_action,
    decode_all,
    encode_action,
    observation_of,
    trace_columns,
)
from chanalloc.qos import total_complaints
from conftest import make_scenario


class TestActionCodec:
    def test_zero_index_is_all_local(self):
        assert np.array_equal(decode_action(0, 4, 3), np.zeros(4, dtype=int))

    def test_max_index(self):
        assert np.array_equal(decode_action(15, 2, 3), [3, 3])

    def test_mixed_radix_example(self):
        # 9 = 1 + 2*4
        assert np.array_equal(decode_action(9, 2, 3), [1, 2])

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidActionError):
            decode_action(-1, 2, 3)
        with pytest.raises(InvalidActionError):
            decode_action(16, 2, 3)

    @pytest.mark.parametrize("num_users", [1, 2, 3, 4, 5, 6, 7])
    def test_bijection_exhaustive(self, num_users):
        for index in range((3 + 1) ** num_users):
            channels = decode_action(index, num_users, 3)
            assert np.all((channels >= 0) & (channels <= 3))
            assert encode_action(channels, 3) == index

    def test_decode_all_matches_scalar_decode(self):
        table = decode_all(3, 3)
        for index in range(table.shape[0]):
            assert np.array_equal(table[index], decode_action(index, 3, 3))

    def test_bad_channel_encode_rejected(self):
        with pytest.raises(InvalidActionError):
            encode_action([0, 4], 3)


class TestReset:
    def test_determinism(self):
        scenario = make_scenario(num_users=4, seed=5)
        first = ChannelAllocationEnv(scenario).reset()
        second = ChannelAllocationEnv(scenario).reset()
        assert np.array_equal(first, second)

    def test_observation_shape(self):
        scenario = make_scenario(num_users=4, num_channels=3)
        obs = ChannelAllocationEnv(scenario).reset()
        assert obs.shape == (4 * 6,)

    def test_fresh_state(self):
        scenario = make_scenario(num_users=3)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        assert env.total_complaints() == 0
        assert np.all(env.state.qos_state.satisfaction_last == 0.0)
        assert env.state.t == 0 and not env.state.done


class TestObservation:
    def test_demand_at_range_max_normalizes_to_one(self):
        scenario = make_scenario(num_users=2, data_range=(2e6, 2e6))
        env = ChannelAllocationEnv(scenario)
        obs = env.reset()
        stride = 3 + scenario.num_channels
        assert obs[0] == 1.0 and obs[stride] == 1.0

    def test_dissatisfaction_at_threshold_normalizes_to_one(self):
        scenario = make_scenario(num_users=2, thresholds=np.array([4, 4]))
        env = ChannelAllocationEnv(scenario)
        env.reset()
        env.state.qos_state.dissat_count[0] = 4
        obs = observation_of(env.state, scenario)
        assert obs[1] == 1.0

    def test_gain_at_lower_reference_maps_to_zero(self):
        scenario = make_scenario(num_users=1, num_channels=1, gain_ref_low=1e-6, gain_ref_high=1.0)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        env.state.realization.gain.setflags(write=True)
        env.state.realization.gain[0, 0] = 1e-6
        obs = observation_of(env.state, scenario)
        assert obs[3] == pytest.approx(0.0, abs=1e-12)

    def test_power_normalized_by_max(self):
        scenario = make_scenario(num_users=2, powers=np.array([1.0, 2.0]))
        obs = ChannelAllocationEnv(scenario).reset()
        stride = 3 + scenario.num_channels
        assert obs[2] == 0.5 and obs[stride + 2] == 1.0

    def test_components_finite(self):
        scenario = make_scenario(num_users=4)
        env = ChannelAllocationEnv(scenario)
        obs = env.reset()
        for _ in range(30):
            assert np.all(np.isfinite(obs))
            result = env.step(int(np.random.default_rng(0).integers(scenario.num_actions)))
            obs = result.observation
            if result.done:
                obs = env.reset()


class TestStep:
    def test_zero_demand_sole_occupancy(self):
        # two users on distinct channels, no data: satisfaction 0 each,
        # reward is just the idle-channel penalty
        scenario = make_scenario(num_users=2, num_channels=3, data_range=(0.0, 0.0))
        env = ChannelAllocationEnv(scenario)
        env.reset()
        result = env.step(encode_action([1, 2], 3))
        assert result.info.empty_channels == 1
        assert np.all(result.info.per_user_satisfaction == 0.0)
        assert result.reward == pytest.approx(-scenario.waste_penalty, abs=1e-15)

    def test_all_local_action(self):
        scenario = make_scenario(num_users=2, num_channels=3, thresholds=np.array([9, 9]))
        env = ChannelAllocationEnv(scenario)
        env.reset()
        result = env.step(0)
        # mean of two -0.5 terms, all channels idle, no complaint yet (K=9)
        assert result.info.new_complaints == 0
        assert result.reward == pytest.approx(-0.5 - 3 * scenario.waste_penalty, abs=1e-15)

    def test_budget_violation_penalty_and_done(self):
        # K=1 for both users: every local step yields two complaints
        scenario = make_scenario(num_users=2, num_channels=3, thresholds=np.array([1, 1]),
                                 budget=3, horizon=50)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        first = env.step(0)
        assert first.info.new_complaints == 2 and not first.done
        second = env.step(0)
        # crossing at t=1: -(horizon - 1) on top of the usual terms
        expected = -0.5 - 3 * scenario.waste_penalty - 2 * scenario.complaint_penalty - (50 - 1)
        assert second.reward == pytest.approx(expected, abs=1e-12)
        assert second.done and second.info.violated_budget

    def test_stepping_finished_episode_raises(self):
        scenario = make_scenario(num_users=2, horizon=1)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        result = env.step(0)
        assert result.done
        with pytest.raises(EpisodeFinishedError):
            env.step(0)

    def test_step_before_reset_raises(self):
        env = ChannelAllocationEnv(make_scenario())
        with pytest.raises(EpisodeFinishedError):
            env.step(0)

    def test_reward_bound_without_complaints(self, rng):
        scenario = make_scenario(num_users=3, num_channels=3, thresholds=np.array([30, 30, 30]),
                                 budget=50)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        lower = -1.0 - scenario.num_channels * scenario.waste_penalty
        for _ in range(200):
            result = env.step(int(rng.integers(scenario.num_actions)))
            if result.info.new_complaints == 0 and not result.info.violated_budget:
                assert lower <= result.reward <= 0.0
            if result.done:
                env.reset()

    def test_complaint_accounting_matches_qos_totals(self, rng):
        scenario = make_scenario(num_users=3, thresholds=np.array([2, 3, 4]), budget=6)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        total = 0
        done = False
        while not done:
            result = env.step(int(rng.integers(scenario.num_actions)))
            total += result.info.new_complaints
            done = result.done
        assert total == env.state.complaints_running
        assert total == total_complaints(env.state.qos_state, scenario.qos)

    def test_gamma_monotone_and_done_absorbing(self, rng):
        scenario = make_scenario(num_users=3, budget=4)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        last = 0
        done = False
        while not done:
            result = env.step(int(rng.integers(scenario.num_actions)))
            assert env.state.complaints_running >= last
            last = env.state.complaints_running
            done = result.done
        assert env.state.done

    def test_demand_modes(self):
        per_step = make_scenario(num_users=2, seed=3, data_range=(1e5, 9e6))
        env = ChannelAllocationEnv(per_step)
        env.reset()
        d0 = env.state.demand_bits.copy()
        env.step(encode_action([1, 2], 3))
        assert not np.array_equal(d0, env.state.demand_bits)

        per_episode = make_scenario(num_users=2, seed=3, data_range=(1e5, 9e6),
                                    demand_resample="per_episode")
        env = ChannelAllocationEnv(per_episode)
        env.reset()
        d0 = env.state.demand_bits.copy()
        for _ in range(5):
            env.step(encode_action([1, 2], 3))
            assert np.array_equal(d0, env.state.demand_bits)


class TestStrictMode:
    def test_mask_marks_full_coverage_actions(self):
        scenario = make_scenario(num_users=3, num_channels=2)
        env = ChannelAllocationEnv(scenario)
        mask = env.action_mask()
        table = decode_all(3, 2)
        for index in range(table.shape[0]):
            covers = all((table[index] == m).any() for m in (1, 2))
            assert mask[index] == covers

    def test_strict_step_rejects_idle_channels(self):
        scenario = make_scenario(num_users=3, num_channels=2, strict_no_empty_channels=True)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        with pytest.raises(InvalidActionError):
            env.step(0)
        env.step(encode_action([1, 2, 1], 2))  # full coverage passes


class TestTrace:
    def test_columns_and_rows(self, tmp_path):
        scenario = make_scenario(num_users=2)
        env = ChannelAllocationEnv(scenario)
        env.reset()
        recorder = TraceRecorder(2)
        for t in range(3):
            result = env.step(encode_action([1, 2], 3))
            recorder.record(0, t, encode_action([1, 2], 3), result, env.state.complaints_running)
            if result.done:
                break
        path = tmp_path / "trace.csv"
        recorder.save(path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(trace_columns(2))
        assert lines[0].split(",")[:6] == ["episode", "t", "action_index", "reward", "gamma", "empty_channels"]
        assert len(lines) == 1 + len(recorder.rows)
        assert len(lines[1].split(",")) == len(trace_columns(2))
