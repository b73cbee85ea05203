"""Slow training invariants: learning beats random, and the scenario sweep
runs clean for every algorithm in both unit modes."""

import numpy as np
import pytest

from chanalloc.harness import load_config, run_training

SMOKE_EPISODES = 500

# 500 episodes is ~6k environment steps; the smoke hypers shorten schedules
# accordingly (the scenario itself stays at the N=4, M=3 reference setup).
SMOKE_OVERRIDES = {
    "ppo": {"rollout_length": "128", "minibatch_size": "64"},
    "a2c": {},
    "a3c": {},
    "dqn": {"train_frequency": "1", "epsilon_decay_steps": "3000"},
    "dueling_dqn": {"train_frequency": "1", "epsilon_decay_steps": "3000"},
}


def final100(records):
    return float(np.mean([r.total_reward for r in records[-100:]]))


@pytest.fixture(scope="module")
def random_baseline():
    exp = load_config(None, {"algorithm": "random", "episodes": SMOKE_EPISODES, "seed": 0})
    return final100(run_training(exp).records)


@pytest.mark.parametrize("algorithm", ["ppo", "a2c", "a3c", "dqn", "dueling_dqn"])
def test_agent_improves_over_random(algorithm, random_baseline):
    overrides = {"algorithm": algorithm, "episodes": SMOKE_EPISODES, "seed": 0}
    overrides.update(SMOKE_OVERRIDES[algorithm])
    run = run_training(load_config(None, overrides))
    trained = final100(run.records)
    assert trained > random_baseline, (
        f"{algorithm} final-100 mean {trained:.2f} does not beat random {random_baseline:.2f}")


@pytest.mark.parametrize("unit_mode", ["paper_literal", "calibrated"])
@pytest.mark.parametrize("num_users", [4, 5, 6, 7])
@pytest.mark.parametrize(
    "algorithm", ["ppo", "a2c", "a3c", "dqn", "dueling_dqn", "random", "greedy_oracle"])
def test_scenario_sweep_runs_clean(algorithm, num_users, unit_mode):
    overrides = {
        "algorithm": algorithm,
        "num_users": str(num_users),
        "unit_mode": unit_mode,
        "episodes": 5,
        "seed": 0,
        "hidden_sizes": "16,16",
        "rollout_length": "32",
        "minibatch_size": "16",
        "batch_size": "16",
        "train_frequency": "1",
    }
    run = run_training(load_config(None, overrides))
    assert len(run.records) == 5
    assert all(np.isfinite(r.total_reward) for r in run.records)
