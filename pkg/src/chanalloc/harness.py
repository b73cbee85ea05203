"""Experiment orchestration: config files, seeded runs, metrics, CSV emission.

Config files are flat ``key=value`` text (``#`` comments and blank lines
allowed). Every key has a default taken from the reference experiment
setup; unknown keys are errors. The same master seed drives user profiles,
environment draws, network init, action sampling, calibration and
evaluation through the documented streams in :mod:`chanalloc.seeding`.

Two unit modes: ``paper_literal`` keeps the configured demand range as-is
(a regime in which the satisfaction threshold never binds, see
``chanalloc calibrate``); ``calibrated`` (default) rescales demands once so
the sole-occupancy median of d/tau sits exactly on the dissatisfaction
threshold, making the QoS constraint active.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, replace

import numpy as np

from .agents import (
    A2cAgent,
    AgentHyper,
    DqnAgent,
    PpoAgent,
    RandomAgent,
    RolloutRunner,
    Trajectory,
    a3c_run,
)
from .env import ChannelAllocationEnv, EpisodeAccumulator, ScenarioConfig, decode_all
from .qos import QosProfile
from .radio import CalibrationReport, RadioConfig, calibration_report
from .seeding import AGENT_INIT, CALIBRATE, ENV, EVAL, PROFILE, SAMPLE, derive_rng
from .tinynet import dueling_merge, forward, load_checkpoint, save_checkpoint

ALGORITHMS = ("ppo", "a2c", "a3c", "dqn", "dueling_dqn", "random", "greedy_oracle")
UNIT_MODES = ("paper_literal", "calibrated")

METRIC_NAMES = ("total_reward", "average_rate_bps", "waste_count", "successful_steps", "complaints")


class ConfigError(ValueError):
    """Bad key, bad value or violated invariant in a config file."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


# key -> (parser, default). Scenario keys first, then experiment, then hyper.
CONFIG_KEYS = {
    "num_users": (int, 4),
    "num_channels": (int, 3),
    "bandwidth_hz": (float, 5e6),
    "noise_psd_w_per_hz": (float, 1e-13),  # -100 dBm per Hz
    "path_loss_exponent": (float, 2.0),
    "distance_low_m": (float, 5.0),
    "distance_high_m": (float, 50.0),
    "tx_power_low_w": (float, 0.5),
    "tx_power_high_w": (float, 2.0),
    "tolerable_delay_low_s": (float, 0.030),
    "tolerable_delay_high_s": (float, 0.070),
    "data_low_bits": (float, 1e7),
    "data_high_bits": (float, 3e7),
    "complaint_threshold_low": (int, 5),
    "complaint_threshold_high": (int, 10),
    "complaint_budget": (int, 5),
    "horizon": (int, 100),
    "waste_penalty": (float, 0.1),
    "complaint_penalty": (float, 2.0),
    "demand_resample": (str, "per_step"),
    "strict_no_empty_channels": (_parse_bool, False),
    "gain_ref_low": (float, 1e-8),
    "gain_ref_high": (float, 1.0),
    "seed": (int, 0),
    "algorithm": (str, "ppo"),
    "episodes": (int, 3000),
    "eval_episodes": (int, 100),
    "output_dir": (str, "results"),
    "unit_mode": (str, "calibrated"),
    "discount": (float, 0.99),
    "gae_lambda": (float, 0.95),
    "clip_epsilon": (float, 0.2),
    "actor_lr": (float, 3e-4),  # a2c/a3c fall back to 3e-3 (single-pass updates)
    "critic_lr": (float, 1e-3),
    "q_lr": (float, 1e-3),
    "entropy_coef": (float, 0.001),  # a2c/a3c fall back to 0.01
    "rollout_length": (int, 256),  # a2c/a3c fall back to 128
    "epochs": (int, 4),
    "minibatch_size": (int, 64),
    "replay_capacity": (int, 100_000),
    "batch_size": (int, 64),
    "target_sync_interval": (int, 1000),
    "train_frequency": (int, 4),
    "epsilon_start": (float, 1.0),
    "epsilon_end": (float, 0.05),
    "epsilon_decay_steps": (int, 20_000),
    "worker_count": (int, 3),
    "hidden_sizes": (_parse_int_tuple, (128, 128)),
    "max_grad_norm": (float, 2.0),
}

# a2c/a3c take single-pass full-batch steps, so they ship with shorter
# rollouts, a larger actor step and a stronger entropy bonus than ppo;
# explicit config keys always win over these fallbacks
A2C_DEFAULTS = {"rollout_length": 128, "actor_lr": 3e-3, "entropy_coef": 0.01}

_POSITIVE_INT_KEYS = ("num_users", "num_channels", "horizon", "episodes", "eval_episodes",
                      "complaint_threshold_low", "complaint_threshold_high")
_POSITIVE_FLOAT_KEYS = ("bandwidth_hz", "noise_psd_w_per_hz", "path_loss_exponent",
                        "distance_low_m", "tx_power_low_w", "tolerable_delay_low_s",
                        "gain_ref_low")
_RANGE_PAIRS = (
    ("distance_low_m", "distance_high_m"),
    ("tx_power_low_w", "tx_power_high_w"),
    ("tolerable_delay_low_s", "tolerable_delay_high_s"),
    ("data_low_bits", "data_high_bits"),
    ("complaint_threshold_low", "complaint_threshold_high"),
    ("gain_ref_low", "gain_ref_high"),
)


def _validate_values(values: dict) -> None:
    for key in _POSITIVE_INT_KEYS:
        if values[key] < 1:
            raise ConfigError(f"{key} must be >= 1, got {values[key]}")
    for key in _POSITIVE_FLOAT_KEYS:
        if values[key] <= 0:
            raise ConfigError(f"{key} must be > 0, got {values[key]}")
    for low_key, high_key in _RANGE_PAIRS:
        if values[high_key] < values[low_key]:
            raise ConfigError(f"{high_key} must be >= {low_key}")
    if values["data_low_bits"] < 0:
        raise ConfigError("data_low_bits must be >= 0")
    if values["complaint_budget"] < 0:
        raise ConfigError("complaint_budget must be >= 0")
    if values["waste_penalty"] < 0:
        raise ConfigError("waste_penalty must be >= 0")
    if values["seed"] < 0:
        raise ConfigError("seed must be >= 0")
    if values["algorithm"] not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {values['algorithm']!r}")
    if values["unit_mode"] not in UNIT_MODES:
        raise ConfigError(f"unit_mode must be one of {UNIT_MODES}, got {values['unit_mode']!r}")
    if values["demand_resample"] not in ("per_step", "per_episode"):
        raise ConfigError("demand_resample must be per_step or per_episode")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig  # paper-literal demand units; see resolve_scenario
    algorithm: str
    hyper: AgentHyper
    episodes: int
    eval_episodes: int
    output_dir: str
    unit_mode: str

    @property
    def seed(self) -> int:
        return self.scenario.seed


def build_scenario(values: dict) -> ScenarioConfig:
    """Sample the per-user profile from the master seed and assemble the world.

    Draw order from the profile stream: distances, powers, tolerable delays,
    complaint thresholds (thresholds inclusive on both bounds).
    """
    n = values["num_users"]
    rng = derive_rng(values["seed"], PROFILE)
    distance = rng.uniform(values["distance_low_m"], values["distance_high_m"], size=n)
    power = rng.uniform(values["tx_power_low_w"], values["tx_power_high_w"], size=n)
    tau = rng.uniform(values["tolerable_delay_low_s"], values["tolerable_delay_high_s"], size=n)
    thresholds = rng.integers(values["complaint_threshold_low"],
                              values["complaint_threshold_high"] + 1, size=n)
    radio = RadioConfig(
        bandwidth_hz=values["bandwidth_hz"],
        noise_psd_w_per_hz=values["noise_psd_w_per_hz"],
        path_loss_exponent=values["path_loss_exponent"],
        num_users=n,
        num_channels=values["num_channels"],
        tx_power_w=power,
        distance_m=distance,
    )
    profile = QosProfile(
        tolerable_delay_s=tau,
        complaint_threshold=thresholds,
        complaint_budget=values["complaint_budget"],
    )
    return ScenarioConfig(
        radio=radio,
        qos=profile,
        data_bits_range=(values["data_low_bits"], values["data_high_bits"]),
        horizon=values["horizon"],
        waste_penalty=values["waste_penalty"],
        complaint_penalty=values["complaint_penalty"],
        seed=values["seed"],
        demand_resample=values["demand_resample"],
        strict_no_empty_channels=values["strict_no_empty_channels"],
        gain_ref_low=values["gain_ref_low"],
        gain_ref_high=values["gain_ref_high"],
    )


def config_from_values(values: dict, explicit: set[str] | None = None) -> ExperimentConfig:
    _validate_values(values)
    explicit = explicit or set()
    resolved = dict(values)
    if values["algorithm"] in ("a2c", "a3c"):
        for key, fallback in A2C_DEFAULTS.items():
            if key not in explicit:
                resolved[key] = fallback
    try:
        hyper = AgentHyper(
            discount=resolved["discount"],
            gae_lambda=resolved["gae_lambda"],
            clip_epsilon=resolved["clip_epsilon"],
            actor_lr=resolved["actor_lr"],
            critic_lr=resolved["critic_lr"],
            q_lr=resolved["q_lr"],
            entropy_coef=resolved["entropy_coef"],
            rollout_length=resolved["rollout_length"],
            epochs=resolved["epochs"],
            minibatch_size=resolved["minibatch_size"],
            replay_capacity=resolved["replay_capacity"],
            batch_size=resolved["batch_size"],
            target_sync_interval=resolved["target_sync_interval"],
            train_frequency=resolved["train_frequency"],
            epsilon_start=resolved["epsilon_start"],
            epsilon_end=resolved["epsilon_end"],
            epsilon_decay_steps=resolved["epsilon_decay_steps"],
            worker_count=resolved["worker_count"],
            hidden_sizes=tuple(resolved["hidden_sizes"]),
            max_grad_norm=resolved["max_grad_norm"],
        )
        scenario = build_scenario(values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(
        scenario=scenario,
        algorithm=values["algorithm"],
        hyper=hyper,
        episodes=values["episodes"],
        eval_episodes=values["eval_episodes"],
        output_dir=values["output_dir"],
        unit_mode=values["unit_mode"],
    )


def load_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a flat key=value file; defaults apply first, then the file,
    then any overrides (parsed with the same key table)."""
    values = {key: default for key, (_, default) in CONFIG_KEYS.items()}
    explicit: set[str] = set()
    if path is not None:
        with open(path) as fh:
            lines = fh.readlines()
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            parser = CONFIG_KEYS[key][0]
            try:
                values[key] = parser(text)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
            explicit.add(key)
    for key, text in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"override: unknown key {key!r}")
        parser = CONFIG_KEYS[key][0]
        values[key] = parser(text) if isinstance(text, str) else text
        explicit.add(key)
    return config_from_values(values, explicit)


@dataclass(frozen=True)
class CalibrationInfo:
    unit_mode: str
    demand_scale: float  # multiplier applied to the configured demand range
    base_report: CalibrationReport  # report on the unscaled scenario


def resolve_scenario(exp: ExperimentConfig) -> tuple[ScenarioConfig, CalibrationInfo]:
    """Apply the unit mode; in calibrated mode demands are rescaled so the
    sole-occupancy median of d/tau equals the dissatisfaction threshold."""
    base = exp.scenario
    rng = derive_rng(exp.seed, CALIBRATE)
    report = calibration_report(base.radio, base.qos.tolerable_delay_s, base.data_bits_range, rng)
    if exp.unit_mode == "paper_literal":
        return base, CalibrationInfo(exp.unit_mode, 1.0, report)
    scale = report.threshold_ratio / report.ratio_median
    low, high = base.data_bits_range
    scenario = replace(base, data_bits_range=(low * scale, high * scale))
    return scenario, CalibrationInfo(exp.unit_mode, scale, report)


@dataclass(frozen=True)
class MetricsRecord:
    episode: int
    total_reward: float
    average_rate_bps: float
    waste_count: int
    successful_steps: int
    complaints: int

    @classmethod
    def from_accumulator(cls, episode: int, acc: EpisodeAccumulator) -> "MetricsRecord":
        return cls(
            episode=episode,
            total_reward=acc.total_reward,
            average_rate_bps=acc.average_rate_bps,
            waste_count=acc.waste_count,
            successful_steps=acc.successful_steps,
            complaints=acc.complaints,
        )


class ActorPolicy:
    """Exploit-mode policy around a trained actor network."""

    def __init__(self, actor):
        self.actor = actor

    def act(self, obs, explore: bool = False) -> int:
        logits, _ = forward(self.actor, obs)
        return int(np.argmax(logits))


class QnetPolicy:
    """Exploit-mode policy around a trained Q-network."""

    def __init__(self, qnet, dueling: bool):
        self.qnet = qnet
        self.dueling = dueling

    def act(self, obs, explore: bool = False) -> int:
        raw, _ = forward(self.qnet, obs)
        q = dueling_merge(raw) if self.dueling else raw
        return int(np.argmax(q))


def step_reward_table(env: ChannelAllocationEnv, alloc_table: np.ndarray | None = None) -> np.ndarray:
    """Instantaneous reward of every action from the env's current state.

    Vectorized enumeration over the whole action space, mirroring the
    environment's per-step reward (mean satisfaction, waste and complaint
    penalties, terminal budget penalty).
    """
    cfg = env.config
    st = env.state
    if st is None or st.done:
        raise ValueError("environment has no live episode")
    n_users, n_chan = cfg.num_users, cfg.num_channels
    table = alloc_table if alloc_table is not None else decode_all(n_users, n_chan)

    p = cfg.radio.tx_power_w
    h = st.realization.gain  # (N, M)
    demand = st.demand_bits
    tau = cfg.qos.tolerable_delay_s
    counts = st.qos_state.dissat_count
    thresholds = cfg.qos.complaint_threshold
    level = cfg.qos.dissatisfaction_level

    loads = np.zeros((table.shape[0], n_chan))
    for m in range(1, n_chan + 1):
        loads[:, m - 1] = ((table == m) * p[None, :]).sum(axis=1)

    allocated = table > 0
    ch = np.clip(table - 1, 0, n_chan - 1)
    h_sel = h[np.arange(n_users)[None, :], ch]
    load_sel = np.take_along_axis(loads, ch, axis=1)
    # an allocated user is part of its own channel load, so interference >= 0;
    # unallocated entries are masked out below and zeroed here to keep log2 clean
    interference = np.where(allocated, (load_sel - p[None, :]) * h_sel, 0.0)
    sinr = np.where(allocated, p[None, :] * h_sel, 0.0) / (interference + cfg.radio.noise_power_w)
    rate = cfg.radio.bandwidth_hz * np.log2(1.0 + sinr)
    rate_safe = np.where(allocated & (rate > 0), rate, 1.0)
    sat = np.where(allocated, np.exp(-demand[None, :] / (rate_safe * tau[None, :])) - 1.0, level)

    dissatisfied = sat <= level
    complained = dissatisfied & (((counts + 1)[None, :] % thresholds[None, :]) == 0)
    new_complaints = complained.sum(axis=1)
    empty = (loads == 0.0).sum(axis=1)
    budget = cfg.qos.complaint_budget
    crossed = (st.complaints_running < budget) & (st.complaints_running + new_complaints >= budget)

    reward = sat.mean(axis=1)
    reward -= cfg.waste_penalty * empty
    reward -= cfg.complaint_penalty * new_complaints
    reward -= (cfg.horizon - st.t) * crossed
    return reward


class GreedyOracle:
    """Myopic baseline: exhaustively picks the best single-step action."""

    def __init__(self, env: ChannelAllocationEnv | None = None):
        self.env = None
        self._table = None
        if env is not None:
            self.attach(env)

    def attach(self, env: ChannelAllocationEnv) -> None:
        self.env = env
        self._table = decode_all(env.config.num_users, env.config.num_channels)

    def act(self, obs=None, explore: bool = False) -> int:
        if self.env is None:
            raise ValueError("greedy oracle must be attached to an environment")
        return int(np.argmax(step_reward_table(self.env, self._table)))


@dataclass
class TrainingRun:
    records: list[MetricsRecord]
    policy: object  # exposes act(obs, explore=False)
    scenario: ScenarioConfig
    calibration: CalibrationInfo
    agent: object | None = None


def _episode_loop(env, act, episodes: int) -> list[MetricsRecord]:
    """Plain per-episode rollout for policies that do not learn on-policy."""
    records = []
    for episode in range(episodes):
        obs = env.reset()
        acc = EpisodeAccumulator()
        done = False
        while not done:
            result = env.step(act(obs))
            acc.add(result)
            obs = result.observation
            done = result.done
        records.append(MetricsRecord.from_accumulator(episode, acc))
    return records


def _train_onpolicy(exp: ExperimentConfig, scenario: ScenarioConfig, agent_cls):
    seed = exp.seed
    env = ChannelAllocationEnv(scenario, rng=derive_rng(seed, ENV, 0))
    sample_rng = derive_rng(seed, SAMPLE, 0)
    agent = agent_cls(scenario.observation_size, scenario.num_actions, exp.hyper,
                      derive_rng(seed, AGENT_INIT), sample_rng)
    runner = RolloutRunner(env, sample_rng)
    records: list[MetricsRecord] = []

    def on_episode(acc):
        if len(records) < exp.episodes:
            records.append(MetricsRecord.from_accumulator(len(records), acc))

    while len(records) < exp.episodes:
        traj = Trajectory()
        bootstrap = runner.collect(agent.actor, agent.critic, exp.hyper.rollout_length, traj, on_episode)
        agent.update(traj, bootstrap)
    return records, agent


def _train_dqn(exp: ExperimentConfig, scenario: ScenarioConfig, dueling: bool):
    seed = exp.seed
    env = ChannelAllocationEnv(scenario, rng=derive_rng(seed, ENV, 0))
    agent = DqnAgent(scenario.observation_size, scenario.num_actions, exp.hyper,
                     derive_rng(seed, AGENT_INIT), derive_rng(seed, SAMPLE, 0), dueling=dueling)
    records = []
    for episode in range(exp.episodes):
        obs = env.reset()
        acc = EpisodeAccumulator()
        done = False
        while not done:
            action = agent.act(obs, explore=True)
            result = env.step(action)
            agent.observe(obs, action, result.reward, result.observation, result.done)
            acc.add(result)
            obs = result.observation
            done = result.done
        records.append(MetricsRecord.from_accumulator(episode, acc))
    return records, agent


def run_training(exp: ExperimentConfig) -> TrainingRun:
    """Train the configured algorithm; one MetricsRecord per episode.

    Fully deterministic for single-threaded algorithms under the same
    (config, seed); a3c interleaves worker episodes in completion order.
    """
    scenario, calibration = resolve_scenario(exp)
    seed = exp.seed
    if exp.algorithm == "random":
        agent = RandomAgent(scenario.num_actions, derive_rng(seed, SAMPLE, 0))
        env = ChannelAllocationEnv(scenario, rng=derive_rng(seed, ENV, 0))
        records = _episode_loop(env, lambda obs: agent.act(obs), exp.episodes)
        return TrainingRun(records, agent, scenario, calibration, agent)
    if exp.algorithm == "greedy_oracle":
        env = ChannelAllocationEnv(scenario, rng=derive_rng(seed, ENV, 0))
        oracle = GreedyOracle(env)
        records = _episode_loop(env, lambda obs: oracle.act(obs), exp.episodes)
        return TrainingRun(records, GreedyOracle(), scenario, calibration, oracle)
    if exp.algorithm in ("ppo", "a2c"):
        agent_cls = PpoAgent if exp.algorithm == "ppo" else A2cAgent
        records, agent = _train_onpolicy(exp, scenario, agent_cls)
        return TrainingRun(records, agent, scenario, calibration, agent)
    if exp.algorithm in ("dqn", "dueling_dqn"):
        records, agent = _train_dqn(exp, scenario, dueling=exp.algorithm == "dueling_dqn")
        return TrainingRun(records, agent, scenario, calibration, agent)
    if exp.algorithm == "a3c":
        result = a3c_run(scenario, exp.hyper, seed, exp.episodes)
        records = [
            MetricsRecord(i, e.total_reward, e.average_rate_bps, e.waste_count,
                          e.successful_steps, e.complaints)
            for i, e in enumerate(result.episodes)
        ]
        return TrainingRun(records, ActorPolicy(result.actor), scenario, calibration, result)
    raise ConfigError(f"unknown algorithm {exp.algorithm!r}")


@dataclass
class EvalSummary:
    records: list[MetricsRecord]
    metrics: dict[str, tuple[float, float]]  # name -> (mean, std)


def evaluate(policy, scenario: ScenarioConfig, eval_episodes: int, seed: int) -> EvalSummary:
    """Exploit-mode rollouts on a dedicated evaluation stream."""
    env = ChannelAllocationEnv(scenario, rng=derive_rng(seed, EVAL))
    if hasattr(policy, "attach"):
        policy.attach(env)
    records = _episode_loop(env, lambda obs: policy.act(obs, explore=False), eval_episodes)
    metrics = {}
    for name in METRIC_NAMES:
        values = np.asarray([getattr(r, name) for r in records], dtype=float)
        metrics[name] = (float(values.mean()), float(values.std()))
    return EvalSummary(records, metrics)


def moving_average(values, window: int) -> list[float]:
    """Trailing mean over ``window`` entries, partial at the start."""
    out = []
    for i in range(len(values)):
        lo = max(0, i - window + 1)
        out.append(float(np.mean(values[lo : i + 1])))
    return out


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def emit_results(records: list[MetricsRecord], summary: EvalSummary | None, output_dir,
                 reward_window: int = 200) -> None:
    """Write episodes.csv, summary.csv and reward_curve.csv.

    Column orders are fixed: episodes.csv carries
    episode,total_reward,average_rate_bps,waste_count,successful_steps,complaints;
    reward_curve.csv carries episode,reward,moving_average (trailing window,
    partial at the start). Re-running on the same inputs is byte-identical.
    """
    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, "episodes.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["episode", *METRIC_NAMES])
        for r in records:
            writer.writerow([r.episode, _fmt(r.total_reward), _fmt(r.average_rate_bps),
                             r.waste_count, r.successful_steps, r.complaints])
    if summary is not None:
        with open(os.path.join(output_dir, "summary.csv"), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric", "mean", "std"])
            for name in METRIC_NAMES:
                mean, std = summary.metrics[name]
                writer.writerow([name, _fmt(mean), _fmt(std)])
    rewards = [r.total_reward for r in records]
    averaged = moving_average(rewards, reward_window)
    with open(os.path.join(output_dir, "reward_curve.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["episode", "reward", "moving_average"])
        for r, avg in zip(records, averaged):
            writer.writerow([r.episode, _fmt(r.total_reward), _fmt(avg)])


def save_run(run: TrainingRun, exp: ExperimentConfig, output_dir) -> None:
    """Persist checkpoints plus a manifest describing how they were produced."""
    os.makedirs(output_dir, exist_ok=True)
    networks = {}
    agent = run.agent
    if exp.algorithm in ("ppo", "a2c"):
        save_checkpoint(agent.actor, os.path.join(output_dir, "actor.mlp"))
        save_checkpoint(agent.critic, os.path.join(output_dir, "critic.mlp"))
        networks = {"actor": "actor.mlp", "critic": "critic.mlp"}
    elif exp.algorithm == "a3c":
        save_checkpoint(agent.actor, os.path.join(output_dir, "actor.mlp"))
        save_checkpoint(agent.critic, os.path.join(output_dir, "critic.mlp"))
        networks = {"actor": "actor.mlp", "critic": "critic.mlp"}
    elif exp.algorithm in ("dqn", "dueling_dqn"):
        save_checkpoint(agent.qnet, os.path.join(output_dir, "qnet.mlp"))
        networks = {"qnet": "qnet.mlp"}
    manifest = {
        "algorithm": exp.algorithm,
        "seed": exp.seed,
        "episodes": len(run.records),
        "unit_mode": run.calibration.unit_mode,
        "demand_scale": run.calibration.demand_scale,
        "hyper": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(exp.hyper).items()},
        "networks": networks,
    }
    with open(os.path.join(output_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_policy(checkpoint: str, scenario: ScenarioConfig):
    """Rebuild an exploit policy from a manifest path or its directory."""
    manifest_path = checkpoint
    if os.path.isdir(checkpoint):
        manifest_path = os.path.join(checkpoint, "manifest.json")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = os.path.dirname(manifest_path)
    algorithm = manifest["algorithm"]
    if algorithm in ("ppo", "a2c", "a3c"):
        actor = load_checkpoint(os.path.join(base, manifest["networks"]["actor"]))
        return ActorPolicy(actor)
    if algorithm in ("dqn", "dueling_dqn"):
        qnet = load_checkpoint(os.path.join(base, manifest["networks"]["qnet"]))
        return QnetPolicy(qnet, dueling=algorithm == "dueling_dqn")
    if algorithm == "random":
        return RandomAgent(scenario.num_actions, derive_rng(manifest["seed"], SAMPLE, 0))
    if algorithm == "greedy_oracle":
        return GreedyOracle()
    raise ConfigError(f"cannot rebuild a policy for algorithm {algorithm!r}")
