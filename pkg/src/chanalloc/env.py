"""Episodic channel-allocation MDP.

State per step: per-user demand, dissatisfaction count, transmit power and
per-channel gains, flattened user-major into one observation vector of
length N * (3 + M). The action is a single integer in [0, (M+1)**N) that
encodes one channel choice (or none) per user in mixed radix. The reward is
the across-users mean satisfaction minus penalties for idle channels and
fresh complaints, with a large terminal penalty of -(horizon - t) when the
complaint budget is exhausted at step t.

Observation layout, per user n (all components finite):

    [demand/demand_high, dissat/threshold, power/power_max,
     gain_1, ..., gain_M]

where each gain component is log10-mapped and affinely scaled so that the
configured reference bounds land on 0 and 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .qos import QosProfile, QosState, satisfaction, total_complaints, update_dissatisfaction
from .radio import Allocation, ChannelRealization, RadioConfig, sample_channel_realization, transmission_rate

DEMAND_PER_STEP = "per_step"
DEMAND_PER_EPISODE = "per_episode"


class EpisodeFinishedError(RuntimeError):
    """step() called on an episode that already terminated."""


class InvalidActionError(ValueError):
    """Action index out of range, or masked out in strict mode."""


def decode_action(index: int, num_users: int, num_channels: int) -> np.ndarray:
    """Decode a flat action index into one channel id per user.

    Little-endian mixed radix, base (M+1): user n's channel is
    ``(index // (M+1)**n) % (M+1)``; 0 means no channel.
    """
    base = num_channels + 1
    count = base**num_users
    if not 0 <= index < count:
        raise InvalidActionError(f"action index {index} outside [0, {count})")
    out = np.empty(num_users, dtype=np.int64)
    rest = int(index)
    for n in range(num_users):
        rest, out[n] = divmod(rest, base)
    return out


def encode_action(channel_of, num_channels: int) -> int:
    """Inverse of decode_action."""
    base = num_channels + 1
    index = 0
    for n, c in reversed(list(enumerate(np.asarray(channel_of, dtype=np.int64)))):
        if not 0 <= c <= num_channels:
            raise InvalidActionError(f"channel id {c} for user {n} outside [0, {num_channels}]")
        index = index * base + int(c)
    return index


def decode_all(num_users: int, num_channels: int) -> np.ndarray:
    """All allocations as one (A, N) table, row i = decode_action(i)."""
    base = num_channels + 1
    indices = np.arange(base**num_users, dtype=np.int64)
    table = np.empty((indices.size, num_users), dtype=np.int64)
    for n in range(num_users):
        table[:, n] = (indices // base**n) % base
    return table


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything that defines one experiment's world."""

    radio: RadioConfig
    qos: QosProfile
    data_bits_range: tuple[float, float]  # demand sampling bounds, bits
    horizon: int = 100
    waste_penalty: float = 0.1  # per idle channel per step
    complaint_penalty: float = 2.0  # per fresh complaint
    seed: int = 0
    demand_resample: str = DEMAND_PER_STEP
    strict_no_empty_channels: bool = False
    gain_ref_low: float = 1e-8  # observation scaling: gain mapped to 0
    gain_ref_high: float = 1.0  # observation scaling: gain mapped to 1

    def __post_init__(self):
        low, high = self.data_bits_range
        if not 0 <= low <= high:
            raise ValueError("data_bits_range must satisfy 0 <= low <= high")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.waste_penalty < 0:
            raise ValueError("waste_penalty must be >= 0")
        if self.demand_resample not in (DEMAND_PER_STEP, DEMAND_PER_EPISODE):
            raise ValueError(f"unknown demand_resample mode {self.demand_resample!r}")
        if not 0 < self.gain_ref_low < self.gain_ref_high:
            raise ValueError("gain reference bounds must satisfy 0 < low < high")
        if self.qos.num_users != self.radio.num_users:
            raise ValueError("radio and qos disagree on the number of users")

    @property
    def num_users(self) -> int:
        return self.radio.num_users

    @property
    def num_channels(self) -> int:
        return self.radio.num_channels

    @property
    def num_actions(self) -> int:
        return (self.num_channels + 1) ** self.num_users

    @property
    def observation_size(self) -> int:
        return self.num_users * (3 + self.num_channels)


@dataclass
class EpisodeState:
    t: int
    demand_bits: np.ndarray  # (N,)
    realization: ChannelRealization
    qos_state: QosState
    done: bool
    complaints_running: int  # cached total_complaints(qos_state)


@dataclass(frozen=True)
class StepInfo:
    per_user_satisfaction: np.ndarray
    per_user_rate: np.ndarray  # bits/s, 0 for unallocated users
    new_complaints: int
    empty_channels: int
    violated_budget: bool


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    info: StepInfo


def observation_of(state: EpisodeState, config: ScenarioConfig) -> np.ndarray:
    """Flatten the episode state into the normalized observation vector."""
    n_users, n_chan = config.num_users, config.num_channels
    obs = np.empty(config.observation_size, dtype=float)
    lo = math.log10(config.gain_ref_low)
    span = math.log10(config.gain_ref_high) - lo
    power_max = float(config.radio.tx_power_w.max())
    demand_high = config.data_bits_range[1]
    stride = 3 + n_chan
    for n in range(n_users):
        k = n * stride
        obs[k] = state.demand_bits[n] / demand_high if demand_high > 0 else 0.0
        obs[k + 1] = state.qos_state.dissat_count[n] / config.qos.complaint_threshold[n]
        obs[k + 2] = config.radio.tx_power_w[n] / power_max
        obs[k + 3 : k + 3 + n_chan] = (np.log10(state.realization.gain[n]) - lo) / span
    return obs


class ChannelAllocationEnv:
    """Single-owner environment instance; not shareable across workers.

    Construct one per worker with its own generator. Two instances built
    from the same (config, rng seed) produce bit-identical trajectories for
    the same action sequence.
    """

    def __init__(self, config: ScenarioConfig, rng: np.random.Generator | None = None):
        self.config = config
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.state: EpisodeState | None = None
        self._mask: np.ndarray | None = None

    def reset(self) -> np.ndarray:
        """Start a fresh episode; demands then fading are drawn, in that order."""
        demand = self.rng.uniform(*self.config.data_bits_range, size=self.config.num_users)
        realization = sample_channel_realization(self.config.radio, self.rng)
        self.state = EpisodeState(
            t=0,
            demand_bits=demand,
            realization=realization,
            qos_state=QosState.fresh(self.config.num_users),
            done=False,
            complaints_running=0,
        )
        return observation_of(self.state, self.config)

    def action_mask(self) -> np.ndarray:
        """Boolean mask over action indices that leave no channel idle."""
        if self._mask is None:
            table = decode_all(self.config.num_users, self.config.num_channels)
            mask = np.ones(table.shape[0], dtype=bool)
            for m in range(1, self.config.num_channels + 1):
                mask &= (table == m).any(axis=1)
            self._mask = mask
        return self._mask

    def step(self, action_index: int) -> StepResult:
        state = self.state
        cfg = self.config
        if state is None:
            raise EpisodeFinishedError("reset() must be called before step()")
        if state.done:
            raise EpisodeFinishedError("episode already terminated")

        alloc = Allocation(decode_action(int(action_index), cfg.num_users, cfg.num_channels))
        if cfg.strict_no_empty_channels and not self.action_mask()[int(action_index)]:
            raise InvalidActionError(f"action {action_index} leaves a channel idle (strict mode)")

        n_users = cfg.num_users
        rates = np.zeros(n_users, dtype=float)
        sats = np.empty(n_users, dtype=float)
        for n in range(n_users):
            if alloc.channel_of[n] > 0:
                rates[n] = transmission_rate(alloc, state.realization, cfg.radio, n)
                sats[n] = satisfaction(
                    state.demand_bits[n],
                    rates[n],
                    float(cfg.qos.tolerable_delay_s[n]),
                    allocated=True,
                    dissatisfaction_level=cfg.qos.dissatisfaction_level,
                )
            else:
                sats[n] = satisfaction(
                    0.0, 0.0, float(cfg.qos.tolerable_delay_s[n]),
                    allocated=False, dissatisfaction_level=cfg.qos.dissatisfaction_level,
                )

        new_complaints = 0
        for n in range(n_users):
            _, complained = update_dissatisfaction(sats[n], state.qos_state, cfg.qos, n)
            new_complaints += int(complained)

        budget = cfg.qos.complaint_budget
        before = state.complaints_running
        state.complaints_running = before + new_complaints
        crossed = before < budget <= state.complaints_running

        used = np.unique(alloc.channel_of[alloc.channel_of > 0])
        empty_channels = cfg.num_channels - used.size

        reward = float(sats.mean())
        reward -= cfg.waste_penalty * empty_channels
        reward -= cfg.complaint_penalty * new_complaints
        if crossed:
            reward -= float(cfg.horizon - state.t)

        state.t += 1
        state.done = state.complaints_running >= budget or state.t == cfg.horizon
        if not state.done:
            if cfg.demand_resample == DEMAND_PER_STEP:
                state.demand_bits = self.rng.uniform(*cfg.data_bits_range, size=n_users)
            state.realization = sample_channel_realization(cfg.radio, self.rng)

        info = StepInfo(
            per_user_satisfaction=sats,
            per_user_rate=rates,
            new_complaints=new_complaints,
            empty_channels=empty_channels,
            violated_budget=state.complaints_running >= budget,
        )
        return StepResult(
            observation=observation_of(state, cfg),
            reward=reward,
            done=state.done,
            info=info,
        )

    def total_complaints(self) -> int:
        if self.state is None:
            return 0
        return total_complaints(self.state.qos_state, self.config.qos)


class EpisodeAccumulator:
    """Rolls step results up into the per-episode metrics."""

    def __init__(self):
        self.total_reward = 0.0
        self.steps = 0
        self.waste_count = 0
        self.complaints = 0
        self.violated_budget = False
        self._rate_sum = 0.0
        self._rate_terms = 0

    def add(self, result: StepResult) -> None:
        self.total_reward += result.reward
        self.steps += 1
        self.waste_count += result.info.empty_channels
        self.complaints += result.info.new_complaints
        self.violated_budget = result.info.violated_budget
        allocated = result.info.per_user_rate > 0
        self._rate_sum += float(result.info.per_user_rate[allocated].sum())
        self._rate_terms += int(allocated.sum())

    @property
    def successful_steps(self) -> int:
        """Completed transmissions before the budget broke (0 rates still count
        as steps; the step that breaks the budget does not)."""
        return self.steps - 1 if self.violated_budget else self.steps

    @property
    def average_rate_bps(self) -> float:
        """Mean rate over allocated user-steps; 0 when nothing was allocated."""
        return self._rate_sum / self._rate_terms if self._rate_terms else 0.0


def trace_columns(num_users: int) -> list[str]:
    """Column order of an episode trace CSV."""
    return (
        ["episode", "t", "action_index", "reward", "gamma", "empty_channels"]
        + [f"rate_user{n}" for n in range(num_users)]
        + [f"satisfaction_user{n}" for n in range(num_users)]
    )


class TraceRecorder:
    """Collects per-step rows and writes them as CSV in the documented order.

    ``gamma`` is the running complaint total after the recorded step.
    """

    def __init__(self, num_users: int):
        self.num_users = num_users
        self.rows: list[list] = []

    def record(self, episode: int, t: int, action_index: int, result: StepResult, gamma: int) -> None:
        info = result.info
        self.rows.append(
            [episode, t, action_index, repr(result.reward), gamma, info.empty_channels]
            + [repr(float(r)) for r in info.per_user_rate]
            + [repr(float(s)) for s in info.per_user_satisfaction]
        )

    def save(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(trace_columns(self.num_users))
            writer.writerows(self.rows)
