"""Learning agents over the allocation environment.

Five trainable policies plus a uniform-random baseline:

* ``PpoAgent``    clipped-surrogate policy gradient, minibatch epochs
* ``A2cAgent``    synchronous advantage actor-critic, single-pass updates
* ``a3c_run``     three asynchronous workers sharing one parameter store
* ``DqnAgent``    replay buffer + target network (optionally dueling)
* ``RandomAgent`` uniform over the action space

Actor/critic updates are written against the explicit-gradient toolkit in
``tinynet``; all agents keep their own sampling generator so runs are
reproducible from a master seed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .env import ChannelAllocationEnv, EpisodeAccumulator, ScenarioConfig
from .seeding import AGENT_INIT, ENV, SAMPLE, derive_rng
from .tinynet import (
    AdamState,
    Mlp,
    adam_update,
    backward,
    categorical_sample,
    dueling_merge,
    dueling_merge_backward,
    forward,
    log_softmax,
)


class InsufficientBufferError(RuntimeError):
    """Replay buffer holds fewer transitions than one batch."""


class WorkerFailedError(RuntimeError):
    """An asynchronous worker raised; the run is void."""


@dataclass
class AgentHyper:
    """Hyperparameters shared by all algorithms; unused fields are ignored."""

    discount: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    q_lr: float = 1e-3
    entropy_coef: float = 0.001
    rollout_length: int = 256
    epochs: int = 4
    minibatch_size: int = 64
    replay_capacity: int = 100_000
    batch_size: int = 64
    target_sync_interval: int = 1000
    train_frequency: int = 4  # environment steps per Q-network update
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 20_000
    worker_count: int = 3
    hidden_sizes: tuple[int, ...] = (128, 128)
    max_grad_norm: float = 2.0  # per-network global-norm clip; <= 0 disables

    def __post_init__(self):
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must lie in (0, 1]")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must lie in [0, 1]")
        if self.clip_epsilon <= 0:
            raise ValueError("clip_epsilon must be > 0")
        for name in ("rollout_length", "epochs", "minibatch_size", "replay_capacity",
                     "batch_size", "target_sync_interval", "train_frequency", "worker_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


class Trajectory:
    """Time-ordered on-policy rollout records."""

    def __init__(self):
        self.observations: list[np.ndarray] = []
        self.actions: list[int] = []
        self.log_probs: list[float] = []
        self.rewards: list[float] = []
        self.values: list[float] = []
        self.dones: list[bool] = []

    def __len__(self) -> int:
        return len(self.actions)

    def append(self, obs, action, log_prob, reward, value, done) -> None:
        self.observations.append(np.asarray(obs, dtype=float))
        self.actions.append(int(action))
        self.log_probs.append(float(log_prob))
        self.rewards.append(float(reward))
        self.values.append(float(value))
        self.dones.append(bool(done))


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform batch sampling."""

    def __init__(self, capacity: int, obs_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.dones = np.zeros(capacity)
        self.size = 0
        self._cursor = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, action, reward, next_obs, done) -> None:
        i = self._cursor
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = float(done)
        self._cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        if self.size < batch_size:
            raise InsufficientBufferError(f"buffer holds {self.size} < batch {batch_size}")
        idx = rng.choice(self.size, size=batch_size, replace=False)
        return {
            "obs": self.obs[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_obs": self.next_obs[idx],
            "dones": self.dones[idx],
        }


def compute_gae(rewards, values, dones, discount: float, gae_lambda: float):
    """Generalized advantage estimation over one rollout.

    ``values`` carries one bootstrap entry beyond the rewards; episode
    boundaries (dones) cut both the TD target and the accumulation.
    Returns (advantages, returns) with returns = advantages + values[:-1].
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    n = rewards.shape[0]
    if values.shape[0] != n + 1 or dones.shape[0] != n:
        raise ValueError("compute_gae needs len(values) == len(rewards) + 1 == len(dones) + 1")
    not_done = 1.0 - dones.astype(float)
    advantages = np.zeros(n)
    acc = 0.0
    for t in range(n - 1, -1, -1):
        delta = rewards[t] + discount * values[t + 1] * not_done[t] - values[t]
        acc = delta + discount * gae_lambda * not_done[t] * acc
        advantages[t] = acc
    return advantages, advantages + values[:-1]


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    adv = np.asarray(advantages, dtype=float)
    return (adv - adv.mean()) / (adv.std() + 1e-8)


def clip_gradients(grads: list[np.ndarray], max_norm: float) -> list[np.ndarray]:
    """Scale the whole gradient list so its global L2 norm is at most max_norm."""
    if max_norm <= 0:
        return grads
    total = np.sqrt(sum(float((g * g).sum()) for g in grads))
    if total <= max_norm:
        return grads
    scale = max_norm / total
    return [g * scale for g in grads]


def prepare_batch(traj: Trajectory, bootstrap_value: float, hyper: AgentHyper) -> dict:
    """Turn a trajectory into the update batch: GAE + normalized advantages."""
    values = np.asarray(traj.values + [float(bootstrap_value)])
    advantages, returns = compute_gae(traj.rewards, values, traj.dones, hyper.discount, hyper.gae_lambda)
    return {
        "obs": np.stack(traj.observations),
        "actions": np.asarray(traj.actions, dtype=np.int64),
        "log_probs": np.asarray(traj.log_probs),
        "advantages": normalize_advantages(advantages),
        "returns": returns,
    }


@dataclass
class UpdateReport:
    surrogate: float
    value_loss: float
    entropy: float
    clip_fraction: float
    aborted: bool = False


def _critic_grads(critic: Mlp, obs: np.ndarray, returns: np.ndarray):
    """Mean-squared-error gradients of the value head. Returns (grads, loss)."""
    out, cache = forward(critic, obs)
    v = out[:, 0]
    err = v - returns
    loss = float(np.mean(err**2))
    grad_out = (2.0 * err / err.size)[:, None]
    return backward(critic, cache, grad_out).flat(), loss


def _policy_terms(actor: Mlp, obs: np.ndarray, actions: np.ndarray):
    """Forward the actor; returns (cache, probs, log_probs, chosen log-probs, entropy per sample)."""
    logits, cache = forward(actor, obs)
    logp = log_softmax(logits)
    p = np.exp(logp)
    lp_a = logp[np.arange(actions.size), actions]
    ent = -(p * logp).sum(axis=1)
    return cache, p, logp, lp_a, ent


def _ascent_grad_logits(p, logp, actions, coef, ent, entropy_coef):
    """d/dlogits of mean(coef per-sample objective) + entropy bonus, as a
    *descent* gradient (already negated)."""
    batch = actions.size
    grad = p * (coef / batch)[:, None]
    grad[np.arange(batch), actions] -= coef / batch
    if entropy_coef:
        grad += (entropy_coef / batch) * p * (logp + ent[:, None])
    return grad


def ppo_update(
    batch: dict,
    actor: Mlp,
    critic: Mlp,
    actor_opt: AdamState,
    critic_opt: AdamState,
    hyper: AgentHyper,
    rng: np.random.Generator,
) -> UpdateReport:
    """Clipped-surrogate update: several epochs of shuffled minibatches.

    The actor ascends E[min(ratio * A, clip(ratio) * A)] plus an entropy
    bonus; the critic regresses onto the returns. Advantages are consumed
    as given (callers normalize per batch). Aborts without touching the
    parameters of the offending minibatch if any loss goes non-finite.
    """
    n = batch["actions"].size
    surrogates, value_losses, entropies, clip_fracs = [], [], [], []
    for _ in range(hyper.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hyper.minibatch_size):
            idx = order[start : start + hyper.minibatch_size]
            obs = batch["obs"][idx]
            actions = batch["actions"][idx]
            adv = batch["advantages"][idx]
            old_lp = batch["log_probs"][idx]

            cache, p, logp, lp_a, ent = _policy_terms(actor, obs, actions)
            ratio = np.exp(lp_a - old_lp)
            clipped = np.clip(ratio, 1.0 - hyper.clip_epsilon, 1.0 + hyper.clip_epsilon)
            surr1 = ratio * adv
            surr2 = clipped * adv
            surrogate = float(np.minimum(surr1, surr2).mean())
            mean_entropy = float(ent.mean())

            critic_grads, value_loss = _critic_grads(critic, obs, batch["returns"][idx])

            if not (np.isfinite(surrogate) and np.isfinite(value_loss) and np.isfinite(mean_entropy)):
                return UpdateReport(surrogate, value_loss, mean_entropy, 0.0, aborted=True)

            # gradient flows through the unclipped branch wherever it attains the min
            coef = np.where(surr1 <= surr2, ratio * adv, 0.0)
            grad_logits = _ascent_grad_logits(p, logp, actions, coef, ent, hyper.entropy_coef)
            actor_grads = clip_gradients(backward(actor, cache, grad_logits).flat(),
                                         hyper.max_grad_norm)
            critic_grads = clip_gradients(critic_grads, hyper.max_grad_norm)

            adam_update(actor.parameters(), actor_grads, actor_opt)
            adam_update(critic.parameters(), critic_grads, critic_opt)

            surrogates.append(surrogate)
            value_losses.append(value_loss)
            entropies.append(mean_entropy)
            clip_fracs.append(float(np.mean(np.abs(ratio - 1.0) > hyper.clip_epsilon)))
    return UpdateReport(
        surrogate=float(np.mean(surrogates)),
        value_loss=float(np.mean(value_losses)),
        entropy=float(np.mean(entropies)),
        clip_fraction=float(np.mean(clip_fracs)),
    )


def a2c_gradients(batch: dict, actor: Mlp, critic: Mlp, hyper: AgentHyper):
    """Single-pass actor/critic gradients for one synchronous batch.

    Returns (actor_grads, critic_grads, report); grads are descent-direction
    and not yet applied.
    """
    obs = batch["obs"]
    actions = batch["actions"]
    adv = batch["advantages"]
    cache, p, logp, lp_a, ent = _policy_terms(actor, obs, actions)
    objective = float((lp_a * adv).mean())
    mean_entropy = float(ent.mean())
    critic_grads, value_loss = _critic_grads(critic, obs, batch["returns"])
    if not (np.isfinite(objective) and np.isfinite(value_loss) and np.isfinite(mean_entropy)):
        return None, None, UpdateReport(objective, value_loss, mean_entropy, 0.0, aborted=True)
    grad_logits = _ascent_grad_logits(p, logp, actions, adv, ent, hyper.entropy_coef)
    actor_grads = clip_gradients(backward(actor, cache, grad_logits).flat(), hyper.max_grad_norm)
    critic_grads = clip_gradients(critic_grads, hyper.max_grad_norm)
    report = UpdateReport(objective, value_loss, mean_entropy, 0.0)
    return actor_grads, critic_grads, report


def a2c_update(
    batch: dict,
    actor: Mlp,
    critic: Mlp,
    actor_opt: AdamState,
    critic_opt: AdamState,
    hyper: AgentHyper,
) -> UpdateReport:
    actor_grads, critic_grads, report = a2c_gradients(batch, actor, critic, hyper)
    if report.aborted:
        return report
    adam_update(actor.parameters(), actor_grads, actor_opt)
    adam_update(critic.parameters(), critic_grads, critic_opt)
    return report


def dqn_update(
    buffer: ReplayBuffer,
    qnet: Mlp,
    target: Mlp,
    opt: AdamState,
    hyper: AgentHyper,
    dueling: bool,
    rng: np.random.Generator,
) -> float:
    """One TD step on a uniform replay batch; returns the scalar loss."""
    batch = buffer.sample(hyper.batch_size, rng)
    raw_next, _ = forward(target, batch["next_obs"])
    q_next = dueling_merge(raw_next) if dueling else raw_next
    targets = batch["rewards"] + hyper.discount * (1.0 - batch["dones"]) * q_next.max(axis=1)

    raw, cache = forward(qnet, batch["obs"])
    q = dueling_merge(raw) if dueling else raw
    rows = np.arange(batch["actions"].size)
    err = q[rows, batch["actions"]] - targets
    loss = float(np.mean(err**2))

    grad_q = np.zeros_like(q)
    grad_q[rows, batch["actions"]] = 2.0 * err / err.size
    grad_raw = dueling_merge_backward(grad_q) if dueling else grad_q
    grads = clip_gradients(backward(qnet, cache, grad_raw).flat(), hyper.max_grad_norm)
    adam_update(qnet.parameters(), grads, opt)
    return loss


class RandomAgent:
    """Uniform policy over the discrete action space."""

    def __init__(self, num_actions: int, rng: np.random.Generator):
        self.num_actions = num_actions
        self.rng = rng

    def act(self, obs=None, explore: bool = True) -> int:
        return int(self.rng.integers(self.num_actions))


class ActorCriticAgent:
    """Shared machinery of the on-policy agents."""

    def __init__(self, obs_dim, num_actions, hyper: AgentHyper,
                 init_rng: np.random.Generator, sample_rng: np.random.Generator):
        hidden = list(hyper.hidden_sizes)
        self.actor = Mlp([obs_dim, *hidden, num_actions], init_rng)
        self.critic = Mlp([obs_dim, *hidden, 1], init_rng)
        self.actor_opt = AdamState.for_net(self.actor, hyper.actor_lr)
        self.critic_opt = AdamState.for_net(self.critic, hyper.critic_lr)
        self.hyper = hyper
        self.rng = sample_rng

    def act(self, obs, explore: bool = True) -> int:
        logits, _ = forward(self.actor, obs)
        if explore:
            return categorical_sample(logits, self.rng)[0]
        return int(np.argmax(logits))  # == argmax of the softmax probabilities

    def value(self, obs) -> float:
        return float(forward(self.critic, obs)[0][0])


class PpoAgent(ActorCriticAgent):
    def update(self, traj: Trajectory, bootstrap_value: float) -> UpdateReport:
        batch = prepare_batch(traj, bootstrap_value, self.hyper)
        return ppo_update(batch, self.actor, self.critic, self.actor_opt, self.critic_opt,
                          self.hyper, self.rng)


class A2cAgent(ActorCriticAgent):
    def update(self, traj: Trajectory, bootstrap_value: float) -> UpdateReport:
        batch = prepare_batch(traj, bootstrap_value, self.hyper)
        return a2c_update(batch, self.actor, self.critic, self.actor_opt, self.critic_opt, self.hyper)


class DqnAgent:
    """TD learner with target network, epsilon-greedy exploration and an
    optional dueling head (raw output = [state value, per-action advantages])."""

    def __init__(self, obs_dim, num_actions, hyper: AgentHyper,
                 init_rng: np.random.Generator, sample_rng: np.random.Generator,
                 dueling: bool = False):
        self.num_actions = num_actions
        self.dueling = dueling
        out = num_actions + 1 if dueling else num_actions
        self.qnet = Mlp([obs_dim, *hyper.hidden_sizes, out], init_rng)
        self.target = self.qnet.clone()
        self.opt = AdamState.for_net(self.qnet, hyper.q_lr)
        self.buffer = ReplayBuffer(hyper.replay_capacity, obs_dim)
        self.hyper = hyper
        self.rng = sample_rng
        self.transitions = 0
        self.updates = 0

    def epsilon(self) -> float:
        h = self.hyper
        frac = min(1.0, self.transitions / h.epsilon_decay_steps)
        return h.epsilon_start + (h.epsilon_end - h.epsilon_start) * frac

    def q_values(self, obs) -> np.ndarray:
        raw, _ = forward(self.qnet, obs)
        return dueling_merge(raw) if self.dueling else raw

    def act(self, obs, explore: bool = True) -> int:
        if explore and self.rng.random() < self.epsilon():
            return int(self.rng.integers(self.num_actions))
        return int(np.argmax(self.q_values(obs)))

    def observe(self, obs, action, reward, next_obs, done) -> float | None:
        """Store one transition; train every ``train_frequency`` transitions."""
        self.buffer.add(obs, action, reward, next_obs, done)
        self.transitions += 1
        if len(self.buffer) >= self.hyper.batch_size and self.transitions % self.hyper.train_frequency == 0:
            return self.train_step()
        return None

    def train_step(self) -> float:
        loss = dqn_update(self.buffer, self.qnet, self.target, self.opt, self.hyper,
                          self.dueling, self.rng)
        self.updates += 1
        if self.updates % self.hyper.target_sync_interval == 0:
            self.target.copy_from(self.qnet)
        return loss


class RolloutRunner:
    """Steps one environment with a sampling policy, rollout by rollout.

    Episodes may span rollout boundaries; ``on_episode(accumulator)`` fires
    whenever one finishes. collect() returns the bootstrap value for the
    rollout's trailing state (0 when it ended an episode).
    """

    def __init__(self, env: ChannelAllocationEnv, sample_rng: np.random.Generator):
        self.env = env
        self.rng = sample_rng
        self.obs = env.reset()
        self.acc = EpisodeAccumulator()

    def collect(self, actor: Mlp, critic: Mlp, length: int, traj: Trajectory, on_episode) -> float:
        for _ in range(length):
            logits, _ = forward(actor, self.obs)
            action, log_prob, _ = categorical_sample(logits, self.rng)
            value = float(forward(critic, self.obs)[0][0])
            result = self.env.step(action)
            traj.append(self.obs, action, log_prob, result.reward, value, result.done)
            self.acc.add(result)
            if result.done:
                on_episode(self.acc)
                self.acc = EpisodeAccumulator()
                self.obs = self.env.reset()
            else:
                self.obs = result.observation
        if traj.dones[-1]:
            return 0.0
        return float(forward(critic, self.obs)[0][0])


@dataclass
class A3cEpisode:
    worker: int
    total_reward: float
    average_rate_bps: float
    waste_count: int
    successful_steps: int
    complaints: int

    @classmethod
    def from_accumulator(cls, worker: int, acc: EpisodeAccumulator) -> "A3cEpisode":
        return cls(
            worker=worker,
            total_reward=acc.total_reward,
            average_rate_bps=acc.average_rate_bps,
            waste_count=acc.waste_count,
            successful_steps=acc.successful_steps,
            complaints=acc.complaints,
        )


@dataclass
class A3cUpdate:
    worker: int
    actor_grads: list[np.ndarray]
    critic_grads: list[np.ndarray]


@dataclass
class A3cResult:
    actor: Mlp
    critic: Mlp
    episodes: list[A3cEpisode]
    update_log: list[A3cUpdate] = field(default_factory=list)
    initial_actor: Mlp | None = None
    initial_critic: Mlp | None = None


def a3c_run(
    scenario: ScenarioConfig,
    hyper: AgentHyper,
    seed: int,
    episodes: int,
    record_updates: bool = False,
) -> A3cResult:
    """Asynchronous advantage actor-critic over ``hyper.worker_count`` threads.

    Each worker owns a private environment and local network clones; it
    repeatedly syncs local <- shared, collects one rollout, computes
    single-pass gradients locally and applies them to the shared parameters
    under the store lock. With ``record_updates`` every applied gradient is
    logged in application order so the final parameters can be replayed.
    """
    init_rng = derive_rng(seed, AGENT_INIT)
    hidden = list(hyper.hidden_sizes)
    shared_actor = Mlp([scenario.observation_size, *hidden, scenario.num_actions], init_rng)
    shared_critic = Mlp([scenario.observation_size, *hidden, 1], init_rng)
    actor_opt = AdamState.for_net(shared_actor, hyper.actor_lr)
    critic_opt = AdamState.for_net(shared_critic, hyper.critic_lr)
    initial_actor = shared_actor.clone() if record_updates else None
    initial_critic = shared_critic.clone() if record_updates else None

    lock = threading.Lock()
    episode_log: list[A3cEpisode] = []
    update_log: list[A3cUpdate] = []
    progress = {"count": 0, "stop": False}
    failures: list[tuple[int, BaseException]] = []

    def work(worker_id: int) -> None:
        try:
            env = ChannelAllocationEnv(scenario, rng=derive_rng(seed, ENV, worker_id))
            runner = RolloutRunner(env, derive_rng(seed, SAMPLE, worker_id))
            local_actor = shared_actor.clone()
            local_critic = shared_critic.clone()

            def on_episode(acc: EpisodeAccumulator) -> None:
                with lock:
                    if progress["count"] < episodes:
                        progress["count"] += 1
                        episode_log.append(A3cEpisode.from_accumulator(worker_id, acc))
                        if progress["count"] >= episodes:
                            progress["stop"] = True

            while True:
                with lock:
                    if progress["stop"]:
                        break
                    local_actor.copy_from(shared_actor)
                    local_critic.copy_from(shared_critic)
                traj = Trajectory()
                bootstrap = runner.collect(local_actor, local_critic, hyper.rollout_length, traj, on_episode)
                batch = prepare_batch(traj, bootstrap, hyper)
                actor_grads, critic_grads, report = a2c_gradients(batch, local_actor, local_critic, hyper)
                if report.aborted:
                    continue
                with lock:
                    adam_update(shared_actor.parameters(), actor_grads, actor_opt)
                    adam_update(shared_critic.parameters(), critic_grads, critic_opt)
                    if record_updates:
                        update_log.append(A3cUpdate(worker_id, actor_grads, critic_grads))
        except BaseException as exc:  # noqa: BLE001 - propagated to the caller
            failures.append((worker_id, exc))
            with lock:
                progress["stop"] = True

    threads = [threading.Thread(target=work, args=(w,), name=f"a3c-worker-{w}")
               for w in range(hyper.worker_count)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failures:
        worker_id, exc = failures[0]
        raise WorkerFailedError(f"worker {worker_id} failed: {exc!r}") from exc
    return A3cResult(
        actor=shared_actor,
        critic=shared_critic,
        episodes=episode_log,
        update_log=update_log,
        initial_actor=initial_actor,
        initial_critic=initial_critic,
    )


def replay_updates(
    initial_actor: Mlp,
    initial_critic: Mlp,
    hyper: AgentHyper,
    update_log: list[A3cUpdate],
) -> tuple[Mlp, Mlp]:
    """Re-apply a recorded update log sequentially from the initial weights.

    Because shared-store updates are serialized, this reproduces the final
    parameters of an asynchronous run exactly.
    """
    actor = initial_actor.clone()
    critic = initial_critic.clone()
    actor_opt = AdamState.for_net(actor, hyper.actor_lr)
    critic_opt = AdamState.for_net(critic, hyper.critic_lr)
    for update in update_log:
        adam_update(actor.parameters(), update.actor_grads, actor_opt)
        adam_update(critic.parameters(), update.critic_grads, critic_opt)
    return actor, critic
