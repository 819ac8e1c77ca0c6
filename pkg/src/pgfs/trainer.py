"""Training loop: episodes, TD3 updates, greedy evaluation, checkpoints.

The loop runs whole episodes (checkpoints and evaluations happen only at
episode boundaries, so a resumed run replays the exact step sequence), counts
environment steps as its budget unit — the same unit as the random-search
baseline — and anneals the Gumbel-softmax temperature linearly over a fixed
number of steps, then holds.

Randomness is split into three generators so that evaluation never perturbs
training: the trainer generator (action noise, batch sampling, update noise),
the environment generator (start picks, product tie-breaks), and a per-call
evaluation generator reseeded from (seed, step).  The first two are captured
in checkpoints; the third is derived, so resuming reproduces the original
run bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .agent import AgentConfig, PGFSAgent, ReplayBuffer
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .env import EPISODE_CSV_HEADER, EpisodeRecord, episode_csv_rows

__all__ = ["TrainConfig", "Trainer", "gumbel_tau_schedule"]

METRICS_HEADER = "step,critic_loss,actor_loss,f_ce_loss,mean_inference_reward"


@dataclass
class TrainConfig:
    """Everything the trainer and agent need, checkpoint-echoed for resume
    validation."""

    total_steps: int
    seed: int = 0
    gamma: float = 0.99
    batch: int = 32
    lr_actor: float = 1e-4
    lr_critic: float = 3e-4
    polyak_tau: float = 0.005
    explore_sigma: float = 0.1
    policy_noise: float = 0.2
    noise_clip: float = 0.2
    actor_delay: int = 2
    bootstrap_steps: int = 3000
    gumbel_tau_start: float = 1.0
    gumbel_tau_end: float = 0.1
    #: anneal length in env steps; None means half of total_steps
    tau_anneal_steps: int | None = None
    buffer_capacity: int = 100_000
    eval_every: int = 0
    eval_episodes: int = 20
    checkpoint_every: int = 0
    f_hidden: tuple[int, ...] = (256, 128, 128)
    pi_hidden: tuple[int, ...] = (256, 256, 167)
    q_hidden: tuple[int, ...] = (256, 64, 16)

    def validate(self) -> None:
        if self.total_steps < 1:
            raise ValueError("total_steps must be positive")
        if self.bootstrap_steps < 0:
            raise ValueError("bootstrap_steps must be >= 0")
        if self.gumbel_tau_start <= 0 or self.gumbel_tau_end <= 0:
            raise ValueError("gumbel temperatures must be positive")
        if self.buffer_capacity < self.batch:
            raise ValueError("buffer_capacity must be >= batch")
        self.agent_config().validate()

    def agent_config(self) -> AgentConfig:
        return AgentConfig(
            gamma=self.gamma,
            batch=self.batch,
            lr_actor=self.lr_actor,
            lr_critic=self.lr_critic,
            polyak_tau=self.polyak_tau,
            explore_sigma=self.explore_sigma,
            policy_noise=self.policy_noise,
            noise_clip=self.noise_clip,
            actor_delay=self.actor_delay,
            f_hidden=tuple(self.f_hidden),
            pi_hidden=tuple(self.pi_hidden),
            q_hidden=tuple(self.q_hidden),
        )

    def resolved_anneal_steps(self) -> int:
        if self.tau_anneal_steps is not None:
            return max(1, int(self.tau_anneal_steps))
        return max(1, self.total_steps // 2)


def gumbel_tau_schedule(config: TrainConfig, step: int) -> float:
    """Linear from tau_start to tau_end over the anneal window, then hold."""
    frac = min(1.0, step / config.resolved_anneal_steps())
    return config.gumbel_tau_start + frac * (
        config.gumbel_tau_end - config.gumbel_tau_start
    )


@dataclass
class _MetricAccumulator:
    critic_sum: float = 0.0
    critic_n: int = 0
    actor_sum: float = 0.0
    actor_n: int = 0
    ce_sum: float = 0.0
    ce_n: int = 0

    def add(self, losses: dict[str, float]) -> None:
        self.critic_sum += losses["critic_loss"]
        self.critic_n += 1
        if not math.isnan(losses["actor_loss"]):
            self.actor_sum += losses["actor_loss"]
            self.actor_n += 1
            self.ce_sum += losses["f_ce_loss"]
            self.ce_n += 1

    def means(self) -> tuple[float | None, float | None, float | None]:
        critic = self.critic_sum / self.critic_n if self.critic_n else None
        actor = self.actor_sum / self.actor_n if self.actor_n else None
        ce = self.ce_sum / self.ce_n if self.ce_n else None
        return critic, actor, ce

    def reset(self) -> None:
        self.critic_sum = self.actor_sum = self.ce_sum = 0.0
        self.critic_n = self.actor_n = self.ce_n = 0

    def as_list(self) -> list:
        return [self.critic_sum, self.critic_n, self.actor_sum, self.actor_n,
                self.ce_sum, self.ce_n]

    def from_list(self, vals: list) -> None:
        (self.critic_sum, self.critic_n, self.actor_sum, self.actor_n,
         self.ce_sum, self.ce_n) = (
            float(vals[0]), int(vals[1]), float(vals[2]), int(vals[3]),
            float(vals[4]), int(vals[5]))


class Trainer:
    """Drives one environment with one agent under a TrainConfig."""

    def __init__(
        self,
        env,
        config: TrainConfig,
        *,
        metrics_path: str | None = None,
        checkpoint_path: str | None = None,
        episodes_path: str | None = None,
    ):
        config.validate()
        self.env = env
        self.config = config
        self.metrics_path = metrics_path
        self.checkpoint_path = checkpoint_path
        self.episodes_path = episodes_path
        self.rng = np.random.default_rng([config.seed, 1])
        self.agent = PGFSAgent(
            env.state_dim,
            env.n_templates,
            env.action_dim,
            config.agent_config(),
            rng=self.rng,
        )
        self.buffer = ReplayBuffer(
            config.buffer_capacity,
            self._padded_state_bits(env.state_dim),
            env.n_templates,
            env.action_dim,
        )
        self.global_step = 0
        self.episode = 0
        self.acc = _MetricAccumulator()
        self.last_eval_reward: float | None = None
        self._next_eval = config.eval_every if config.eval_every else None
        self._next_checkpoint = (
            config.checkpoint_every if config.checkpoint_every else None
        )
        self._metrics_started = False
        self._episodes_started = False

    @staticmethod
    def _padded_state_bits(state_dim: int) -> int:
        return ((state_dim + 7) // 8) * 8

    def _pad_state(self, obs: np.ndarray) -> np.ndarray:
        bits = self.buffer.state_bits
        if obs.shape[0] == bits:
            return obs
        out = np.zeros(bits)
        out[: obs.shape[0]] = obs
        return out

    # -- acting --------------------------------------------------------------
    def _bootstrap_action(self, mask: np.ndarray) -> tuple[int, np.ndarray]:
        """Uniform valid template; uniform row of its reactant pool."""
        valid = np.flatnonzero(mask)
        t_idx = int(valid[int(self.rng.integers(len(valid)))])
        if self.env.unimolecular(t_idx):
            return t_idx, np.zeros(self.env.action_dim)
        rows = self.env.compat_features(t_idx)
        return t_idx, rows[int(self.rng.integers(len(rows)))]

    # -- training ------------------------------------------------------------
    def _run_episode(self) -> EpisodeRecord:
        cfg = self.config
        env = self.env
        state = env.reset()
        record = EpisodeRecord(start=env.state_smiles)
        obs = env.state_features(state)
        mask = env.template_mask(state)
        done = False
        while not done:
            tau = gumbel_tau_schedule(cfg, self.global_step)
            if self.global_step < cfg.bootstrap_steps:
                t_idx, a = self._bootstrap_action(mask)
            else:
                t_idx, _, a = self.agent.act(
                    obs, mask, tau, explore=True, rng=self.rng
                )
            a_env = None if env.unimolecular(t_idx) else a
            state, reward, done, step_rec = env.step(t_idx, a_env)
            record.steps.append(step_rec)
            obs2 = env.state_features(state)
            mask2 = env.template_mask(state)
            stored_a = (
                env.last_executed_a if env.last_executed_a is not None else a
            )
            # a dead-end next state never bootstraps (done=1 zeroes the
            # target), but its mask must stay usable for the Gumbel draw
            stored_mask2 = mask2 if mask2.any() else np.ones_like(mask2)
            self.buffer.add(
                self._pad_state(obs),
                mask.astype(np.uint8),
                t_idx,
                stored_a,
                reward,
                self._pad_state(obs2),
                stored_mask2.astype(np.uint8),
                done,
            )
            self.global_step += 1
            if (
                self.global_step >= cfg.bootstrap_steps
                and len(self.buffer) >= cfg.batch
            ):
                batch = self.buffer.sample(cfg.batch, self.rng)
                batch["s"] = batch["s"][:, : env.state_dim]
                batch["s2"] = batch["s2"][:, : env.state_dim]
                losses = self.agent.td3_update(batch, tau, self.rng)
                self.acc.add(losses)
            obs, mask = obs2, mask2
        return record

    def train(self) -> dict:
        cfg = self.config
        while self.global_step < cfg.total_steps:
            record = self._run_episode()
            self._log_episode(record)
            self.episode += 1
            if self._next_eval is not None and self.global_step >= self._next_eval:
                episodes = self.evaluate()
                self.last_eval_reward = float(
                    np.mean([ep.max_reward for ep in episodes])
                )
                self._write_metrics_row()
                self.acc.reset()
                while self._next_eval <= self.global_step:
                    self._next_eval += cfg.eval_every
            if (
                self.checkpoint_path is not None
                and self._next_checkpoint is not None
                and self.global_step >= self._next_checkpoint
            ):
                self.save(self.checkpoint_path)
                while self._next_checkpoint <= self.global_step:
                    self._next_checkpoint += cfg.checkpoint_every
        if self.checkpoint_path is not None:
            self.save(self.checkpoint_path)
        return {
            "steps": self.global_step,
            "episodes": self.episode,
            "final_eval_reward": self.last_eval_reward,
        }

    # -- evaluation ------------------------------------------------------------
    def evaluate(
        self,
        episodes: int | None = None,
        starts: list[int] | None = None,
    ) -> list[EpisodeRecord]:
        """Greedy rollouts on a generator derived from (seed, step); training
        streams are untouched, so evaluation cadence cannot change a run."""
        cfg = self.config
        env = self.env
        eval_rng = np.random.default_rng([cfg.seed, 9999, self.global_step])
        n = episodes if episodes is not None else cfg.eval_episodes
        if starts is not None:
            n = len(starts) if episodes is None else n
        records: list[EpisodeRecord] = []
        tau = gumbel_tau_schedule(cfg, self.global_step)
        for i in range(n):
            if starts is not None:
                state = env.reset(start=starts[i % len(starts)])
            else:
                state = env.reset(rng=eval_rng)
            record = EpisodeRecord(start=env.state_smiles)
            obs = env.state_features(state)
            mask = env.template_mask(state)
            done = False
            while not done:
                t_idx, _, a = self.agent.act(
                    obs, mask, tau, explore=False, rng=eval_rng
                )
                a_env = None if env.unimolecular(t_idx) else a
                state, _, done, step_rec = env.step(t_idx, a_env, rng=eval_rng)
                record.steps.append(step_rec)
                obs = env.state_features(state)
                mask = env.template_mask(state)
            records.append(record)
        return records

    # -- metrics ---------------------------------------------------------------
    def _log_episode(self, record: EpisodeRecord) -> None:
        if self.episodes_path is None:
            return
        mode = "a" if self._episodes_started else "w"
        with open(self.episodes_path, mode, encoding="utf-8") as fh:
            if not self._episodes_started:
                fh.write(EPISODE_CSV_HEADER + "\n")
            for row in episode_csv_rows(self.episode, record):
                fh.write(row + "\n")
        self._episodes_started = True

    def _write_metrics_row(self) -> None:
        if self.metrics_path is None:
            return
        critic, actor, ce = self.acc.means()

        def cell(v: float | None) -> str:
            return "" if v is None else repr(v)

        mode = "a" if self._metrics_started else "w"
        with open(self.metrics_path, mode, encoding="utf-8") as fh:
            if not self._metrics_started:
                fh.write(METRICS_HEADER + "\n")
            fh.write(
                f"{self.global_step},{cell(critic)},{cell(actor)},"
                f"{cell(ce)},{cell(self.last_eval_reward)}\n"
            )
        self._metrics_started = True

    # -- persistence -------------------------------------------------------------
    def _checkpoint_arrays(self) -> dict[str, np.ndarray]:
        arrays: dict[str, np.ndarray] = {}
        for name, net in self.agent.network_items():
            for i, p in enumerate(net.parameters()):
                arrays[f"net/{name}/{i}"] = p
        for name, opt in self.agent.optimizer_items():
            for i, m in enumerate(opt.m):
                arrays[f"opt/{name}/m{i}"] = m
            for i, v in enumerate(opt.v):
                arrays[f"opt/{name}/v{i}"] = v
        arrays["opt/t"] = np.array(
            [opt.t for _, opt in self.agent.optimizer_items()], dtype=np.int64
        )
        for key, val in self.buffer.state_arrays().items():
            arrays[f"buffer/{key}"] = val
        return arrays

    def _config_echo(self) -> dict:
        echo = asdict(self.config)
        for key in ("f_hidden", "pi_hidden", "q_hidden"):
            echo[key] = list(echo[key])
        echo["tau_anneal_steps_resolved"] = self.config.resolved_anneal_steps()
        return echo

    def save(self, path: str) -> None:
        metadata = {
            "config": self._config_echo(),
            "global_step": self.global_step,
            "episode": self.episode,
            "critic_updates": self.agent.critic_updates,
            "next_eval": self._next_eval,
            "next_checkpoint": self._next_checkpoint,
            "metrics_started": self._metrics_started,
            "episodes_started": self._episodes_started,
            "last_eval_reward": self.last_eval_reward,
            "metric_acc": self.acc.as_list(),
            "rng_trainer": self.rng.bit_generator.state,
            "rng_env": self.env.rng.bit_generator.state,
            "registry_hash": self.env.registry_hash(),
        }
        save_checkpoint(path, metadata, self._checkpoint_arrays())

    _RESUME_FREE_KEYS = frozenset(
        {"total_steps", "eval_every", "eval_episodes", "checkpoint_every"}
    )

    def restore(self, path: str) -> dict:
        """Load a checkpoint into this trainer.  The environment registry and
        every config field that shapes the computation must match; budget and
        cadence fields may differ."""
        meta, arrays = load_checkpoint(
            path, expect_registry_hash=self.env.registry_hash()
        )
        echo = self._config_echo()
        stored = meta["config"]
        diff = [
            key
            for key in echo
            if key not in self._RESUME_FREE_KEYS
            and stored.get(key) != echo[key]
        ]
        if diff:
            hint = ""
            if diff == ["tau_anneal_steps_resolved"]:
                hint = (
                    " (changing total_steps moves the derived temperature"
                    " anneal; set tau_anneal_steps explicitly to extend a run)"
                )
            raise CheckpointError(
                f"{path}: config mismatch on resume: {sorted(diff)}{hint}"
            )

        for name, net in self.agent.network_items():
            for i, p in enumerate(net.parameters()):
                src = arrays[f"net/{name}/{i}"]
                if src.shape != p.shape:
                    raise CheckpointError(
                        f"{path}: shape mismatch for net/{name}/{i}"
                    )
                p[:] = src
        ts = arrays["opt/t"]
        for j, (name, opt) in enumerate(self.agent.optimizer_items()):
            for i in range(len(opt.m)):
                opt.m[i][:] = arrays[f"opt/{name}/m{i}"]
                opt.v[i][:] = arrays[f"opt/{name}/v{i}"]
            opt.t = int(ts[j])
        self.buffer.load_state_arrays(
            {
                key.split("/", 1)[1]: val
                for key, val in arrays.items()
                if key.startswith("buffer/")
            }
        )
        self.global_step = int(meta["global_step"])
        self.episode = int(meta["episode"])
        self.agent.critic_updates = int(meta["critic_updates"])
        self._next_eval = meta["next_eval"]
        self._next_checkpoint = meta["next_checkpoint"]
        self._metrics_started = bool(meta["metrics_started"])
        self._episodes_started = bool(meta["episodes_started"])
        self.last_eval_reward = meta["last_eval_reward"]
        self.acc.from_list(meta["metric_acc"])
        self.rng.bit_generator.state = meta["rng_trainer"]
        self.env.rng.bit_generator.state = meta["rng_env"]
        return meta
