"""Flat experiment configuration: ``key = value`` files, flag overrides.

One dataclass holds every knob a run can turn — paths, scorer choice, and
all training hyperparameters.  Files are plain lines of ``key = value``
(blank lines and ``#`` comment lines skipped), so an experiment record is
diffable text; command-line flags override file values; ``--print-config``
echoes the effective result in the same format.
"""
from __future__ import annotations

import os
import types
import typing
from dataclasses import dataclass, fields
from pathlib import Path

from .trainer import TrainConfig

__all__ = ["ConfigError", "RunConfig", "data_root"]


class ConfigError(ValueError):
    """A config file or value that cannot be parsed or validated."""


def data_root() -> Path:
    """Default directory for bundled data files, overridable via the
    PGFS_DATA_DIR environment variable."""
    override = os.environ.get("PGFS_DATA_DIR")
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


@dataclass
class RunConfig:
    # paths (None -> resolved against data_root())
    blocks: str | None = None
    templates: str | None = None
    sa_table: str | None = None
    ad_reference: str | None = None
    out: str | None = None
    checkpoint: str | None = None
    resume: str | None = None
    starts: str | None = None

    # selection
    scorer: str = "qed"
    seed: int = 0
    k: int = 1
    max_steps: int = 5
    floor_reward: float | None = None  # None -> the scorer's default floor
    min_compat: int | None = None  # None -> max(5, n_blocks // 1000)

    # budgets
    steps: int = 20_000  # training env steps
    budget: int = 20_000  # random-search env steps

    # training hyperparameters (mirrors TrainConfig)
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
    tau_anneal_steps: int | None = None
    buffer_capacity: int = 100_000
    eval_every: int = 2000
    eval_episodes: int = 20
    checkpoint_every: int = 0
    f_hidden: tuple[int, ...] = (256, 128, 128)
    pi_hidden: tuple[int, ...] = (256, 256, 167)
    q_hidden: tuple[int, ...] = (256, 64, 16)

    # -- resolution ---------------------------------------------------------
    def blocks_path(self) -> Path:
        return Path(self.blocks) if self.blocks else data_root() / "building_blocks.smi"

    def templates_path(self) -> Path:
        return Path(self.templates) if self.templates else data_root() / "templates.txt"

    def sa_table_path(self) -> Path:
        return Path(self.sa_table) if self.sa_table else data_root() / "sa_table.txt"

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            total_steps=self.steps,
            seed=self.seed,
            gamma=self.gamma,
            batch=self.batch,
            lr_actor=self.lr_actor,
            lr_critic=self.lr_critic,
            polyak_tau=self.polyak_tau,
            explore_sigma=self.explore_sigma,
            policy_noise=self.policy_noise,
            noise_clip=self.noise_clip,
            actor_delay=self.actor_delay,
            bootstrap_steps=self.bootstrap_steps,
            gumbel_tau_start=self.gumbel_tau_start,
            gumbel_tau_end=self.gumbel_tau_end,
            tau_anneal_steps=self.tau_anneal_steps,
            buffer_capacity=self.buffer_capacity,
            eval_every=self.eval_every,
            eval_episodes=self.eval_episodes,
            checkpoint_every=self.checkpoint_every,
            f_hidden=tuple(self.f_hidden),
            pi_hidden=tuple(self.pi_hidden),
            q_hidden=tuple(self.q_hidden),
        )

    # -- text form ------------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def apply(self, overrides: dict[str, object]) -> None:
        """Set fields from a {name: raw} mapping; values may be strings
        (parsed by field type) or already-typed objects."""
        hints = typing.get_type_hints(type(self))
        valid = {f.name for f in fields(self)}
        for key, raw in overrides.items():
            if key not in valid:
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(raw, str):
                try:
                    value = _parse_value(raw, hints[key])
                except ConfigError:
                    raise
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key!r}: {exc}")
            else:
                value = raw
            setattr(self, key, value)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        config = cls()
        overrides: dict[str, object] = {}
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {stripped!r}"
                )
            key, _, value = stripped.partition("=")
            overrides[key.strip()] = value.strip()
        config.apply(overrides)
        return config


def _format_value(value: object) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(raw: str, hint: object) -> object:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    # optional types: "none" (case-insensitive) means None
    if origin is typing.Union or origin is types.UnionType:
        non_none = [a for a in args if a is not type(None)]
        if raw.lower() in ("none", ""):
            return None
        return _parse_value(raw, non_none[0])
    if origin is tuple:
        items = [part.strip() for part in raw.split(",") if part.strip()]
        if not items:
            raise ConfigError("empty tuple value")
        return tuple(int(part) for part in items)
    if hint is bool:
        lowered = raw.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if hint is int:
        return int(raw)
    if hint is float:
        return float(raw)
    if hint is str:
        return raw
    raise ConfigError(f"unsupported config field type {hint!r}")
