"""Minimal continuous-action environment for training-loop sanity checks.

One pseudo-template, a fixed cloud of 1,000 candidate points in [-1, 1]^2
standing in for the reactant pool, constant binary state, one-step episodes.
Reward is the negative squared distance between the selected point and a
fixed target, so a correct TD3 implementation must drive its continuous
output toward the target and collect rewards near zero.

The class mirrors the :class:`pgfs.env.SynthesisEnv` surface the trainer
uses: ``state_dim``/``action_dim``/``n_templates``, ``reset``,
``state_features``, ``template_mask``, ``compat_features``, ``step``, and
``last_executed_a``.
"""
from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from .env import StepRecord

__all__ = ["ToyPointEnv"]

_POINT_SEED = 20240501


class ToyPointEnv:
    def __init__(
        self,
        n_points: int = 1000,
        target: tuple[float, float] = (0.3, -0.6),
        state_dim: int = 8,
        seed: int | Sequence[int] | None = None,
    ):
        point_rng = np.random.default_rng(_POINT_SEED)
        self.points = point_rng.uniform(-1.0, 1.0, size=(n_points, 2))
        self.points.setflags(write=False)
        self.target = np.asarray(target, dtype=np.float64)
        self._state_dim = state_dim
        self._state = "TOY"
        self.rng = np.random.default_rng(seed)
        self.max_steps = 1
        self.last_executed_a: np.ndarray | None = None
        self.state_smiles = self._state  # trainer logs this field name

    # -- protocol ----------------------------------------------------------
    @property
    def state_dim(self) -> int:
        return self._state_dim

    @property
    def action_dim(self) -> int:
        return 2

    @property
    def n_templates(self) -> int:
        return 1

    def reset(
        self,
        rng: np.random.Generator | None = None,
        start: int | None = None,
    ) -> str:
        return self._state

    def state_features(self, state: str) -> np.ndarray:
        return np.ones(self._state_dim, dtype=np.float64)

    def template_mask(self, state: str) -> np.ndarray:
        return np.ones(1, dtype=bool)

    def compat_features(self, template_idx: int) -> np.ndarray:
        return self.points

    def unimolecular(self, template_idx: int) -> bool:
        return False

    def registry_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.points.tobytes())
        h.update(self.target.tobytes())
        h.update(str(self._state_dim).encode())
        return h.hexdigest()

    @property
    def best_reward(self) -> float:
        """Reward of the point closest to the target (the optimum)."""
        d2 = ((self.points - self.target) ** 2).sum(axis=1)
        return float(-d2.min())

    def step(
        self,
        template_idx: int,
        a: np.ndarray,
        rng: np.random.Generator | None = None,
    ) -> tuple[str, float, bool, StepRecord]:
        if template_idx != 0:
            raise ValueError("toy environment has a single template")
        a = np.asarray(a, dtype=np.float64)
        d2 = ((self.points - a) ** 2).sum(axis=1)
        pick = int(np.argmin(d2))  # argmin takes the lowest index on ties
        selected = self.points[pick]
        reward = float(-((selected - self.target) ** 2).sum())
        self.last_executed_a = selected
        record = StepRecord(
            r1=self._state,
            template="select",
            r2=f"point_{pick}",
            product="",
            reward=reward,
            done=True,
            reason="horizon",
        )
        return self._state, reward, True, record
