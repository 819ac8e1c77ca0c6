"""Forward-synthesis MDP environment.

State is a molecule; an action is a reaction template plus, for bimolecular
templates, a continuous vector that is resolved to a concrete second reactant
by exact k-nearest-neighbour lookup in normalized descriptor space.  A step
applies the template, scores the resulting product(s), and returns the
highest-scoring one.

The environment owns no learning state.  The template/block registry is an
immutable :class:`BuildingBlockIndex` shared by training, inference, and the
random-search baseline.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chem import (
    BlockRecord,
    Molecule,
    ReactionTemplate,
    apply_template,
    write_smiles,
)
from .chem.smarts import has_unique_match
from .features import (
    DESCRIPTOR_NAMES,
    NormStats,
    descriptor_vector,
    fit_normalizer,
    morgan_fingerprint,
    normalize,
)

__all__ = [
    "BuildingBlockIndex",
    "EnvConfigError",
    "EpisodeRecord",
    "StepRecord",
    "SynthesisEnv",
    "build_index",
    "episode_csv_rows",
    "knn",
    "random_search",
    "write_episode_csv",
    "write_quantile_csv",
    "write_routes",
]

#: callable scoring a batch of molecules, one finite float per molecule
ScorerFn = Callable[[Sequence[Molecule]], np.ndarray]

EPISODE_CSV_HEADER = "episode,step,r1,template,r2,product,reward,done,reason"
QUANTILE_CSV_HEADER = "step,n,min,q05,q25,q50,q75,q95,max"


class EnvConfigError(Exception):
    """Fatal configuration problem (empty registry, bad arguments)."""


# ---------------------------------------------------------------------------
# index
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BuildingBlockIndex:
    """Immutable registry of blocks, retained templates, and features.

    ``compat[i]`` lists (ascending) the block indices usable as the second
    reactant of template ``i``; ``None`` marks a unimolecular template.
    ``features`` rows are normalized descriptor vectors aligned with
    ``blocks``.
    """

    blocks: tuple[BlockRecord, ...]
    templates: tuple[ReactionTemplate, ...]
    compat: tuple[tuple[int, ...] | None, ...]
    features: np.ndarray
    stats: NormStats
    min_compat: int
    dropped: tuple[tuple[str, str], ...]  # (template name, reason)

    @property
    def n_templates(self) -> int:
        return len(self.templates)

    @property
    def start_indices(self) -> tuple[int, ...]:
        return self._start_indices()

    def _start_indices(self) -> tuple[int, ...]:
        cached = self.__dict__.get("_starts")
        if cached is None:
            cached = tuple(
                i
                for i, rec in enumerate(self.blocks)
                if bool(self.template_mask(rec.mol).any())
            )
            self.__dict__["_starts"] = cached
        return cached

    def template_mask(self, mol: Molecule) -> np.ndarray:
        """Boolean vector: template i is applicable iff its first reactant
        pattern matches the molecule exactly once (unique-match rule)."""
        cached = mol.cache_get("tmask")
        if cached is not None:
            return cached
        mask = np.fromiter(
            (has_unique_match(t.reactants[0], mol) for t in self.templates),
            dtype=bool,
            count=len(self.templates),
        )
        mask.setflags(write=False)
        mol.cache_set("tmask", mask)
        return mask

    def block_features(self, block_idx: int) -> np.ndarray:
        return self.features[block_idx]

    def registry_hash(self) -> str:
        """Digest binding checkpoints to the exact corpus and template set."""
        h = hashlib.sha256()
        for rec in self.blocks:
            h.update(rec.smiles.encode())
            h.update(b"\n")
        h.update(b"--templates--\n")
        for t in self.templates:
            h.update(t.name.encode())
            h.update(b"\t")
            h.update(t.smarts.encode())
            h.update(b"\n")
        h.update(f"min_compat={self.min_compat}\n".encode())
        h.update(self.stats.to_text().encode())
        return h.hexdigest()

    def report(self) -> str:
        lines = [
            f"blocks: {len(self.blocks)}",
            f"templates retained: {len(self.templates)} "
            f"(dropped {len(self.dropped)}, min_compat {self.min_compat})",
            f"start-eligible blocks: {len(self.start_indices)}",
        ]
        for t, c in zip(self.templates, self.compat):
            size = "unimolecular" if c is None else f"compat {len(c)}"
            lines.append(f"  {t.name}: {size}")
        for name, reason in self.dropped:
            lines.append(f"  dropped {name}: {reason}")
        return "\n".join(lines)


def build_index(
    blocks: Sequence[BlockRecord],
    templates: Sequence[ReactionTemplate],
    min_compat: int | None = None,
) -> BuildingBlockIndex:
    """Compute per-template compatibility, drop starved bimolecular templates,
    and fit descriptor normalization over the block corpus."""
    if not blocks:
        raise EnvConfigError("block corpus is empty")
    if min_compat is None:
        min_compat = max(5, len(blocks) // 1000)

    kept: list[ReactionTemplate] = []
    compat: list[tuple[int, ...] | None] = []
    dropped: list[tuple[str, str]] = []
    for t in templates:
        if not t.is_bimolecular:
            kept.append(t)
            compat.append(None)
            continue
        hits = tuple(
            i
            for i, rec in enumerate(blocks)
            if has_unique_match(t.reactants[1], rec.mol)
        )
        if len(hits) < min_compat:
            dropped.append(
                (t.name, f"{len(hits)} compatible second reactants < {min_compat}")
            )
            continue
        kept.append(t)
        compat.append(hits)
    if not kept:
        raise EnvConfigError(
            "no templates retained: every template was dropped by the "
            f"min_compat={min_compat} rule"
        )

    stats = fit_normalizer([rec.mol for rec in blocks])
    features = np.stack(
        [normalize(descriptor_vector(rec.mol), stats) for rec in blocks]
    )
    features.setflags(write=False)
    return BuildingBlockIndex(
        blocks=tuple(blocks),
        templates=tuple(kept),
        compat=tuple(compat),
        features=features,
        stats=stats,
        min_compat=min_compat,
        dropped=tuple(dropped),
    )


# ---------------------------------------------------------------------------
# k-NN action resolution
# ---------------------------------------------------------------------------


def knn(
    index: BuildingBlockIndex, template_idx: int, a: np.ndarray, k: int
) -> list[int]:
    """The k compatible blocks nearest to ``a`` (Euclidean, exact linear scan),
    ties broken by ascending block index.  Returns all of them when k exceeds
    the compatibility list."""
    compat = index.compat[template_idx]
    if compat is None:
        raise EnvConfigError(
            f"template {index.templates[template_idx].name} is unimolecular; "
            "k-NN lookup is undefined"
        )
    if k < 1:
        raise EnvConfigError(f"k must be >= 1, got {k}")
    rows = index.features[list(compat)]
    d2 = np.einsum("ij,ij->i", rows - a, rows - a)
    order = np.argsort(d2, kind="stable")[:k]
    return [compat[i] for i in order]


# ---------------------------------------------------------------------------
# episodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    r1: str
    template: str
    r2: str  # empty for unimolecular templates and failed steps
    product: str  # empty when every candidate application failed
    reward: float
    done: bool
    reason: str  # "", or horizon|no_templates|apply_failed when done


@dataclass
class EpisodeRecord:
    start: str
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def max_reward(self) -> float:
        return max(s.reward for s in self.steps)

    @property
    def final_product(self) -> str:
        for s in reversed(self.steps):
            if s.product:
                return s.product
        return self.start

    @property
    def reactions(self) -> int:
        return len(self.steps)


class SynthesisEnv:
    """Single-owner MDP wrapper around an immutable index.

    The per-step product choice (when one template application yields several
    distinct products) consumes the environment rng, so a fixed seed makes
    whole runs reproducible.
    """

    def __init__(
        self,
        index: BuildingBlockIndex,
        scorer: ScorerFn,
        *,
        max_steps: int = 5,
        k: int = 1,
        floor_reward: float = 0.0,
        seed: int | Sequence[int] | None = None,
    ):
        if max_steps < 1:
            raise EnvConfigError(f"max_steps must be >= 1, got {max_steps}")
        self.index = index
        self.scorer = scorer
        self.max_steps = max_steps
        self.k = k
        self.floor_reward = float(floor_reward)
        self.rng = np.random.default_rng(seed)
        self.state: Molecule | None = None
        self.state_smiles: str = ""
        self.step_index = 0
        #: feature row of the reactant actually consumed by the last step
        #: (None for unimolecular templates and failed steps)
        self.last_executed_a: np.ndarray | None = None

    # -- protocol used by the agent ------------------------------------
    @property
    def state_dim(self) -> int:
        return 1024

    @property
    def action_dim(self) -> int:
        return len(DESCRIPTOR_NAMES)

    @property
    def n_templates(self) -> int:
        return self.index.n_templates

    def state_features(self, mol: Molecule) -> np.ndarray:
        return morgan_fingerprint(mol).astype(np.float64)

    def template_mask(self, mol: Molecule) -> np.ndarray:
        return self.index.template_mask(mol)

    def compat_features(self, template_idx: int) -> np.ndarray:
        compat = self.index.compat[template_idx]
        if compat is None:
            raise EnvConfigError("unimolecular template has no reactant pool")
        return self.index.features[list(compat)]

    def unimolecular(self, template_idx: int) -> bool:
        return self.index.compat[template_idx] is None

    def registry_hash(self) -> str:
        return self.index.registry_hash()

    def reset(
        self,
        rng: np.random.Generator | None = None,
        start: int | None = None,
    ) -> Molecule:
        """Uniform draw over blocks that admit at least one template, or a
        fixed ``start`` block index for paired comparisons."""
        if start is None:
            rng = rng if rng is not None else self.rng
            starts = self.index.start_indices
            pick = starts[int(rng.integers(len(starts)))]
        else:
            pick = int(start)
            if not self.index.template_mask(self.index.blocks[pick].mol).any():
                raise EnvConfigError(
                    f"start block {pick} admits no templates"
                )
        rec = self.index.blocks[pick]
        self.state = rec.mol
        self.state_smiles = rec.smiles
        self.step_index = 0
        return rec.mol

    # -- core transition -------------------------------------------------
    def _apply_one(
        self,
        mol: Molecule,
        template_idx: int,
        block_idx: int | None,
        rng: np.random.Generator,
    ) -> tuple[Molecule, str] | None:
        """Apply template to (mol [, block]) and pick one product uniformly
        among the distinct results.  None when the application fails."""
        template = self.index.templates[template_idx]
        if block_idx is None:
            reactants: tuple[Molecule, ...] = (mol,)
        else:
            reactants = (mol, self.index.blocks[block_idx].mol)
        products = apply_template(template, reactants)
        if not products:
            return None
        pick = int(rng.integers(len(products))) if len(products) > 1 else 0
        product = products[pick]
        return product, write_smiles(product)

    def step(
        self,
        template_idx: int,
        a: np.ndarray | None,
        rng: np.random.Generator | None = None,
    ) -> tuple[Molecule, float, bool, StepRecord]:
        """One reaction: resolve candidates, apply, score, keep the argmax.

        ``a`` is ignored for unimolecular templates.  Raises on a masked
        template — callers must respect the mask.
        """
        if self.state is None:
            raise EnvConfigError("step called before reset")
        rng = rng if rng is not None else self.rng
        mol = self.state
        mask = self.template_mask(mol)
        if not (0 <= template_idx < len(mask)) or not mask[template_idx]:
            raise EnvConfigError(
                f"template index {template_idx} violates the current mask"
            )
        template = self.index.templates[template_idx]

        candidates: list[int | None]
        if self.index.compat[template_idx] is None:
            candidates = [None]
        else:
            if a is None:
                raise EnvConfigError(
                    f"bimolecular template {template.name} needs an action vector"
                )
            candidates = list(knn(self.index, template_idx, np.asarray(a), self.k))

        outcomes: list[tuple[int | None, Molecule, str]] = []
        for block_idx in candidates:
            applied = self._apply_one(mol, template_idx, block_idx, rng)
            if applied is not None:
                outcomes.append((block_idx, applied[0], applied[1]))

        self.step_index += 1
        self.last_executed_a = None
        if not outcomes:
            record = StepRecord(
                r1=self.state_smiles,
                template=template.name,
                r2="",
                product="",
                reward=self.floor_reward,
                done=True,
                reason="apply_failed",
            )
            return mol, self.floor_reward, True, record

        rewards = np.asarray(self.scorer([m for _, m, _ in outcomes]), dtype=float)
        best = int(np.argmax(rewards))
        block_idx, product, product_smiles = outcomes[best]
        reward = float(rewards[best])
        if block_idx is not None:
            self.last_executed_a = self.index.features[block_idx]

        if self.step_index >= self.max_steps:
            done, reason = True, "horizon"
        elif not self.template_mask(product).any():
            done, reason = True, "no_templates"
        else:
            done, reason = False, ""
        record = StepRecord(
            r1=self.state_smiles,
            template=template.name,
            r2="" if block_idx is None else self.index.blocks[block_idx].smiles,
            product=product_smiles,
            reward=reward,
            done=done,
            reason=reason,
        )
        self.state = product
        self.state_smiles = product_smiles
        return product, reward, done, record


# ---------------------------------------------------------------------------
# random-search baseline
# ---------------------------------------------------------------------------


def random_search(
    index: BuildingBlockIndex,
    scorer: ScorerFn,
    budget: int,
    rng: np.random.Generator,
    *,
    max_steps: int = 5,
    floor_reward: float = 0.0,
    starts: Sequence[int] | None = None,
) -> list[EpisodeRecord]:
    """Uniform-random baseline: random valid template, uniform compatible
    second reactant, same termination rules as the learned policy.  ``budget``
    counts reaction attempts (env steps), the same unit as training steps.

    ``starts`` optionally cycles through fixed start blocks instead of uniform
    resets, for paired comparisons.
    """
    env = SynthesisEnv(
        index, scorer, max_steps=max_steps, floor_reward=floor_reward
    )
    episodes: list[EpisodeRecord] = []
    used = 0
    start_pos = 0
    while used < budget:
        if starts is not None:
            env.reset(start=starts[start_pos % len(starts)])
            start_pos += 1
        else:
            env.reset(rng)
        episode = EpisodeRecord(start=env.state_smiles)
        done = False
        while not done and used < budget:
            mask = env.template_mask(env.state)
            valid = np.flatnonzero(mask)
            t_idx = int(valid[int(rng.integers(len(valid)))])
            compat = index.compat[t_idx]
            if compat is None:
                a = None
            else:
                block = compat[int(rng.integers(len(compat)))]
                a = index.features[block]
            _, _, done, record = env.step(t_idx, a, rng)
            episode.steps.append(record)
            used += 1
        if episode.steps:
            episodes.append(episode)
    return episodes


# ---------------------------------------------------------------------------
# episode serialization
# ---------------------------------------------------------------------------


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def episode_csv_rows(episode_index: int, episode: EpisodeRecord) -> list[str]:
    """CSV lines (no trailing newline) for one episode's steps."""
    rows = []
    for step_idx, s in enumerate(episode.steps, start=1):
        fields = [
            str(episode_index),
            str(step_idx),
            s.r1,
            s.template,
            s.r2,
            s.product,
            repr(s.reward),
            "1" if s.done else "0",
            s.reason,
        ]
        rows.append(",".join(_csv_field(f) for f in fields))
    return rows


def write_episode_csv(episodes: Sequence[EpisodeRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(EPISODE_CSV_HEADER + "\n")
        for ep_idx, ep in enumerate(episodes):
            for row in episode_csv_rows(ep_idx, ep):
                fh.write(row + "\n")


def write_quantile_csv(episodes: Sequence[EpisodeRecord], path: str) -> None:
    """Per-step reward quantiles across episodes (boxplot source data)."""
    by_step: dict[int, list[float]] = {}
    for ep in episodes:
        for step_idx, s in enumerate(ep.steps, start=1):
            by_step.setdefault(step_idx, []).append(s.reward)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(QUANTILE_CSV_HEADER + "\n")
        for step_idx in sorted(by_step):
            vals = np.asarray(by_step[step_idx])
            qs = np.quantile(vals, [0.05, 0.25, 0.5, 0.75, 0.95])
            row = [
                str(step_idx),
                str(vals.size),
                repr(float(vals.min())),
                *[repr(float(q)) for q in qs],
                repr(float(vals.max())),
            ]
            fh.write(",".join(row) + "\n")


def write_routes(episodes: Sequence[EpisodeRecord], path: str) -> None:
    """Human-readable synthesis routes, one block per episode."""
    with open(path, "w", encoding="utf-8") as fh:
        for ep_idx, ep in enumerate(episodes):
            fh.write(
                f"episode {ep_idx} (max reward {ep.max_reward:.6f})\n"
                f"  start: {ep.start}\n"
            )
            for step_idx, s in enumerate(ep.steps, start=1):
                partner = f" + {s.r2}" if s.r2 else ""
                outcome = s.product if s.product else "(application failed)"
                fh.write(
                    f"  step {step_idx}: {s.template}{partner} -> {outcome}"
                    f"  reward {s.reward:.6f}\n"
                )
                if s.done and s.reason:
                    fh.write(f"  terminal: {s.reason}\n")
            fh.write("\n")
