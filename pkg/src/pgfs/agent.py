"""TD3 learner with hierarchical (template, continuous-reactant) actions.

The actor is a pair of networks: ``f`` scores reaction templates from the
state fingerprint, a Gumbel-softmax over the masked scores picks a template
differentiably, and ``pi`` maps (state, template vector) to a point in the
continuous reactant-descriptor space.  Twin critics score (state, template,
action) triples; updates follow TD3 (clipped-noise target smoothing, min of
twin targets, delayed actor and target updates) plus a cross-entropy term
tying ``f``'s logits to the templates actually executed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import Adam, DenseNet, polyak_update

__all__ = [
    "AgentConfig",
    "PGFSAgent",
    "ReplayBuffer",
    "gumbel_noise",
    "gumbel_softmax",
    "gumbel_softmax_backward",
    "masked_logits",
]

_NEG_INF = -np.inf


# ---------------------------------------------------------------------------
# Gumbel-softmax template selection
# ---------------------------------------------------------------------------


def gumbel_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard Gumbel(0,1) samples, guarded away from log(0)."""
    u = rng.random(shape)
    tiny = np.finfo(np.float64).tiny
    return -np.log(-np.log(np.clip(u, tiny, 1.0 - 1e-16)))


def masked_logits(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if not mask.any(axis=-1).all():
        raise ValueError("template mask must have at least one valid entry")
    return np.where(mask, logits, _NEG_INF)


def gumbel_softmax(
    logits: np.ndarray,
    mask: np.ndarray,
    tau: float,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
):
    """Differentiable masked categorical sample.

    Returns ``(soft, hard_idx)``: the softmax of (masked logits + Gumbel
    noise) / tau — masked entries exactly 0 — and its argmax.  Pass ``noise``
    to fix the perturbation (used when backpropagating through a sample);
    ``noise=0`` with ``rng=None`` gives the deterministic masked softmax.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    z = masked_logits(np.asarray(logits, dtype=np.float64), mask)
    if noise is None:
        noise = gumbel_noise(rng, z.shape) if rng is not None else 0.0
    z = z + np.asarray(noise)
    z = np.where(mask, z, _NEG_INF) / tau
    zmax = z.max(axis=-1, keepdims=True)
    e = np.exp(z - zmax)
    soft = e / e.sum(axis=-1, keepdims=True)
    hard = np.argmax(z, axis=-1)
    return soft, hard


def gumbel_softmax_backward(
    soft: np.ndarray, dsoft: np.ndarray, tau: float
) -> np.ndarray:
    """Gradient of the soft sample w.r.t. the (pre-noise) logits at fixed
    noise: the softmax Jacobian-vector product scaled by 1/tau.  Masked
    entries have probability 0, so their gradient vanishes automatically."""
    dot = (dsoft * soft).sum(axis=-1, keepdims=True)
    return soft * (dsoft - dot) / tau


# ---------------------------------------------------------------------------
# replay buffer
# ---------------------------------------------------------------------------


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions with bit-packed fingerprints.

    States enter as 0/1 vectors of ``state_bits`` and are stored via
    ``np.packbits`` (8x smaller); masks are stored as uint8 0/1 since the
    template count is small.
    """

    def __init__(self, capacity: int, state_bits: int, n_templates: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        if state_bits % 8:
            raise ValueError("state_bits must be a multiple of 8")
        self.capacity = capacity
        self.state_bits = state_bits
        self.n_templates = n_templates
        self.action_dim = action_dim
        packed = state_bits // 8
        self.s = np.zeros((capacity, packed), dtype=np.uint8)
        self.mask_s = np.zeros((capacity, n_templates), dtype=np.uint8)
        self.t_idx = np.zeros(capacity, dtype=np.int64)
        self.a = np.zeros((capacity, action_dim), dtype=np.float64)
        self.r = np.zeros(capacity, dtype=np.float64)
        self.s2 = np.zeros((capacity, packed), dtype=np.uint8)
        self.mask_s2 = np.zeros((capacity, n_templates), dtype=np.uint8)
        self.done = np.zeros(capacity, dtype=np.uint8)
        self.size = 0
        self.pos = 0

    def __len__(self) -> int:
        return self.size

    def add(
        self,
        s: np.ndarray,
        mask_s: np.ndarray,
        t_idx: int,
        a: np.ndarray,
        r: float,
        s2: np.ndarray,
        mask_s2: np.ndarray,
        done: bool,
    ) -> None:
        i = self.pos
        self.s[i] = np.packbits(np.asarray(s, dtype=np.uint8))
        self.mask_s[i] = np.asarray(mask_s, dtype=np.uint8)
        self.t_idx[i] = t_idx
        self.a[i] = a
        self.r[i] = r
        self.s2[i] = np.packbits(np.asarray(s2, dtype=np.uint8))
        self.mask_s2[i] = np.asarray(mask_s2, dtype=np.uint8)
        self.done[i] = 1 if done else 0
        self.pos = (self.pos + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _unpack(self, packed: np.ndarray) -> np.ndarray:
        bits = np.unpackbits(packed, axis=-1, count=self.state_bits)
        return bits.astype(np.float64)

    def sample(self, batch: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        if self.size < batch:
            raise ValueError(f"buffer holds {self.size} < batch {batch}")
        idx = rng.integers(self.size, size=batch)
        return {
            "s": self._unpack(self.s[idx]),
            "mask_s": self.mask_s[idx].astype(bool),
            "t_idx": self.t_idx[idx].copy(),
            "a": self.a[idx].copy(),
            "r": self.r[idx].copy(),
            "s2": self._unpack(self.s2[idx]),
            "mask_s2": self.mask_s2[idx].astype(bool),
            "done": self.done[idx].astype(np.float64),
        }

    # -- persistence -------------------------------------------------------
    def state_arrays(self) -> dict[str, np.ndarray]:
        """Filled storage only, plus scalars, for checkpointing."""
        n = self.size
        return {
            "s": self.s[:n],
            "mask_s": self.mask_s[:n],
            "t_idx": self.t_idx[:n],
            "a": self.a[:n],
            "r": self.r[:n],
            "s2": self.s2[:n],
            "mask_s2": self.mask_s2[:n],
            "done": self.done[:n],
            "meta": np.array([self.size, self.pos, self.capacity], dtype=np.int64),
        }

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        size, pos, capacity = (int(v) for v in arrays["meta"])
        if capacity != self.capacity:
            raise ValueError(
                f"checkpoint buffer capacity {capacity} != configured {self.capacity}"
            )
        self.size, self.pos = size, pos
        for name in ("s", "mask_s", "t_idx", "a", "r", "s2", "mask_s2", "done"):
            self.__dict__[name][:size] = arrays[name]


# ---------------------------------------------------------------------------
# the agent
# ---------------------------------------------------------------------------


@dataclass
class AgentConfig:
    """Network and optimizer hyperparameters (TD3 defaults)."""

    gamma: float = 0.99
    batch: int = 32
    lr_actor: float = 1e-4  # f and pi
    lr_critic: float = 3e-4
    polyak_tau: float = 0.005
    explore_sigma: float = 0.1
    policy_noise: float = 0.2
    noise_clip: float = 0.2
    actor_delay: int = 2
    f_hidden: tuple[int, ...] = (256, 128, 128)
    pi_hidden: tuple[int, ...] = (256, 256, 167)
    q_hidden: tuple[int, ...] = (256, 64, 16)

    def validate(self) -> None:
        if not 0.0 < self.polyak_tau <= 1.0:
            raise ValueError("polyak_tau must be in (0, 1]")
        for name in ("gamma", "batch", "lr_actor", "lr_critic", "explore_sigma",
                     "policy_noise", "noise_clip", "actor_delay"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class PGFSAgent:
    """Actor (f, pi), twin critics, their targets, and the TD3 update."""

    def __init__(
        self,
        state_dim: int,
        n_templates: int,
        action_dim: int,
        config: AgentConfig,
        rng: np.random.Generator,
    ):
        config.validate()
        self.state_dim = state_dim
        self.n_templates = n_templates
        self.action_dim = action_dim
        self.config = config

        self.f = DenseNet(
            [state_dim, *config.f_hidden, n_templates], rng, out_act="linear"
        )
        self.pi = DenseNet(
            [state_dim + n_templates, *config.pi_hidden, action_dim],
            rng,
            out_act="tanh",
        )
        q_dims = [state_dim + n_templates + action_dim, *config.q_hidden, 1]
        self.q1 = DenseNet(q_dims, rng, out_act="linear")
        self.q2 = DenseNet(q_dims, rng, out_act="linear")
        self.f_target = self.f.copy()
        self.pi_target = self.pi.copy()
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()

        self.opt_f = Adam(self.f.parameters(), config.lr_actor)
        self.opt_pi = Adam(self.pi.parameters(), config.lr_actor)
        self.opt_q1 = Adam(self.q1.parameters(), config.lr_critic)
        self.opt_q2 = Adam(self.q2.parameters(), config.lr_critic)

        self.critic_updates = 0

    # -- acting -------------------------------------------------------------
    def act(
        self,
        state: np.ndarray,
        mask: np.ndarray,
        tau: float,
        explore: bool,
        rng: np.random.Generator,
    ) -> tuple[int, np.ndarray, np.ndarray]:
        """(template index, template vector fed to pi, continuous action).

        Exploring: Gumbel-sampled soft template vector at temperature tau and
        Gaussian noise on the continuous action.  Greedy: argmax of masked
        template scores as an exact one-hot, noiseless.
        """
        logits = self.f.forward(state)
        if explore:
            tvec, hard = gumbel_softmax(logits, mask, tau, rng=rng)
            t_idx = int(hard)
        else:
            t_idx = int(np.argmax(masked_logits(logits, mask)))
            tvec = np.zeros(self.n_templates)
            tvec[t_idx] = 1.0
        a = self.pi.forward(np.concatenate([state, tvec]))
        if explore:
            a = a + rng.normal(0.0, self.config.explore_sigma, size=a.shape)
        return t_idx, tvec, np.clip(a, -1.0, 1.0)

    # -- learning -----------------------------------------------------------
    def _one_hot(self, idx: np.ndarray) -> np.ndarray:
        out = np.zeros((idx.shape[0], self.n_templates))
        out[np.arange(idx.shape[0]), idx] = 1.0
        return out

    def compute_targets(
        self, batch: dict[str, np.ndarray], gumbel_tau: float, rng: np.random.Generator
    ) -> np.ndarray:
        """Bellman targets: target-f picks the next template (hard one-hot of
        a Gumbel sample), target-pi proposes the next action with clipped
        smoothing noise, and the smaller of the twin target critics scores
        it."""
        cfg = self.config
        logits2 = self.f_target.forward(batch["s2"])
        _, hard2 = gumbel_softmax(logits2, batch["mask_s2"], gumbel_tau, rng=rng)
        t2 = self._one_hot(hard2)
        a2 = self.pi_target.forward(np.concatenate([batch["s2"], t2], axis=1))
        smooth = np.clip(
            rng.normal(0.0, cfg.policy_noise, size=a2.shape),
            -cfg.noise_clip,
            cfg.noise_clip,
        )
        a2 = np.clip(a2 + smooth, -1.0, 1.0)
        target_in = np.concatenate([batch["s2"], t2, a2], axis=1)
        q_min = np.minimum(
            self.q1_target.forward(target_in)[:, 0],
            self.q2_target.forward(target_in)[:, 0],
        )
        return batch["r"] + cfg.gamma * (1.0 - batch["done"]) * q_min

    def actor_gradients(
        self,
        s: np.ndarray,
        mask_s: np.ndarray,
        t_onehot: np.ndarray,
        gumbel_tau: float,
        noise: np.ndarray,
    ) -> tuple[float, float, list[np.ndarray], list[np.ndarray]]:
        """Losses and parameter gradients for one actor step at fixed Gumbel
        noise: maximize Q1(s, Actor(s)) through pi and (via the soft Gumbel
        sample) through f, plus cross-entropy from f's logits to the executed
        templates.  Returns (actor_loss, ce_loss, pi_grads, f_grads)."""
        B = s.shape[0]
        logits, f_cache = self.f.forward_cache(s)
        soft, _ = gumbel_softmax(logits, mask_s, gumbel_tau, noise=noise)
        pi_in = np.concatenate([s, soft], axis=1)
        a_pi, pi_cache = self.pi.forward_cache(pi_in)
        q_in = np.concatenate([s, soft, a_pi], axis=1)
        q, q_cache = self.q1.forward_cache(q_in)
        actor_loss = float(-q.mean())

        # d(-mean Q1)/d inputs; critic parameters stay frozen here
        dq_in, _ = self.q1.backward(q_cache, np.full_like(q, -1.0 / B))
        d_soft = dq_in[:, self.state_dim : self.state_dim + self.n_templates]
        d_a = dq_in[:, self.state_dim + self.n_templates :]
        dpi_in, pi_grads = self.pi.backward(pi_cache, d_a)
        d_soft = d_soft + dpi_in[:, self.state_dim :]
        d_logits = gumbel_softmax_backward(soft, d_soft, gumbel_tau)

        # auxiliary cross-entropy on the unmasked logits (log-sum-exp form)
        zmax = logits.max(axis=1, keepdims=True)
        e = np.exp(logits - zmax)
        sum_e = e.sum(axis=1, keepdims=True)
        p = e / sum_e
        lse = (zmax + np.log(sum_e))[:, 0]
        ce = float((lse - (t_onehot * logits).sum(axis=1)).mean())
        d_logits = d_logits + (p - t_onehot) / B

        _, f_grads = self.f.backward(f_cache, d_logits)
        return actor_loss, ce, pi_grads, f_grads

    def td3_update(
        self, batch: dict[str, np.ndarray], gumbel_tau: float, rng: np.random.Generator
    ) -> dict[str, float]:
        """One TD3 step on a sampled batch; actor/targets every
        ``actor_delay``-th call.  Returns batch-mean losses (actor entries
        are NaN on critic-only calls)."""
        cfg = self.config
        B = batch["r"].shape[0]
        t_onehot = self._one_hot(batch["t_idx"])
        y = self.compute_targets(batch, gumbel_tau, rng)

        # critics: batch-mean squared error
        critic_in = np.concatenate([batch["s"], t_onehot, batch["a"]], axis=1)
        losses: dict[str, float] = {}
        for name, net, opt in (("q1", self.q1, self.opt_q1), ("q2", self.q2, self.opt_q2)):
            q, cache = net.forward_cache(critic_in)
            err = q[:, 0] - y
            losses[f"{name}_loss"] = float((err**2).mean())
            _, grads = net.backward(cache, (2.0 * err / B)[:, None])
            opt.step(net.parameters(), grads)
        losses["critic_loss"] = 0.5 * (losses["q1_loss"] + losses["q2_loss"])
        losses["actor_loss"] = float("nan")
        losses["f_ce_loss"] = float("nan")

        self.critic_updates += 1
        did_actor = self.critic_updates % cfg.actor_delay == 0
        if did_actor:
            noise = gumbel_noise(rng, (B, self.n_templates))
            actor_loss, ce, pi_grads, f_grads = self.actor_gradients(
                batch["s"], batch["mask_s"], t_onehot, gumbel_tau, noise
            )
            self.opt_pi.step(self.pi.parameters(), pi_grads)
            self.opt_f.step(self.f.parameters(), f_grads)
            losses["actor_loss"] = actor_loss
            losses["f_ce_loss"] = ce
            for target, live in (
                (self.f_target, self.f),
                (self.pi_target, self.pi),
                (self.q1_target, self.q1),
                (self.q2_target, self.q2),
            ):
                polyak_update(target, live, cfg.polyak_tau)

        checked = losses if did_actor else {
            k: v for k, v in losses.items() if k not in ("actor_loss", "f_ce_loss")
        }
        if not all(np.isfinite(v) for v in checked.values()):
            raise FloatingPointError(f"non-finite loss: {losses}")
        return losses

    # -- persistence ---------------------------------------------------------
    def network_items(self) -> list[tuple[str, DenseNet]]:
        return [
            ("f", self.f),
            ("pi", self.pi),
            ("q1", self.q1),
            ("q2", self.q2),
            ("f_target", self.f_target),
            ("pi_target", self.pi_target),
            ("q1_target", self.q1_target),
            ("q2_target", self.q2_target),
        ]

    def optimizer_items(self) -> list[tuple[str, Adam]]:
        return [
            ("f", self.opt_f),
            ("pi", self.opt_pi),
            ("q1", self.opt_q1),
            ("q2", self.opt_q2),
        ]
