"""Actor-critic agents over extracted features.

The plain A2C feeds the same feature vector to both heads.  The attention
variant ("atta2c") passes the features through two independent gating
layers first, one for the actor and one for the critic, so each head can
weight the feature dimensions differently.  Curious agent kinds carry a
curiosity module alongside the same actor-critic core.
"""

from dataclasses import dataclass

import numpy as np

from .attention import AttentionLayer, gate
from .autodiff import (
    FLOAT,
    Tensor,
    add,
    categorical_entropy,
    categorical_log_prob,
    categorical_sample,
    detach,
    mul,
    neg,
    no_grad,
    reduce_mean,
    reshape,
    scale,
    softmax,
    square,
    sub,
)
from .curiosity import CuriosityConfig, CuriosityModule, variant_for_kind
from .layers import MLP, Affine, Module

AGENT_KINDS = ("a2c", "atta2c", "icm", "icm_attn1", "icm_attn2", "rcm")

FEATURE_DIM = 32
HIDDEN_DIM = 64


class FeatureExtractor(Module):
    """Two relu layers into a fixed-width feature vector, shared by the
    policy heads and any curiosity models."""

    def __init__(self, obs_dim, feature_dim, rng, hidden_dim=HIDDEN_DIM):
        super().__init__()
        self.obs_dim = obs_dim
        self.feature_dim = feature_dim
        self.net = MLP(obs_dim, [hidden_dim, hidden_dim], feature_dim, rng, "features")

    def __call__(self, obs):
        return self.net(obs)


@dataclass
class PolicyOutput:
    logits: Tensor  # (A,) or (B, A)
    probs: Tensor
    values: Tensor  # () or (B,)
    features: Tensor  # (N,) or (B, N)


@dataclass
class A2CLosses:
    policy_loss: Tensor
    value_loss: Tensor
    entropy: Tensor
    total: Tensor  # policy + c_v * value - c_e * entropy


class Agent(Module):
    """One agent kind: feature extractor, actor/critic heads, optional
    head-side attention, optional curiosity module.  All parameters are
    reachable through ``named_parameters`` for the optimizer."""

    def __init__(
        self,
        kind,
        obs_dim,
        num_actions,
        feature_dim=FEATURE_DIM,
        hidden_dim=HIDDEN_DIM,
        curiosity=None,
        rng=None,
    ):
        super().__init__()
        if kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind: {kind!r}")
        if rng is None:
            rng = np.random.default_rng(0)
        self.kind = kind
        self.obs_dim = obs_dim
        self.num_actions = num_actions
        self.feature_dim = feature_dim
        self.hidden_dim = hidden_dim
        self.extractor = FeatureExtractor(obs_dim, feature_dim, rng, hidden_dim)
        self.actor = Affine(feature_dim, num_actions, rng, "actor")
        self.critic = Affine(feature_dim, 1, rng, "critic")
        if kind == "atta2c":
            # separate gates so the two heads can attend differently
            self.attn_actor = AttentionLayer(feature_dim, feature_dim, "attn_actor")
            self.attn_critic = AttentionLayer(feature_dim, feature_dim, "attn_critic")
        variant = variant_for_kind(kind)
        if variant != "none":
            cfg = curiosity if curiosity is not None else CuriosityConfig()
            cfg = cfg.resolve(kind)
            self.curiosity = CuriosityModule(variant, feature_dim, num_actions, rng, cfg)
        else:
            self.curiosity = None

    # -- forward passes ----------------------------------------------------

    def _tensorize(self, obs):
        t = obs if isinstance(obs, Tensor) else Tensor(np.asarray(obs, dtype=FLOAT))
        if t.data.shape[-1] != self.obs_dim:
            raise ValueError(
                f"observation dim {t.data.shape[-1]} does not match "
                f"agent obs_dim {self.obs_dim}"
            )
        return t

    def features(self, obs):
        return self.extractor(self._tensorize(obs))

    def forward(self, obs):
        """Full policy output; records on the tape unless inside no_grad."""
        phi = self.features(obs)
        if self.kind == "atta2c":
            x_actor = gate(self.attn_actor, phi, phi)
            x_critic = gate(self.attn_critic, phi, phi)
        else:
            x_actor = x_critic = phi
        logits = self.actor(x_actor)
        vshape = () if phi.data.ndim == 1 else (phi.data.shape[0],)
        values = reshape(self.critic(x_critic), vshape)
        return PolicyOutput(
            logits=logits, probs=softmax(logits), values=values, features=phi
        )

    # -- rollout-time interface (no recording) -----------------------------

    def act(self, obs, rng):
        """Sample actions from the current policy."""
        with no_grad():
            return categorical_sample(self.forward(obs).probs, rng)

    def greedy_act(self, obs):
        """Most probable action(s); ties resolve to the lowest index."""
        with no_grad():
            probs = self.forward(obs).probs.data
        return np.argmax(probs, axis=-1)

    def value(self, obs):
        with no_grad():
            return self.forward(obs).values.data


def a2c_loss(outputs, actions, returns, value_coef=0.5, entropy_coef=0.01):
    """Advantage actor-critic objective over a batch.

    The advantage (return minus value) is treated as a constant in the
    policy term, so the critic is trained only by the squared error.
    """
    r = returns if isinstance(returns, Tensor) else Tensor(np.asarray(returns, dtype=FLOAT))
    if r.data.shape != outputs.values.data.shape:
        raise ValueError(
            f"returns shape {r.data.shape} does not match values {outputs.values.data.shape}"
        )
    advantage = detach(sub(r, outputs.values))
    log_probs = categorical_log_prob(outputs.probs, actions)
    policy_loss = neg(reduce_mean(mul(log_probs, advantage)))
    value_loss = reduce_mean(square(sub(r, outputs.values)))
    entropy = reduce_mean(categorical_entropy(outputs.probs))
    total = sub(
        add(policy_loss, scale(value_loss, value_coef)), scale(entropy, entropy_coef)
    )
    return A2CLosses(policy_loss=policy_loss, value_loss=value_loss, entropy=entropy, total=total)


# --------------------------------------------------------------------------
# policies for rollout collection and evaluation
# --------------------------------------------------------------------------


class SamplingPolicy:
    """Stochastic rollout policy: actions drawn from the live agent."""

    def __init__(self, agent, rng):
        self.agent = agent
        self.rng = rng

    def act(self, obs):
        return np.atleast_1d(self.agent.act(obs, self.rng))

    def value(self, obs):
        return np.atleast_1d(self.agent.value(obs))


class GreedyPolicy:
    """Deterministic policy taking the most probable action."""

    def __init__(self, agent):
        self.agent = agent

    def act(self, obs):
        return np.atleast_1d(self.agent.greedy_act(obs))

    def value(self, obs):
        return np.atleast_1d(self.agent.value(obs))


class RandomPolicy:
    """Uniform random actions; used by the unlearnable-noise probe."""

    def __init__(self, num_actions, rng):
        self.num_actions = num_actions
        self.rng = rng

    def act(self, obs):
        n = 1 if np.asarray(obs).ndim == 1 else np.asarray(obs).shape[0]
        return self.rng.integers(self.num_actions, size=n)

    def value(self, obs):
        n = 1 if np.asarray(obs).ndim == 1 else np.asarray(obs).shape[0]
        return np.zeros(n)


def build_agent(kind, obs_dim, num_actions, feature_dim=FEATURE_DIM,
                hidden_dim=HIDDEN_DIM, curiosity=None, seed=0):
    """Construct an agent with deterministic initialization from a seed
    (or an already-built generator)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return Agent(kind, obs_dim, num_actions, feature_dim=feature_dim,
                 hidden_dim=hidden_dim, curiosity=curiosity, rng=rng)


def agent_meta(agent):
    """Everything needed to rebuild the agent from a checkpoint."""
    meta = {
        "kind": agent.kind,
        "obs_dim": agent.obs_dim,
        "num_actions": agent.num_actions,
        "feature_dim": agent.feature_dim,
        "hidden_dim": agent.hidden_dim,
    }
    if agent.curiosity is not None:
        meta["curiosity"] = agent.curiosity.config.to_dict()
    return meta


def agent_from_meta(meta):
    """Rebuild an agent skeleton from checkpoint metadata (weights are
    loaded separately via ``load_state_dict``)."""
    curiosity = None
    if "curiosity" in meta and meta["curiosity"] is not None:
        curiosity = CuriosityConfig(**meta["curiosity"])
    return build_agent(
        meta["kind"],
        meta["obs_dim"],
        meta["num_actions"],
        feature_dim=meta.get("feature_dim", FEATURE_DIM),
        hidden_dim=meta.get("hidden_dim", HIDDEN_DIM),
        curiosity=curiosity,
        seed=0,
    )
