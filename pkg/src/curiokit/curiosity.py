"""Curiosity variants built around forward/inverse dynamics models.

* ``icm``        -- plain forward/inverse models over extracted features.
* ``icm_attn1``  -- one gating layer over the concatenated [features, action]
  input of the forward model.
* ``icm_attn2``  -- separate gating layers for features and action, gated
  before concatenation.
* ``rcm``        -- forward loss becomes a learned weighted sum of per-dim
  errors, with the true next features as the control input; the intrinsic
  reward can share those weights.

The forward prediction error is the intrinsic reward.  The inverse loss is
what trains the feature extractor; the forward path sees features through a
stop-gradient by default so it cannot collapse them.
"""

from dataclasses import dataclass, replace

import numpy as np

from .attention import AttentionLayer, attn_weights, gate, weighted_forward_loss
from .autodiff import (
    FLOAT,
    Tensor,
    add,
    categorical_entropy,
    categorical_log_prob,
    concat,
    detach,
    neg,
    no_grad,
    reduce_mean,
    scale,
    softmax,
    square,
    sub,
)
from .layers import MLP, Module

VARIANTS = ("none", "icm", "icm_attn1", "icm_attn2", "rcm")
FEATURE_GRAD_MODES = ("stop", "flow")

DYNAMICS_HIDDEN = 64


def variant_for_kind(kind):
    """Map an agent kind to its curiosity variant."""
    return kind if kind in VARIANTS else "none"


@dataclass
class CuriosityConfig:
    variant: str = "auto"  # "auto" resolves to the agent kind
    beta: float = 0.2  # forward/inverse mixing weight in the objective
    eta: float = 1.0  # intrinsic reward scale
    feature_grad: str = "stop"  # forward path: stop|flow gradients into features
    weighted_reward: bool = True  # rcm: weight the reward like the loss
    weight_entropy_coef: float = 0.0  # optional anti-collapse regularizer

    def __post_init__(self):
        if self.variant not in VARIANTS + ("auto",):
            raise ValueError(f"unknown curiosity variant: {self.variant!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.eta <= 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.feature_grad not in FEATURE_GRAD_MODES:
            raise ValueError(f"feature_grad must be one of {FEATURE_GRAD_MODES}")
        if self.weight_entropy_coef < 0.0:
            raise ValueError("weight_entropy_coef must be >= 0")

    def resolve(self, kind):
        """Pin the variant to the agent kind; explicit mismatches are errors."""
        wanted = variant_for_kind(kind)
        if self.variant == "auto":
            return replace(self, variant=wanted)
        if self.variant != wanted:
            raise ValueError(
                f"curiosity variant {self.variant!r} conflicts with agent kind {kind!r}"
            )
        return self

    def to_dict(self):
        return {
            "variant": self.variant,
            "beta": self.beta,
            "eta": self.eta,
            "feature_grad": self.feature_grad,
            "weighted_reward": self.weighted_reward,
            "weight_entropy_coef": self.weight_entropy_coef,
        }


@dataclass
class CuriosityOutputs:
    j_fwd: Tensor  # forward loss entering the combined objective
    j_inv: Tensor
    intrinsic_rewards: np.ndarray  # per transition, no gradients
    errors_sq: Tensor  # per-dim squared forward errors
    weight_stats: dict  # per-layer diagnostics (entropy, mass split)


class CuriosityModule(Module):
    """Dynamics models plus the attention layers of the chosen variant."""

    def __init__(self, variant, feature_dim, num_actions, rng, config):
        super().__init__()
        if variant not in VARIANTS or variant == "none":
            raise ValueError(f"cannot build a curiosity module for variant {variant!r}")
        if config.variant != variant:
            raise ValueError(
                f"config variant {config.variant!r} does not match module {variant!r}"
            )
        self.variant = variant
        self.feature_dim = feature_dim
        self.num_actions = num_actions
        self.config = config
        in_dim = feature_dim + num_actions
        self.forward_model = MLP(in_dim, [DYNAMICS_HIDDEN], feature_dim, rng, "forward_model")
        self.inverse_model = MLP(2 * feature_dim, [DYNAMICS_HIDDEN], num_actions, rng,
                                 "inverse_model")
        if variant == "icm_attn1":
            self.attn_concat = AttentionLayer(in_dim, in_dim, "attn_concat")
        elif variant == "icm_attn2":
            self.attn_features = AttentionLayer(feature_dim, feature_dim, "attn_features")
            self.attn_actions = AttentionLayer(num_actions, num_actions, "attn_actions")
        elif variant == "rcm":
            self.loss_weights = AttentionLayer(feature_dim, feature_dim, "loss_weights",
                                               mode="loss_weight")


def one_hot_actions(actions, num_actions):
    a = np.asarray(actions)
    out = np.zeros(a.shape + (num_actions,), dtype=FLOAT)
    np.put_along_axis(out, a[..., None], 1.0, axis=-1)
    return out


def forward_input(module, phi_t, a_onehot):
    """Assemble the forward model's input for the module's variant."""
    a = a_onehot if isinstance(a_onehot, Tensor) else Tensor(np.asarray(a_onehot, dtype=FLOAT))
    if a.data.shape[-1] != module.num_actions:
        raise ValueError(
            f"action one-hot dim {a.data.shape[-1]} != {module.num_actions}"
        )
    if module.variant == "icm_attn2":
        return concat([gate(module.attn_features, phi_t, phi_t),
                       gate(module.attn_actions, a, a)])
    x = concat([phi_t, a])
    if module.variant == "icm_attn1":
        return gate(module.attn_concat, x, x)
    return x


def icm_forward_loss(module, phi_t, a_onehot, phi_next):
    """Mean squared error of predicted next features; the per-dim squared
    errors come back too so weighted variants can reuse them.

    The target is always a constant; whether the input features pass
    gradients is the config's feature_grad policy.
    """
    phi_in = phi_t if module.config.feature_grad == "flow" else detach(phi_t)
    predicted = module.forward_model(forward_input(module, phi_in, a_onehot))
    errors_sq = square(sub(predicted, detach(phi_next)))
    return reduce_mean(errors_sq), errors_sq


def rcm_forward_loss(module, errors_sq, phi_next):
    """Weighted per-dim forward loss with the true next features as the
    control; the control never passes gradients to the extractor."""
    if module.variant != "rcm":
        raise ValueError(f"weighted forward loss needs an rcm module, got {module.variant!r}")
    return weighted_forward_loss(module.loss_weights, errors_sq, detach(phi_next))


def icm_inverse_loss(module, phi_t, phi_next, actions):
    """Cross-entropy of the inverse model's action prediction from
    consecutive features; gradients flow into the extractor here."""
    logits = module.inverse_model(concat([phi_t, phi_next]))
    log_probs = categorical_log_prob(softmax(logits), actions)
    return neg(reduce_mean(log_probs))


def intrinsic_reward(module, errors_sq, phi_next=None):
    """Per-transition curiosity reward from the forward errors (no
    gradients).  Weighted variants need phi_next as control."""
    errs = errors_sq.data if isinstance(errors_sq, Tensor) else np.asarray(errors_sq, dtype=FLOAT)
    half_eta = 0.5 * module.config.eta
    if module.variant == "rcm" and module.config.weighted_reward:
        if phi_next is None:
            raise ValueError("weighted intrinsic reward needs phi_next as control")
        control = phi_next if isinstance(phi_next, Tensor) else Tensor(np.asarray(phi_next, dtype=FLOAT))
        with no_grad():
            w = attn_weights(module.loss_weights, detach(control)).data
        return half_eta * np.sum(w * errs, axis=-1)
    return half_eta * np.mean(errs, axis=-1)


def combined_loss(j_a2c, j_fwd, j_inv, beta):
    """Total objective: actor-critic loss plus beta-mixed dynamics losses."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    return add(j_a2c, add(scale(j_fwd, beta), scale(j_inv, 1.0 - beta)))


def _mean_entropy(weights):
    w = weights.data if isinstance(weights, Tensor) else np.asarray(weights)
    terms = np.where(w > 0.0, w * np.log(np.where(w > 0.0, w, 1.0)), 0.0)
    return float(np.mean(-np.sum(terms, axis=-1)))


def weight_stats(module, phi_t, a_onehot, phi_next):
    """Read-only attention diagnostics: mean weight entropy per layer and,
    for the concat gate, how much mass lands on feature vs action dims."""
    stats = {}
    with no_grad():
        if module.variant == "icm_attn1":
            a_t = (a_onehot if isinstance(a_onehot, Tensor)
                   else Tensor(np.asarray(a_onehot, dtype=FLOAT)))
            x = concat([phi_t, a_t])
            w = attn_weights(module.attn_concat, x).data
            stats["attn_concat"] = {
                "entropy": _mean_entropy(w),
                "feature_mass": float(np.mean(np.sum(w[..., : module.feature_dim], axis=-1))),
                "action_mass": float(np.mean(np.sum(w[..., module.feature_dim :], axis=-1))),
                "mean_weights": np.mean(np.atleast_2d(w), axis=0).tolist(),
            }
        elif module.variant == "icm_attn2":
            wf = attn_weights(module.attn_features, phi_t).data
            a = a_onehot if isinstance(a_onehot, Tensor) else Tensor(np.asarray(a_onehot, dtype=FLOAT))
            wa = attn_weights(module.attn_actions, a).data
            stats["attn_features"] = {
                "entropy": _mean_entropy(wf),
                "mean_weights": np.mean(np.atleast_2d(wf), axis=0).tolist(),
            }
            stats["attn_actions"] = {
                "entropy": _mean_entropy(wa),
                "mean_weights": np.mean(np.atleast_2d(wa), axis=0).tolist(),
            }
        elif module.variant == "rcm":
            w = attn_weights(module.loss_weights, detach(phi_next)).data
            stats["loss_weights"] = {
                "entropy": _mean_entropy(w),
                "mean_weights": np.mean(np.atleast_2d(w), axis=0).tolist(),
            }
    return stats


def curiosity_terms(module, phi_t, actions, phi_next):
    """Everything the trainer needs from one batch: losses, intrinsic
    rewards, and attention diagnostics."""
    a_onehot = one_hot_actions(actions, module.num_actions)
    j_fwd, errors_sq = icm_forward_loss(module, phi_t, a_onehot, phi_next)
    if module.variant == "rcm":
        j_fwd = rcm_forward_loss(module, errors_sq, phi_next)
        coef = module.config.weight_entropy_coef
        if coef > 0.0:
            w = attn_weights(module.loss_weights, detach(phi_next))
            j_fwd = sub(j_fwd, scale(reduce_mean(categorical_entropy(w)), coef))
    j_inv = icm_inverse_loss(module, phi_t, phi_next, actions)
    rewards = np.atleast_1d(intrinsic_reward(module, errors_sq, phi_next))
    return CuriosityOutputs(
        j_fwd=j_fwd,
        j_inv=j_inv,
        intrinsic_rewards=rewards,
        errors_sq=errors_sq,
        weight_stats=weight_stats(module, phi_t, a_onehot, phi_next),
    )
