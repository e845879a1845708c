"""Attention over vector positions: a learned map from a control vector to
a probability distribution, used to gate a target vector or to weight a
per-dimension loss.

One affine layer plus softmax realizes the distribution.  Projection and
bias start at zero, so a fresh layer is exactly uniform: gates reduce to
the identity and loss weighting reduces to the plain mean, which makes the
attention agents start out equivalent to their attention-free baselines.
"""

import numpy as np

from .autodiff import (
    FLOAT,
    Parameter,
    Tensor,
    ShapeMismatch,
    affine,
    mul,
    no_grad,
    reduce_mean,
    reduce_sum,
    scale,
    softmax,
)
from .layers import Module

MODES = ("gate", "loss_weight")


class AttentionLayer(Module):
    """Maps a control vector (control_dim,) to a distribution over
    target_dim positions."""

    def __init__(self, control_dim, target_dim, name, mode="gate"):
        if mode not in MODES:
            raise ValueError(f"unknown attention mode: {mode!r}")
        self.control_dim = control_dim
        self.target_dim = target_dim
        self.mode = mode
        self.projection = Parameter(
            np.zeros((target_dim, control_dim), dtype=FLOAT), f"{name}.projection"
        )
        self.bias = Parameter(np.zeros(target_dim, dtype=FLOAT), f"{name}.bias")


def attn_weights(layer, control):
    """Probability vector over the layer's target positions; differentiable
    w.r.t. both control and the projection parameters."""
    if control.data.shape[-1] != layer.control_dim:
        raise ShapeMismatch("attn_weights", control.data.shape, (layer.control_dim,))
    return softmax(affine(control, layer.projection, layer.bias))


def gate(layer, target, control):
    """Rescaled soft selection: target_dim * weights(control) * target.

    The rescaling makes uniform weights an exact identity, so "no
    preference" leaves the gated vector untouched.
    """
    if layer.mode != "gate":
        raise ValueError(f"gate called on a {layer.mode!r} attention layer")
    if target.data.shape[-1] != layer.target_dim:
        raise ShapeMismatch("gate", target.data.shape, (layer.target_dim,))
    w = attn_weights(layer, control)
    return scale(mul(w, target), float(layer.target_dim))


def weighted_forward_loss(layer, errors_sq, control):
    """Attention-weighted mean of non-negative per-dimension squared errors.

    Weights sum to 1 and are NOT rescaled: under uniform weights this is
    exactly the plain mean of ``errors_sq``.  Batched input (B, n) returns
    the mean over the batch of the per-row weighted sums.
    """
    if layer.mode != "loss_weight":
        raise ValueError(f"weighted_forward_loss called on a {layer.mode!r} layer")
    if errors_sq.data.shape[-1] != layer.target_dim:
        raise ShapeMismatch(
            "weighted_forward_loss", errors_sq.data.shape, (layer.target_dim,)
        )
    if errors_sq.data.min() < 0.0:
        raise ValueError(
            f"weighted_forward_loss: negative squared error {errors_sq.data.min()}"
        )
    w = attn_weights(layer, control)
    per_item = reduce_sum(mul(w, errors_sq), axis=-1)
    if per_item.data.ndim == 0:
        return per_item
    return reduce_mean(per_item)


def weight_entropy(layer, control):
    """Mean entropy of the attention distribution(s); read-only diagnostic."""
    c = control if isinstance(control, Tensor) else Tensor(np.asarray(control, dtype=FLOAT))
    with no_grad():
        w = attn_weights(layer, c).data
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.where(w > 0.0, np.log(np.where(w > 0.0, w, 1.0)), 0.0)
    return float(np.mean(-(w * logw).sum(axis=-1)))
