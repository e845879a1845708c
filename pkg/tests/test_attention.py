"""Attention layers: uniform start, gating identity, weighted losses."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curiokit.attention import (
    AttentionLayer,
    attn_weights,
    gate,
    weight_entropy,
    weighted_forward_loss,
)
from curiokit.autodiff import (
    ShapeMismatch,
    Tensor,
    backward,
    clear_tape,
    reduce_sum,
)


@pytest.fixture(autouse=True)
def fresh_tape():
    clear_tape()
    yield
    clear_tape()


def _random_layer(rng, control_dim, target_dim, mode="gate", scale=0.5):
    layer = AttentionLayer(control_dim, target_dim, "attn", mode=mode)
    layer.projection.data = rng.normal(scale=scale, size=(target_dim, control_dim))
    layer.bias.data = rng.normal(scale=scale, size=target_dim)
    return layer


def test_fresh_layer_is_exactly_uniform():
    layer = AttentionLayer(5, 8, "attn")
    w = attn_weights(layer, Tensor(np.random.default_rng(0).normal(size=5)))
    np.testing.assert_array_equal(w.data, np.full(8, 1.0 / 8.0))


def test_uniform_gate_is_identity():
    layer = AttentionLayer(8, 8, "attn")
    target = Tensor(np.random.default_rng(1).normal(size=8))
    gated = gate(layer, target, target)
    np.testing.assert_array_equal(gated.data, target.data)


def test_uniform_gate_identity_in_batch():
    layer = AttentionLayer(4, 4, "attn")
    target = Tensor(np.random.default_rng(2).normal(size=(6, 4)))
    np.testing.assert_array_equal(gate(layer, target, target).data, target.data)


def test_gate_hand_computed():
    # weights [0.25, 0.75] on a 2-dim target, rescaled by n=2
    layer = AttentionLayer(2, 2, "attn")
    layer.bias.data = np.log(np.array([1.0, 3.0]))
    out = gate(layer, Tensor([1.0, 1.0]), Tensor([0.0, 0.0]))
    np.testing.assert_allclose(out.data, [0.5, 1.5], rtol=1e-14)


def test_gate_mode_and_shape_checks():
    lw = AttentionLayer(3, 3, "attn", mode="loss_weight")
    t = Tensor(np.zeros(3))
    with pytest.raises(ValueError, match="gate"):
        gate(lw, t, t)
    g = AttentionLayer(3, 3, "attn")
    with pytest.raises(ShapeMismatch):
        gate(g, Tensor(np.zeros(4)), t)
    with pytest.raises(ShapeMismatch):
        attn_weights(g, Tensor(np.zeros(5)))


def test_uniform_weighted_loss_is_plain_mean():
    layer = AttentionLayer(3, 4, "attn", mode="loss_weight")
    errors = Tensor(np.array([1.0, 2.0, 3.0, 6.0]))
    loss = weighted_forward_loss(layer, errors, Tensor(np.zeros(3)))
    assert loss.item() == 3.0


def test_weighted_loss_hand_computed():
    # weights [0.1, 0.9], errors [10, 0] -> 0.1 * 10 = 1.0
    layer = AttentionLayer(2, 2, "attn", mode="loss_weight")
    layer.bias.data = np.log(np.array([0.1, 0.9]))
    loss = weighted_forward_loss(layer, Tensor([10.0, 0.0]), Tensor([0.0, 0.0]))
    assert loss.item() == pytest.approx(1.0, rel=1e-12)


def test_weighted_loss_batched_means_over_rows():
    layer = AttentionLayer(2, 2, "attn", mode="loss_weight")
    errors = Tensor(np.array([[2.0, 2.0], [4.0, 4.0]]))
    loss = weighted_forward_loss(layer, errors, Tensor(np.zeros((2, 2))))
    assert loss.item() == 3.0  # rows are constant, mean of 2 and 4


def test_weighted_loss_rejects_negative_errors_and_wrong_mode():
    layer = AttentionLayer(2, 2, "attn", mode="loss_weight")
    with pytest.raises(ValueError, match="negative"):
        weighted_forward_loss(layer, Tensor([-1.0, 1.0]), Tensor([0.0, 0.0]))
    g = AttentionLayer(2, 2, "attn")
    with pytest.raises(ValueError, match="loss_weight|gate"):
        weighted_forward_loss(g, Tensor([1.0, 1.0]), Tensor([0.0, 0.0]))


def test_gradients_reach_projection_and_bias():
    rng = np.random.default_rng(3)
    layer = _random_layer(rng, 4, 4)
    target = Tensor(rng.normal(size=4))
    control = Tensor(rng.normal(size=4))
    backward(reduce_sum(gate(layer, target, control)), params=layer.parameters())
    assert np.any(layer.projection.grad != 0.0)
    assert np.any(layer.bias.grad != 0.0)


def test_weight_entropy_bounds():
    uniform = AttentionLayer(3, 6, "attn")
    assert weight_entropy(uniform, np.zeros(3)) == pytest.approx(np.log(6.0), rel=1e-12)
    peaked = AttentionLayer(3, 6, "attn")
    peaked.bias.data = np.array([50.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    assert weight_entropy(peaked, np.zeros(3)) < 1e-6


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_weights_always_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    n_ctrl = int(rng.integers(1, 9))
    n_tgt = int(rng.integers(1, 9))
    layer = _random_layer(rng, n_ctrl, n_tgt, scale=2.0)
    control = Tensor(rng.normal(scale=3.0, size=(int(rng.integers(1, 5)), n_ctrl)))
    w = attn_weights(layer, control).data
    np.testing.assert_allclose(w.sum(axis=-1), 1.0, atol=1e-9)
    assert (w >= 0.0).all()


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_weighted_loss_between_min_and_max_error(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    layer = _random_layer(rng, n, n, mode="loss_weight", scale=2.0)
    errors = rng.random(n) * 10.0
    loss = weighted_forward_loss(layer, Tensor(errors), Tensor(rng.normal(size=n)))
    assert errors.min() - 1e-12 <= loss.item() <= errors.max() + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_weights_shift_invariant_in_logits(seed):
    # adding a constant to every logit (via the bias) leaves softmax unchanged
    rng = np.random.default_rng(seed)
    layer = _random_layer(rng, 3, 5, scale=1.0)
    control = Tensor(rng.normal(size=3))
    w1 = attn_weights(layer, control).data.copy()
    layer.bias.data = layer.bias.data + 37.5
    w2 = attn_weights(layer, control).data
    np.testing.assert_allclose(w1, w2, atol=1e-12)
