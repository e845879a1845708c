"""Curiosity variants: forward/inverse losses, intrinsic rewards, the
combined objective, and the gradient-routing contract."""

import numpy as np
import pytest

from curiokit.autodiff import Tensor, backward, clear_tape
from curiokit.curiosity import (
    DYNAMICS_HIDDEN,
    VARIANTS,
    CuriosityConfig,
    CuriosityModule,
    combined_loss,
    curiosity_terms,
    forward_input,
    icm_forward_loss,
    icm_inverse_loss,
    intrinsic_reward,
    one_hot_actions,
    rcm_forward_loss,
    variant_for_kind,
)
from curiokit.layers import Affine

N, A = 8, 4


@pytest.fixture(autouse=True)
def fresh_tape():
    clear_tape()
    yield
    clear_tape()


def make_module(variant, seed=0, **cfg):
    config = CuriosityConfig(variant=variant, **cfg)
    return CuriosityModule(variant, N, A, np.random.default_rng(seed), config)


def rand_phi(rng, batch=None):
    shape = (N,) if batch is None else (batch, N)
    return Tensor(rng.normal(size=shape))


# -- config ----------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        CuriosityConfig(variant="rnd")
    with pytest.raises(ValueError):
        CuriosityConfig(beta=1.5)
    with pytest.raises(ValueError):
        CuriosityConfig(eta=0.0)
    with pytest.raises(ValueError):
        CuriosityConfig(feature_grad="sometimes")
    with pytest.raises(ValueError):
        CuriosityConfig(weight_entropy_coef=-0.1)


def test_config_resolve():
    assert CuriosityConfig().resolve("rcm").variant == "rcm"
    assert CuriosityConfig(variant="icm").resolve("icm").variant == "icm"
    with pytest.raises(ValueError, match="conflicts"):
        CuriosityConfig(variant="icm").resolve("rcm")
    cfg = CuriosityConfig(variant="icm_attn1", beta=0.3)
    assert CuriosityConfig(**cfg.to_dict()) == cfg


def test_variant_for_kind():
    assert variant_for_kind("a2c") == "none"
    assert variant_for_kind("atta2c") == "none"
    assert variant_for_kind("icm") == "icm"
    assert variant_for_kind("rcm") == "rcm"


def test_module_construction_errors():
    with pytest.raises(ValueError):
        make_module("none")
    with pytest.raises(ValueError, match="does not match"):
        CuriosityModule("icm", N, A, np.random.default_rng(0),
                        CuriosityConfig(variant="rcm"))


def test_dynamics_model_shapes():
    module = make_module("icm")
    params = module.named_parameters()
    assert params["forward_model.l0.W"].data.shape == (DYNAMICS_HIDDEN, N + A)
    assert params["forward_model.l1.W"].data.shape == (N, DYNAMICS_HIDDEN)
    assert params["inverse_model.l0.W"].data.shape == (DYNAMICS_HIDDEN, 2 * N)
    assert params["inverse_model.l1.W"].data.shape == (A, DYNAMICS_HIDDEN)


# -- one-hot actions and forward input -------------------------------------


def test_one_hot_actions():
    np.testing.assert_array_equal(one_hot_actions(2, 4), [0, 0, 1, 0])
    np.testing.assert_array_equal(
        one_hot_actions([0, 3], 4), [[1, 0, 0, 0], [0, 0, 0, 1]]
    )


def test_forward_input_icm_is_verbatim_concat():
    module = make_module("icm")
    rng = np.random.default_rng(1)
    phi = rand_phi(rng, batch=3)
    a = one_hot_actions([0, 1, 2], A)
    x = forward_input(module, phi, a)
    np.testing.assert_array_equal(x.data, np.concatenate([phi.data, a], axis=-1))


def test_forward_input_uniform_gates_reduce_to_concat():
    rng = np.random.default_rng(2)
    phi = rand_phi(rng, batch=3)
    a = one_hot_actions([1, 2, 3], A)
    plain = np.concatenate([phi.data, a], axis=-1)
    # both dims are powers of two here, so the attn2 identity is exact
    x2 = forward_input(make_module("icm_attn2"), phi, a)
    np.testing.assert_array_equal(x2.data, plain)
    x1 = forward_input(make_module("icm_attn1"), phi, a)
    np.testing.assert_allclose(x1.data, plain, atol=1e-14)


def test_forward_input_rejects_wrong_action_dim():
    with pytest.raises(ValueError):
        forward_input(make_module("icm"), rand_phi(np.random.default_rng(0)),
                      np.zeros(A + 1))


# -- forward loss ----------------------------------------------------------


def test_forward_loss_perfect_prediction_is_zero():
    module = make_module("icm")
    rng = np.random.default_rng(3)
    phi = rand_phi(rng)
    a = one_hot_actions(1, A)
    predicted = module.forward_model(forward_input(module, phi, a))
    j_fwd, errors_sq = icm_forward_loss(module, phi, a, Tensor(predicted.data.copy()))
    assert j_fwd.data == 0.0
    np.testing.assert_array_equal(errors_sq.data, np.zeros(N))


def test_forward_loss_is_mean_squared_error():
    """Shift the target so the per-dim errors are exactly [1, 1, 0, ..., 0]."""
    module = make_module("icm")
    rng = np.random.default_rng(4)
    phi = rand_phi(rng)
    a = one_hot_actions(0, A)
    predicted = module.forward_model(forward_input(module, phi, a)).data
    shift = np.zeros(N)
    shift[:2] = 1.0
    j_fwd, errors_sq = icm_forward_loss(module, phi, a, Tensor(predicted - shift))
    np.testing.assert_array_equal(errors_sq.data, shift)  # (1)^2 twice
    assert j_fwd.data == 2.0 / N
    assert j_fwd.data >= 0.0


def test_forward_loss_batch_matches_manual():
    module = make_module("icm")
    rng = np.random.default_rng(5)
    phi = rand_phi(rng, batch=6)
    a = one_hot_actions(rng.integers(A, size=6), A)
    phi_next = rand_phi(rng, batch=6)
    j_fwd, errors_sq = icm_forward_loss(module, phi, a, phi_next)
    predicted = module.forward_model(forward_input(module, phi, a)).data
    np.testing.assert_allclose(errors_sq.data, (predicted - phi_next.data) ** 2,
                               rtol=1e-12)
    np.testing.assert_allclose(j_fwd.data, np.mean(errors_sq.data), rtol=1e-12)


# -- weighted (rcm) forward loss -------------------------------------------


def test_rcm_uniform_weights_equal_icm_loss():
    module = make_module("rcm", seed=7)
    rng = np.random.default_rng(6)
    phi = rand_phi(rng)
    a = one_hot_actions(2, A)
    phi_next = rand_phi(rng)
    j_icm, errors_sq = icm_forward_loss(module, phi, a, phi_next)
    j_rcm = rcm_forward_loss(module, errors_sq, phi_next)
    assert j_rcm.data == j_icm.data  # 1/8 weights are exact powers of two


def test_rcm_hand_computed_weights():
    module = make_module("rcm")
    # zero projection keeps the weights control-independent; the bias sets
    # softmax to [0.1, 0.9, ~0, ...] exactly up to the tiny tail
    module.loss_weights.bias.data[:] = -60.0
    module.loss_weights.bias.data[0] = np.log(0.1)
    module.loss_weights.bias.data[1] = np.log(0.9)
    errors = np.zeros(N)
    errors[0] = 10.0
    j = rcm_forward_loss(module, Tensor(errors), rand_phi(np.random.default_rng(0)))
    np.testing.assert_allclose(j.data, 1.0, rtol=1e-12)


def test_rcm_constant_errors_invariant_to_weights():
    module = make_module("rcm")
    rng = np.random.default_rng(8)
    module.loss_weights.projection.data = rng.normal(size=(N, N))
    module.loss_weights.bias.data = rng.normal(size=N)
    j = rcm_forward_loss(module, Tensor(np.full(N, 3.25)), rand_phi(rng))
    np.testing.assert_allclose(j.data, 3.25, rtol=1e-12)


def test_rcm_loss_requires_rcm_module():
    with pytest.raises(ValueError, match="rcm"):
        rcm_forward_loss(make_module("icm"), Tensor(np.ones(N)),
                         rand_phi(np.random.default_rng(0)))


# -- inverse loss ----------------------------------------------------------


def test_inverse_loss_uniform_logits_is_log_num_actions():
    module = make_module("icm")
    final = module.inverse_model.layers[-1]
    final.W.data[:] = 0.0
    rng = np.random.default_rng(9)
    loss = icm_inverse_loss(module, rand_phi(rng, batch=5), rand_phi(rng, batch=5),
                            np.array([0, 1, 2, 3, 0]))
    np.testing.assert_allclose(loss.data, np.log(A), rtol=1e-12)


def test_inverse_loss_saturated_logits_near_zero():
    module = make_module("icm")
    final = module.inverse_model.layers[-1]
    final.W.data[:] = 0.0
    final.b.data[:] = 0.0
    final.b.data[2] = 60.0
    rng = np.random.default_rng(10)
    loss = icm_inverse_loss(module, rand_phi(rng, batch=3), rand_phi(rng, batch=3),
                            np.array([2, 2, 2]))
    assert 0.0 <= loss.data < 1e-12


# -- intrinsic reward ------------------------------------------------------


def test_intrinsic_reward_scaling():
    module = make_module("icm", eta=1.0)
    errors = np.full(N, 0.5)  # mean 0.5
    assert intrinsic_reward(module, errors) == pytest.approx(0.25, rel=1e-12)
    doubled = make_module("icm", eta=2.0)
    assert intrinsic_reward(doubled, errors) == pytest.approx(0.5, rel=1e-12)


def test_intrinsic_reward_zero_iff_perfect():
    module = make_module("icm")
    assert intrinsic_reward(module, np.zeros(N)) == 0.0
    rng = np.random.default_rng(11)
    errs = rng.random((10, N))
    rewards = intrinsic_reward(module, errs)
    assert rewards.shape == (10,)
    assert (rewards > 0.0).all()


def test_rcm_reward_uniform_weights_matches_icm():
    icm, rcm = make_module("icm"), make_module("rcm")
    rng = np.random.default_rng(12)
    errs = rng.random((4, N))
    phi_next = rand_phi(rng, batch=4)
    np.testing.assert_allclose(
        intrinsic_reward(rcm, errs, phi_next),
        intrinsic_reward(icm, errs),
        rtol=1e-14,
    )


def test_rcm_reward_uses_loss_weights():
    module = make_module("rcm", eta=1.0)
    module.loss_weights.bias.data[:] = -60.0
    module.loss_weights.bias.data[0] = np.log(0.1)
    module.loss_weights.bias.data[1] = np.log(0.9)
    errors = np.zeros(N)
    errors[0] = 10.0
    r = intrinsic_reward(module, errors, rand_phi(np.random.default_rng(0)))
    np.testing.assert_allclose(r, 0.5, rtol=1e-12)  # (eta/2) * 1.0


def test_rcm_weighted_reward_needs_control():
    module = make_module("rcm")
    with pytest.raises(ValueError, match="phi_next"):
        intrinsic_reward(module, np.ones(N))


def test_rcm_unweighted_reward_switch():
    module = make_module("rcm", weighted_reward=False)
    module.loss_weights.bias.data[0] = 5.0  # would skew a weighted reward
    errors = np.arange(N, dtype=float)
    assert intrinsic_reward(module, errors) == pytest.approx(
        0.5 * errors.mean(), rel=1e-12
    )


# -- combined objective ----------------------------------------------------


def test_combined_loss_hand_computed():
    j = combined_loss(Tensor(np.array(1.0)), Tensor(np.array(2.0)),
                      Tensor(np.array(3.0)), beta=0.2)
    np.testing.assert_allclose(j.data, 3.8, rtol=1e-12)


def test_combined_loss_limits():
    a2c, fwd, inv = (Tensor(np.array(v)) for v in (1.5, 2.5, 3.5))
    np.testing.assert_allclose(combined_loss(a2c, fwd, inv, 0.0).data, 1.5 + 3.5)
    np.testing.assert_allclose(combined_loss(a2c, fwd, inv, 1.0).data, 1.5 + 2.5)
    with pytest.raises(ValueError):
        combined_loss(a2c, fwd, inv, 1.2)


# -- gradient routing ------------------------------------------------------


def stub_features(rng, batch=4):
    """A live layer standing in for the feature extractor, so feature-side
    gradients are observable."""
    stub = Affine(3, N, rng, "stub")
    x_t = Tensor(rng.normal(size=(batch, 3)))
    x_next = Tensor(rng.normal(size=(batch, 3)))
    return stub, stub(x_t), stub(x_next)


def grads_nonzero(params, block):
    picked = [p for name, p in params.items() if name.startswith(block)]
    assert picked, f"no parameters under {block!r}"
    return any(np.any(p.grad != 0.0) for p in picked)


def test_forward_loss_stop_mode_routes_around_features():
    module = make_module("icm", feature_grad="stop")
    rng = np.random.default_rng(13)
    stub, phi_t, phi_next = stub_features(rng)
    params = {**module.named_parameters(), **stub.named_parameters()}
    a = one_hot_actions(rng.integers(A, size=4), A)
    j_fwd, _ = icm_forward_loss(module, phi_t, a, phi_next)
    backward(j_fwd, params)
    assert grads_nonzero(params, "forward_model")
    assert not grads_nonzero(params, "inverse_model")
    assert not grads_nonzero(params, "stub")


def test_forward_loss_flow_mode_reaches_features():
    module = make_module("icm", feature_grad="flow")
    rng = np.random.default_rng(13)
    stub, phi_t, phi_next = stub_features(rng)
    params = {**module.named_parameters(), **stub.named_parameters()}
    a = one_hot_actions(rng.integers(A, size=4), A)
    j_fwd, _ = icm_forward_loss(module, phi_t, a, phi_next)
    backward(j_fwd, params)
    assert grads_nonzero(params, "stub")


def test_forward_loss_target_is_always_constant():
    """Even in flow mode the next-step features are a constant target: with a
    dead input path, nothing reaches the feature stub."""
    module = make_module("icm", feature_grad="flow")
    rng = np.random.default_rng(14)
    stub, _, phi_next = stub_features(rng)
    params = {**module.named_parameters(), **stub.named_parameters()}
    phi_const = Tensor(rng.normal(size=(4, N)))
    a = one_hot_actions(rng.integers(A, size=4), A)
    j_fwd, _ = icm_forward_loss(module, phi_const, a, phi_next)
    backward(j_fwd, params)
    assert not grads_nonzero(params, "stub")


def test_inverse_loss_trains_features_not_forward_model():
    module = make_module("icm")
    rng = np.random.default_rng(15)
    stub, phi_t, phi_next = stub_features(rng)
    params = {**module.named_parameters(), **stub.named_parameters()}
    j_inv = icm_inverse_loss(module, phi_t, phi_next, np.array([0, 1, 2, 3]))
    backward(j_inv, params)
    assert grads_nonzero(params, "inverse_model")
    assert grads_nonzero(params, "stub")
    assert not grads_nonzero(params, "forward_model")


def test_rcm_loss_trains_weight_layer_but_not_features():
    module = make_module("rcm", feature_grad="stop")
    rng = np.random.default_rng(16)
    stub, phi_t, phi_next = stub_features(rng)
    params = {**module.named_parameters(), **stub.named_parameters()}
    a = one_hot_actions(rng.integers(A, size=4), A)
    _, errors_sq = icm_forward_loss(module, phi_t, a, phi_next)
    j_rcm = rcm_forward_loss(module, errors_sq, phi_next)
    backward(j_rcm, params)
    assert grads_nonzero(params, "loss_weights")
    assert grads_nonzero(params, "forward_model")
    assert not grads_nonzero(params, "stub")  # control is detached too


def test_attention_gates_receive_forward_gradients():
    for variant, blocks in (
        ("icm_attn1", ["attn_concat"]),
        ("icm_attn2", ["attn_features", "attn_actions"]),
    ):
        module = make_module(variant)
        rng = np.random.default_rng(17)
        phi_t = rand_phi(rng, batch=4)
        phi_next = rand_phi(rng, batch=4)
        a = one_hot_actions(rng.integers(A, size=4), A)
        params = module.named_parameters()
        j_fwd, _ = icm_forward_loss(module, phi_t, a, phi_next)
        backward(j_fwd, params)
        for block in blocks:
            assert grads_nonzero(params, block), (variant, block)


# -- full batch terms ------------------------------------------------------


def batch_inputs(rng, batch=5):
    return rand_phi(rng, batch), rng.integers(A, size=batch), rand_phi(rng, batch)


def test_curiosity_terms_shapes_and_invariants():
    rng = np.random.default_rng(18)
    phi_t, actions, phi_next = batch_inputs(rng)
    for variant in VARIANTS[1:]:
        out = curiosity_terms(make_module(variant), phi_t, actions, phi_next)
        assert out.j_fwd.data.shape == () and out.j_fwd.data >= 0.0
        assert out.j_inv.data.shape == ()
        assert out.intrinsic_rewards.shape == (5,)
        assert (out.intrinsic_rewards >= 0.0).all()
        assert out.errors_sq.data.shape == (5, N)


def test_fresh_variants_agree_with_plain_icm():
    """Zero-initialized attention layers leave every variant computing the
    plain ICM quantities (the dynamics models share the same init stream)."""
    rng = np.random.default_rng(19)
    phi_t, actions, phi_next = batch_inputs(rng)
    base = curiosity_terms(make_module("icm", seed=23), phi_t, actions, phi_next)
    for variant in ("icm_attn1", "icm_attn2", "rcm"):
        out = curiosity_terms(make_module(variant, seed=23), phi_t, actions, phi_next)
        np.testing.assert_allclose(out.j_fwd.data, base.j_fwd.data, atol=1e-13)
        np.testing.assert_allclose(out.j_inv.data, base.j_inv.data, atol=1e-13)
        np.testing.assert_allclose(out.intrinsic_rewards, base.intrinsic_rewards,
                                   atol=1e-13)


def test_weight_stats_per_variant():
    rng = np.random.default_rng(20)
    phi_t, actions, phi_next = batch_inputs(rng)

    assert curiosity_terms(make_module("icm"), phi_t, actions, phi_next).weight_stats == {}

    s1 = curiosity_terms(make_module("icm_attn1"), phi_t, actions, phi_next).weight_stats
    gate = s1["attn_concat"]
    assert gate["feature_mass"] + gate["action_mass"] == pytest.approx(1.0, abs=1e-12)
    assert gate["feature_mass"] == pytest.approx(N / (N + A), abs=1e-12)
    assert gate["entropy"] == pytest.approx(np.log(N + A), abs=1e-12)
    assert len(gate["mean_weights"]) == N + A

    s2 = curiosity_terms(make_module("icm_attn2"), phi_t, actions, phi_next).weight_stats
    assert s2["attn_features"]["entropy"] == pytest.approx(np.log(N), abs=1e-12)
    assert s2["attn_actions"]["entropy"] == pytest.approx(np.log(A), abs=1e-12)

    sr = curiosity_terms(make_module("rcm"), phi_t, actions, phi_next).weight_stats
    assert sr["loss_weights"]["entropy"] == pytest.approx(np.log(N), abs=1e-12)


def test_weight_entropy_regularizer_shifts_the_loss():
    rng = np.random.default_rng(21)
    phi_t, actions, phi_next = batch_inputs(rng)
    plain = curiosity_terms(make_module("rcm"), phi_t, actions, phi_next)
    reg = curiosity_terms(make_module("rcm", weight_entropy_coef=0.5),
                          phi_t, actions, phi_next)
    # fresh weights are uniform: entropy is exactly ln N
    np.testing.assert_allclose(reg.j_fwd.data, plain.j_fwd.data - 0.5 * np.log(N),
                               rtol=1e-12)
