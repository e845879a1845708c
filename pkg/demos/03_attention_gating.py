"""What the attention layers do: softmax gates over feature dimensions.

One layer class, two modes. In ``gate`` mode the weights softly mask a
target vector (used to pick which features the policy or the curiosity
forward model gets to see). In ``loss_weight`` mode the same weights
reallocate a per-dimension error budget, which is how the weighted
forward loss decides which feature dimensions matter.

Fresh layers start with zero projection and bias, so attention is born
uniform: gating is the identity and loss weighting is the plain mean.
"""

import numpy as np

from curiokit.attention import AttentionLayer, attn_weights, gate, weighted_forward_loss
from curiokit.autodiff import Tensor

FEATURES = 6


def randomize(layer, rng):
    for p in layer.named_parameters().values():
        p.data[...] = rng.normal(scale=0.8, size=p.data.shape)


def main():
    rng = np.random.default_rng(3)
    layer = AttentionLayer(control_dim=FEATURES, target_dim=FEATURES, name="demo.gate")

    control = Tensor(rng.normal(size=(1, FEATURES)))
    print("fresh layer weights:", np.round(attn_weights(layer, control).data[0], 4))

    randomize(layer, rng)
    w = attn_weights(layer, control)
    print("after training would move them, e.g.:", np.round(w.data[0], 4))
    print("sum:", f"{w.data.sum():.12f}")

    # Softmax eats constant shifts in its logits: feeding control through
    # a layer whose bias moved by a constant changes nothing.
    layer.bias.data += 5.0
    w2 = attn_weights(layer, control)
    print("max |w - w_shifted_bias|:", f"{np.abs(w.data - w2.data).max():.2e}")

    target = Tensor(rng.normal(size=(1, FEATURES)))
    gated = gate(layer, target, control)
    print("\ntarget:", np.round(target.data[0], 3))
    print("gated: ", np.round(gated.data[0], 3))
    print("ratio (= n * weight per dim):", np.round(gated.data[0] / target.data[0], 3))

    # Loss weighting: a convex combination of per-dim squared errors,
    # so the result can never leave [min, max] of the inputs.
    wlayer = AttentionLayer(
        control_dim=FEATURES, target_dim=FEATURES, name="demo.lw", mode="loss_weight"
    )
    randomize(wlayer, rng)
    errors_sq = Tensor(rng.random(size=(1, FEATURES)))
    wloss = weighted_forward_loss(wlayer, errors_sq, control)
    lo, hi = errors_sq.data.min(), errors_sq.data.max()
    print("\nper-dim squared errors:", np.round(errors_sq.data[0], 3))
    print(f"weighted loss {wloss.data:.4f} inside [{lo:.4f}, {hi:.4f}]")

    # Back to zero parameters: the weighted loss collapses to the plain
    # mean. The agent-level reduction checks in the test suite all hinge
    # on this.
    for p in wlayer.named_parameters().values():
        p.data[...] = 0.0
    wloss_uniform = weighted_forward_loss(wlayer, errors_sq, control)
    print("uniform-gate loss:", f"{wloss_uniform.data:.6f}")
    print("plain mean:       ", f"{errors_sq.data.mean():.6f}")


if __name__ == "__main__":
    main()
