"""Tour of the reverse-mode autodiff core.

Builds a small computation on the tape, runs backward, and checks one
gradient against a central finite difference. Everything downstream
(layers, agents, curiosity losses) rests on exactly these pieces.
"""

import numpy as np

from curiokit.autodiff import (
    Parameter,
    Tensor,
    affine,
    backward,
    mse,
    no_grad,
    reduce_mean,
    relu,
    softmax,
    tape_size,
)


def main():
    rng = np.random.default_rng(0)

    # A tensor wraps an ndarray; ops are free functions recording onto a
    # global tape. affine computes x @ W.T + b, so W is (out, in).
    # backward() accumulates into named Parameters.
    x = Tensor(rng.normal(size=(4, 3)))
    w = Parameter(rng.normal(size=(2, 3)), name="demo.w")
    b = Tensor(np.zeros(2))
    target = Tensor(rng.normal(size=(4, 2)))

    hidden = relu(affine(x, w, b))
    loss = mse(hidden, target)
    print(f"loss = {loss.data:.6f}  (tape holds {tape_size()} nodes)")

    backward(loss, [w])
    analytic = w.grad.copy()
    print("dL/dw[0, 0] analytic:", f"{analytic[0, 0]:+.8f}")

    # Central finite difference on the same entry.
    eps = 1e-6
    delta = np.zeros_like(w.data)
    delta[0, 0] = eps

    def loss_at(wdata):
        with no_grad():
            h = relu(affine(Tensor(x.data), Tensor(wdata), Tensor(b.data)))
            return mse(h, Tensor(target.data)).data

    numeric = (loss_at(w.data + delta) - loss_at(w.data - delta)) / (2 * eps)
    print("dL/dw[0, 0] numeric: ", f"{numeric:+.8f}")
    print(f"abs difference: {abs(analytic[0, 0] - numeric):.2e}")

    # softmax rows are distributions; reduce_mean collapses to a scalar.
    probs = softmax(Tensor(rng.normal(size=(2, 5))))
    print("softmax row sums:", np.round(probs.data.sum(axis=1), 12))
    print("mean prob:", f"{reduce_mean(probs).data:.6f}")

    # Inside no_grad() nothing is recorded, so inference costs no tape.
    before = tape_size()
    with no_grad():
        relu(Tensor(rng.normal(size=(64, 64))))
    print(f"tape growth under no_grad: {tape_size() - before} nodes")


if __name__ == "__main__":
    main()
