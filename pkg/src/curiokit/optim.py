"""Adam optimizer with bias correction."""

from dataclasses import dataclass, field

import numpy as np


class MissingGradient(RuntimeError):
    pass


@dataclass
class AdamState:
    """Per-parameter moment accumulators plus the shared hyperparameters."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError(f"betas must lie in (0, 1), got {self.beta1}, {self.beta2}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.step_count < 0:
            raise ValueError(f"step_count must be non-negative, got {self.step_count}")


def adam_step(params, state):
    """One Adam update over ``params``; gradients are consumed (cleared).

    Every trainable parameter must carry a gradient; accumulators are
    created lazily on first sight of a parameter.
    """
    trainable = [p for p in params if p.trainable]
    for p in trainable:
        if p.grad is None:
            raise MissingGradient(f"parameter {p.name} has no gradient")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for p in trainable:
        m = state.m.get(p.name)
        v = state.v.get(p.name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        g = p.grad
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.m[p.name] = m
        state.v[p.name] = v
        p.data = p.data - state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        p.grad = None


class Adam:
    """Object wrapper binding a parameter list to an AdamState."""

    def __init__(self, params, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.state = AdamState(
            learning_rate=learning_rate, beta1=beta1, beta2=beta2, eps=eps
        )

    def step(self):
        adam_step(self.params, self.state)

    def state_dict(self):
        return {
            "learning_rate": self.state.learning_rate,
            "beta1": self.state.beta1,
            "beta2": self.state.beta2,
            "eps": self.state.eps,
            "step_count": self.state.step_count,
            "m": {k: v.copy() for k, v in self.state.m.items()},
            "v": {k: v.copy() for k, v in self.state.v.items()},
        }

    def load_state_dict(self, d):
        self.state = AdamState(
            learning_rate=d["learning_rate"],
            beta1=d["beta1"],
            beta2=d["beta2"],
            eps=d["eps"],
            step_count=d["step_count"],
            m={k: np.asarray(v, dtype=float) for k, v in d["m"].items()},
            v={k: np.asarray(v, dtype=float) for k, v in d["v"].items()},
        )
