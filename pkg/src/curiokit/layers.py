"""Parameter containers and the MLP building blocks shared by all networks."""

import numpy as np

from .autodiff import FLOAT, Parameter, affine, relu, tanh_act

ACTIVATIONS = {"relu": relu, "tanh": tanh_act, None: None, "linear": None}


def glorot_uniform(rng, out_dim, in_dim):
    """Variance-preserving uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-limit, limit, size=(out_dim, in_dim)).astype(FLOAT)


class Module:
    """Base class providing recursive, deterministically ordered parameter
    collection over instance attributes (Parameters, Modules, and lists of
    either)."""

    def parameters(self):
        return list(self.named_parameters().values())

    def named_parameters(self):
        out = {}
        self._collect(out)
        return out

    def _collect(self, out):
        for value in self.__dict__.values():
            self._collect_value(value, out)

    def _collect_value(self, value, out):
        if isinstance(value, Parameter):
            if value.name in out and out[value.name] is not value:
                raise ValueError(f"duplicate parameter name: {value.name}")
            out[value.name] = value
        elif isinstance(value, Module):
            value._collect(out)
        elif isinstance(value, (list, tuple)):
            for item in value:
                self._collect_value(item, out)

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters().items()}

    def load_state_dict(self, state):
        params = self.named_parameters()
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise KeyError(
                f"state dict mismatch (missing={sorted(missing)}, extra={sorted(extra)})"
            )
        for name, p in params.items():
            arr = np.asarray(state[name], dtype=FLOAT)
            if arr.shape != p.data.shape:
                raise ValueError(
                    f"shape mismatch for {name}: {arr.shape} vs {p.data.shape}"
                )
            p.data = arr.copy()


class Affine(Module):
    """One dense layer y = W x + b."""

    def __init__(self, in_dim, out_dim, rng, name):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.W = Parameter(glorot_uniform(rng, out_dim, in_dim), f"{name}.W")
        self.b = Parameter(np.zeros(out_dim, dtype=FLOAT), f"{name}.b")

    def __call__(self, x):
        return affine(x, self.W, self.b)


class MLP(Module):
    """Dense stack with a fixed hidden activation and a linear output layer."""

    def __init__(self, in_dim, hidden_dims, out_dim, rng, name, activation="relu"):
        self.activation = ACTIVATIONS[activation]
        dims = [in_dim, *hidden_dims, out_dim]
        self.layers = [
            Affine(dims[i], dims[i + 1], rng, f"{name}.l{i}")
            for i in range(len(dims) - 1)
        ]

    def __call__(self, x):
        h = x
        for layer in self.layers[:-1]:
            h = layer(h)
            if self.activation is not None:
                h = self.activation(h)
        return self.layers[-1](h)
