"""Reverse-mode automatic differentiation on float64 numpy arrays.

The engine is a define-by-run tape: while recording is enabled (the
default), every differentiable operation appends ``(output, inputs, vjp)``
to a module-level tape.  ``backward`` walks the tape in reverse execution
order -- a valid topological order for any DAG built this way -- and
accumulates vector-Jacobian products into ``Tensor.grad``.

Conventions that keep this small engine correct:

* everything is float64; inputs are coerced on Tensor construction,
* gradient arrays are never mutated in place (accumulation rebinds via
  ``grad = grad + piece``), so vjps may freely return views of upstream
  gradients,
* supported array ranks are 0 (scalars), 1 (vectors) and 2 (batches of
  vectors); reductions operate over the last axis or over everything.

Use ``no_grad()`` around rollout collection and other read-only passes to
skip recording entirely.
"""

import contextlib

import numpy as np

FLOAT = np.float64


class ShapeMismatch(ValueError):
    """Raised when an op receives arrays whose shapes cannot combine."""

    def __init__(self, op, *shapes):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        super().__init__(
            f"{op}: incompatible shapes {' vs '.join(str(tuple(s)) for s in shapes)}"
        )


class Tensor:
    """A float64 array with an optional same-shape gradient slot."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        self.data = np.asarray(data, dtype=FLOAT)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor({self.data!r})"


class Parameter(Tensor):
    """A named, trainable Tensor owned by exactly one model."""

    __slots__ = ("name", "trainable")

    def __init__(self, data, name, trainable=True):
        super().__init__(data)
        self.name = name
        self.trainable = trainable

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.data.shape})"


# --------------------------------------------------------------------------
# tape machinery
# --------------------------------------------------------------------------

_TAPE = []
_RECORDING = True


def _push(out, inputs, vjp):
    if _RECORDING:
        _TAPE.append((out, inputs, vjp))


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block."""
    global _RECORDING
    prev = _RECORDING
    _RECORDING = False
    try:
        yield
    finally:
        _RECORDING = prev


def is_recording():
    return _RECORDING


def tape_size():
    return len(_TAPE)


def clear_tape():
    _TAPE.clear()


def zero_grads(params):
    for p in params:
        p.grad = None


def backward(loss, params=None, clear=True):
    """Accumulate d(loss)/d(input) into every tensor reachable on the tape.

    ``loss`` must be a scalar.  If ``params`` is given (a list or a name ->
    parameter mapping), trainable parameters the loss does not depend on get
    an explicit zero gradient, so optimizers can rely on ``grad`` being
    populated for the whole model.  The tape is cleared afterwards unless
    ``clear=False``.
    """
    if loss.data.shape != ():
        raise ValueError(
            f"backward expects a scalar loss, got shape {loss.data.shape}"
        )
    loss.grad = np.ones((), dtype=FLOAT)
    for out, inputs, vjp in reversed(_TAPE):
        g = out.grad
        if g is None:
            continue
        for t, gt in zip(inputs, vjp(g)):
            if gt is None:
                continue
            if t.grad is None:
                t.grad = gt
            else:
                t.grad = t.grad + gt
    if params is not None:
        plist = params.values() if isinstance(params, dict) else params
        for p in plist:
            if p.trainable and p.grad is None:
                p.grad = np.zeros_like(p.data)
    if clear:
        clear_tape()


def detach(x):
    """A constant copy of ``x``: gradients stop here."""
    return Tensor(x.data)


# --------------------------------------------------------------------------
# primitive operations
# --------------------------------------------------------------------------


def _check_rank(op, x, ranks):
    if x.data.ndim not in ranks:
        raise ShapeMismatch(op, x.data.shape)


def affine(x, W, b):
    """y = x @ W.T + b for a vector (n,) or a batch (B, n) of vectors."""
    xd, Wd, bd = x.data, W.data, b.data
    if Wd.ndim != 2 or bd.shape != (Wd.shape[0],):
        raise ShapeMismatch("affine(W, b)", Wd.shape, bd.shape)
    if xd.ndim not in (1, 2) or xd.shape[-1] != Wd.shape[1]:
        raise ShapeMismatch("affine(x, W)", xd.shape, Wd.shape)
    out = Tensor(xd @ Wd.T + bd)

    def vjp(g):
        gx = g @ Wd
        if xd.ndim == 1:
            gW = np.outer(g, xd)
            gb = g
        else:
            gW = g.T @ xd
            gb = g.sum(axis=0)
        return gx, gW, gb

    _push(out, (x, W, b), vjp)
    return out


def _binary(op, a, b, fwd, vjp_tt, vjp_ts):
    """Shared plumbing for add/sub/mul: Tensor-Tensor needs equal shapes,
    the second operand may be a python scalar."""
    if isinstance(b, Tensor):
        if a.data.shape != b.data.shape:
            raise ShapeMismatch(op, a.data.shape, b.data.shape)
        out = Tensor(fwd(a.data, b.data))
        _push(out, (a, b), lambda g: vjp_tt(g, a.data, b.data))
        return out
    c = float(b)
    out = Tensor(fwd(a.data, c))
    _push(out, (a,), lambda g: vjp_ts(g, a.data, c))
    return out


def add(a, b):
    return _binary(
        "add", a, b,
        lambda x, y: x + y,
        lambda g, x, y: (g, g),
        lambda g, x, c: (g,),
    )


def sub(a, b):
    return _binary(
        "sub", a, b,
        lambda x, y: x - y,
        lambda g, x, y: (g, -g),
        lambda g, x, c: (g,),
    )


def mul(a, b):
    return _binary(
        "mul", a, b,
        lambda x, y: x * y,
        lambda g, x, y: (g * y, g * x),
        lambda g, x, c: (g * c,),
    )


def scale(x, c):
    return mul(x, float(c))


def neg(x):
    out = Tensor(-x.data)
    _push(out, (x,), lambda g: (-g,))
    return out


def square(x):
    xd = x.data
    out = Tensor(xd * xd)
    _push(out, (x,), lambda g: (2.0 * xd * g,))
    return out


def relu(x):
    mask = x.data > 0.0  # subgradient at 0 is 0
    out = Tensor(np.where(mask, x.data, 0.0))
    _push(out, (x,), lambda g: (g * mask,))
    return out


def tanh_act(x):
    y = np.tanh(x.data)
    out = Tensor(y)
    _push(out, (x,), lambda g: (g * (1.0 - y * y),))
    return out


def log(x):
    xd = x.data
    out = Tensor(np.log(xd))
    _push(out, (x,), lambda g: (g / xd,))
    return out


def safe_log(x, floor=1e-300):
    """log with an underflow floor; gradient is 0 below the floor."""
    xd = np.maximum(x.data, floor)
    above = x.data >= floor
    out = Tensor(np.log(xd))
    _push(out, (x,), lambda g: (np.where(above, g / xd, 0.0),))
    return out


def softmax(x, axis=-1):
    """Numerically stable softmax along the last axis."""
    _check_rank("softmax", x, (1, 2))
    if x.data.shape[-1] < 1:
        raise ShapeMismatch("softmax", x.data.shape)
    if axis != -1:
        raise ValueError("softmax supports the last axis only")
    z = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(s)

    def vjp(g):
        inner = (g * s).sum(axis=-1, keepdims=True)
        return ((g - inner) * s,)

    _push(out, (x,), vjp)
    return out


def reduce_sum(x, axis=None):
    if axis is None:
        out = Tensor(x.data.sum())
        _push(out, (x,), lambda g: (np.broadcast_to(g, x.data.shape),))
        return out
    if axis != -1:
        raise ValueError("reduce_sum supports axis=None or axis=-1")
    _check_rank("reduce_sum", x, (1, 2))
    out = Tensor(x.data.sum(axis=-1))
    _push(
        out, (x,),
        lambda g: (np.broadcast_to(np.expand_dims(g, -1), x.data.shape),),
    )
    return out


def reduce_mean(x, axis=None):
    if axis is None:
        n = x.data.size
        out = Tensor(x.data.mean())
        _push(out, (x,), lambda g: (np.broadcast_to(g / n, x.data.shape),))
        return out
    if axis != -1:
        raise ValueError("reduce_mean supports axis=None or axis=-1")
    _check_rank("reduce_mean", x, (1, 2))
    n = x.data.shape[-1]
    out = Tensor(x.data.mean(axis=-1))
    _push(
        out, (x,),
        lambda g: (np.broadcast_to(np.expand_dims(g / n, -1), x.data.shape),),
    )
    return out


def reshape(x, shape):
    out = Tensor(x.data.reshape(shape))
    _push(out, (x,), lambda g: (g.reshape(x.data.shape),))
    return out


def concat(parts, axis=-1):
    if axis != -1:
        raise ValueError("concat supports the last axis only")
    if not parts:
        raise ValueError("concat of an empty sequence")
    ndim = parts[0].data.ndim
    for p in parts:
        if p.data.ndim != ndim or p.data.shape[:-1] != parts[0].data.shape[:-1]:
            raise ShapeMismatch("concat", parts[0].data.shape, p.data.shape)
    out = Tensor(np.concatenate([p.data for p in parts], axis=-1))
    sizes = [p.data.shape[-1] for p in parts]
    offsets = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, offsets, axis=-1))

    _push(out, tuple(parts), vjp)
    return out


def gather_last(x, index):
    """Pick one element per row along the last axis.

    For a vector: ``x[i]`` (scalar out).  For a batch (B, n) with integer
    index array (B,): ``out[b] = x[b, index[b]]``.
    """
    xd = x.data
    if xd.ndim == 1:
        i = int(index)
        if not 0 <= i < xd.shape[0]:
            raise IndexError(f"gather_last: index {i} out of range {xd.shape}")
        out = Tensor(xd[i])

        def vjp(g):
            z = np.zeros_like(xd)
            z[i] = g
            return (z,)

    elif xd.ndim == 2:
        idx = np.asarray(index, dtype=np.int64)
        if idx.shape != (xd.shape[0],):
            raise ShapeMismatch("gather_last", xd.shape, idx.shape)
        if idx.min() < 0 or idx.max() >= xd.shape[1]:
            raise IndexError("gather_last: index out of range")
        rows = np.arange(xd.shape[0])
        out = Tensor(xd[rows, idx])

        def vjp(g):
            z = np.zeros_like(xd)
            z[rows, idx] = g
            return (z,)

    else:
        raise ShapeMismatch("gather_last", xd.shape)
    _push(out, (x,), vjp)
    return out


# --------------------------------------------------------------------------
# composite losses and categorical distributions
# --------------------------------------------------------------------------


def mse(a, b):
    """Mean of elementwise squared differences; scalar output."""
    return reduce_mean(square(sub(a, b)))


def _probs_data(probs, tol=1e-6):
    p = probs.data if isinstance(probs, Tensor) else np.asarray(probs, dtype=FLOAT)
    if p.ndim not in (1, 2) or p.shape[-1] < 1:
        raise ShapeMismatch("categorical", p.shape)
    if p.min() < -tol:
        raise ValueError(f"categorical: negative probability {p.min()}")
    sums = p.sum(axis=-1)
    if np.max(np.abs(sums - 1.0)) > tol:
        raise ValueError(
            f"categorical: probabilities sum to {sums} (tolerance {tol})"
        )
    return p


def categorical_sample(probs, rng):
    """Sample action indices from one distribution (n,) or a batch (B, n)."""
    p = _probs_data(probs)
    cdf = np.cumsum(p, axis=-1)
    if p.ndim == 1:
        u = rng.random()
        return int(min(np.searchsorted(cdf, u, side="right"), p.shape[-1] - 1))
    u = rng.random(p.shape[0])
    idx = np.empty(p.shape[0], dtype=np.int64)
    for i in range(p.shape[0]):
        idx[i] = min(np.searchsorted(cdf[i], u[i], side="right"), p.shape[-1] - 1)
    return idx


def categorical_log_prob(probs, action):
    """ln probs[action]; differentiable w.r.t. ``probs``."""
    _probs_data(probs)
    return safe_log(gather_last(probs, action))


def categorical_entropy(probs):
    """-sum p ln p along the last axis, with 0 ln 0 := 0."""
    p = _probs_data(probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.where(p > 0.0, np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    out = Tensor(-(p * logp).sum(axis=-1))

    def vjp(g):
        gexp = np.expand_dims(g, -1) if p.ndim == 2 else g
        return (np.where(p > 0.0, -(logp + 1.0) * gexp, 0.0),)

    if isinstance(probs, Tensor):
        _push(out, (probs,), vjp)
    return out
