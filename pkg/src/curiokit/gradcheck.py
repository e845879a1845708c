"""Central finite-difference verification of analytic gradients.

The numeric side perturbs each parameter element by +-step and evaluates
the loss closure twice; the analytic side is one recorded forward plus
``backward``.  The closure must be deterministic in everything except the
parameters it reads.
"""

from dataclasses import dataclass

import numpy as np

from .autodiff import backward, clear_tape, no_grad, zero_grads


@dataclass
class BlockReport:
    name: str
    max_rel_err: float
    max_abs_err: float
    passed: bool


@dataclass
class GradCheckReport:
    blocks: list
    tolerance: float
    step: float

    @property
    def max_rel_err(self):
        return max((b.max_rel_err for b in self.blocks), default=0.0)

    @property
    def failures(self):
        return [b for b in self.blocks if not b.passed]

    @property
    def passed(self):
        return not self.failures

    def summary(self):
        lines = [
            f"gradient check (step={self.step:g}, tolerance={self.tolerance:g})"
        ]
        for b in self.blocks:
            status = "ok" if b.passed else "FAIL"
            lines.append(f"  {status:4s} {b.name}: max rel err {b.max_rel_err:.3e}")
        return "\n".join(lines)


def _rel_err(analytic, numeric, floor=1e-10):
    denom = np.maximum(np.abs(analytic), np.abs(numeric))
    err = np.abs(analytic - numeric)
    # where both sides are essentially zero the block is trivially correct
    return np.where(denom < floor, 0.0, err / np.maximum(denom, floor))


def finite_difference_check(model, loss_fn, tolerance=1e-4, step=1e-5):
    """Compare analytic gradients of ``loss_fn()`` against central differences.

    ``model`` is anything with ``.parameters()`` or a plain parameter list.
    Returns a GradCheckReport with one entry per parameter block; failures
    are carried in the report, nothing raises.
    """
    params = model.parameters() if hasattr(model, "parameters") else list(model)
    trainable = [p for p in params if p.trainable]

    clear_tape()
    zero_grads(trainable)
    loss = loss_fn()
    backward(loss, params=trainable)
    analytic = {p.name: p.grad.copy() for p in trainable}

    blocks = []
    with no_grad():
        for p in trainable:
            flat = p.data.reshape(-1)
            numeric = np.empty_like(flat)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                hi = loss_fn().item()
                flat[i] = orig - step
                lo = loss_fn().item()
                flat[i] = orig
                numeric[i] = (hi - lo) / (2.0 * step)
            err = _rel_err(analytic[p.name].reshape(-1), numeric)
            max_rel = float(err.max()) if err.size else 0.0
            max_abs = float(
                np.abs(analytic[p.name].reshape(-1) - numeric).max()
            ) if numeric.size else 0.0
            blocks.append(BlockReport(p.name, max_rel, max_abs, max_rel < tolerance))
    zero_grads(trainable)
    return GradCheckReport(blocks=blocks, tolerance=tolerance, step=step)
