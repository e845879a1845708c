"""The finite-difference checker must accept correct gradients and flag
deliberately corrupted ones."""

import numpy as np
import pytest

from curiokit import autodiff as ad
from curiokit.autodiff import Tensor, clear_tape, mse, reduce_sum
from curiokit.gradcheck import finite_difference_check
from curiokit.layers import MLP


@pytest.fixture(autouse=True)
def fresh_tape():
    clear_tape()
    yield
    clear_tape()


def test_correct_mlp_passes_tightly():
    net = MLP(4, [6], 3, np.random.default_rng(0), "net", activation="tanh")
    x = Tensor(np.random.default_rng(1).normal(size=4))
    target = Tensor(np.random.default_rng(2).normal(size=3))
    report = finite_difference_check(net, lambda: mse(net(x), target), tolerance=1e-6)
    assert report.passed, report.summary()
    assert report.max_rel_err < 1e-6


def test_relu_network_passes_at_standard_tolerance():
    net = MLP(5, [8], 2, np.random.default_rng(3), "net")
    x = Tensor(np.random.default_rng(4).normal(size=(6, 5)))
    target = Tensor(np.random.default_rng(5).normal(size=(6, 2)))
    report = finite_difference_check(net, lambda: mse(net(x), target), tolerance=1e-4)
    assert report.passed, report.summary()


def test_corrupted_vjp_is_flagged():
    def broken_double(x):
        out = Tensor(2.0 * x.data)
        ad._push(out, (x,), lambda g: (3.0 * g,))  # wrong on purpose
        return out

    p = ad.Parameter(np.array([1.0, 2.0]), "p")
    report = finite_difference_check([p], lambda: reduce_sum(broken_double(p)))
    assert not report.passed
    assert report.failures[0].name == "p"
    assert "FAIL" in report.summary()


def test_parameters_restored_after_check():
    net = MLP(3, [4], 2, np.random.default_rng(6), "net")
    before = {k: v.copy() for k, v in net.state_dict().items()}
    x = Tensor(np.random.default_rng(7).normal(size=3))
    finite_difference_check(net, lambda: reduce_sum(net(x)))
    for k, v in net.state_dict().items():
        np.testing.assert_array_equal(v, before[k])


def test_report_names_every_block():
    net = MLP(2, [3], 1, np.random.default_rng(8), "net")
    x = Tensor(np.ones(2))
    report = finite_difference_check(net, lambda: reduce_sum(net(x)))
    assert {b.name for b in report.blocks} == set(net.named_parameters())
