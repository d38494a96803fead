"""Finite-difference checker: catches wrong gradients, trusts right ones."""

import numpy as np
import pytest

from compzsl.errors import DeterminismError, NumericError
from compzsl.gradcheck import grad_check
from compzsl.numerics import Parameter, Tensor, matmul, mul, sum_all


def quadratic_setup(n=3):
    rng = np.random.default_rng(7)
    p = Parameter("p", Tensor(rng.standard_normal((n, n))))
    c = Tensor(rng.standard_normal((n, n)))

    def loss_fn():
        return sum_all(mul(matmul(p.value, p.value), c))

    return p, loss_fn


class TestGradCheck:
    def test_correct_gradient_passes(self):
        p, loss_fn = quadratic_setup()
        report = grad_check(loss_fn, [p], tol=1e-6)
        assert report.passed
        assert report.max_rel_error < 1e-6
        assert report.entries_checked == 9

    def test_wrong_gradient_detected(self):
        p, loss_fn = quadratic_setup()

        def broken():
            out = loss_fn()
            inner = out._parents[0]
            orig = inner._backward

            def sabotaged(g):
                orig(g * 1.5)

            inner._backward = sabotaged
            return out

        report = grad_check(broken, [p], tol=1e-6)
        assert not report.passed
        assert report.max_rel_error > 0.1
        assert report.worst_parameter == "p"

    def test_nondeterministic_loss_rejected(self):
        p = Parameter("p", Tensor([[1.0]]))
        rng = np.random.default_rng(0)

        def noisy():
            return sum_all(mul(p.value, float(rng.standard_normal())))

        with pytest.raises(DeterminismError):
            grad_check(noisy, [p])

    def test_eps_must_be_positive(self):
        p, loss_fn = quadratic_setup()
        with pytest.raises(NumericError):
            grad_check(loss_fn, [p], eps=0.0)

    def test_subsampling_respects_budget(self):
        p, loss_fn = quadratic_setup(n=20)
        report = grad_check(loss_fn, [p], max_entries=37, tol=1e-6)
        assert report.entries_checked == 37
        assert report.passed

    def test_parameters_restored_after_check(self):
        p, loss_fn = quadratic_setup()
        before = p.value.data.copy()
        grad_check(loss_fn, [p], tol=1e-6)
        assert np.array_equal(p.value.data, before)

    def test_summary_mentions_worst_entry(self):
        p, loss_fn = quadratic_setup()
        report = grad_check(loss_fn, [p], tol=1e-6)
        assert "p[" in report.summary()
        assert "pass" in report.summary()
