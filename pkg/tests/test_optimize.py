import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gibbsvar.errors import ValidationError
from gibbsvar.optimize import (EvalTracker, finite_diff_gradient, gradient_descent, line_minimize,
                               powell_minimize)


def rosenbrock(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


class Counter:
    def __init__(self, f):
        self.f, self.n = f, 0

    def __call__(self, x):
        self.n += 1
        return self.f(x)


def test_fd_gradient_constant():
    est = finite_diff_gradient(lambda x: 3.0, np.zeros(4), 1e-3)
    assert np.array_equal(est.g, np.zeros(4)) and est.delta == 1e-3


def test_fd_gradient_square_bias():
    est = finite_diff_gradient(lambda x: float(x @ x), np.zeros(3), 1e-3)
    assert np.allclose(est.g, 1e-3, rtol=1e-9)


def test_fd_gradient_eval_count():
    f = Counter(lambda x: float(np.sum(np.sin(x))))
    finite_diff_gradient(f, np.ones(5), 1e-4)
    assert f.n == 6


def test_fd_gradient_errors():
    with pytest.raises(ValidationError):
        finite_diff_gradient(lambda x: 0.0, np.zeros(2), 0.0)
    bad = lambda x: math.nan if x[1] > 0 else 0.0
    with pytest.raises(FloatingPointError, match="coordinate 1"):
        finite_diff_gradient(bad, np.zeros(2), 1e-3)


@given(st.integers(0, 2 ** 32 - 1))
def test_fd_gradient_first_order_accuracy(seed):
    g = np.random.default_rng(seed)
    A = g.normal(size=(3, 3))
    A = A @ A.T
    x = g.normal(size=3)
    f = lambda y: 0.5 * float(y @ A @ y)
    exact = A @ x
    for d in (1e-3, 1e-4):
        err = np.abs(finite_diff_gradient(f, x, d).g - exact)
        assert np.all(err <= 0.5 * np.abs(np.diag(A)) * d + 1e-7)


def test_gradient_descent_quadratic_bowl():
    x0 = np.array([1.0, -2.0])
    tr = gradient_descent(lambda x: float(x @ x), x0, 0.25, iters=10, delta=1e-9)
    # x_{t+1} = x_t - 0.25 * 2 x_t = 0.5 x_t; record t holds f(x_t)
    for t, rec in enumerate(tr.records[:10]):
        assert rec.best_F == pytest.approx(0.25 ** t * float(x0 @ x0), rel=1e-5, abs=1e-12)


def test_gradient_descent_at_minimum():
    tr = gradient_descent(lambda x: float(x @ x), np.zeros(2), 0.1, iters=5, tol=1e-6, delta=1e-9)
    assert tr.converged and np.linalg.norm(tr.best_x) <= 1e-6


def test_gradient_descent_halves_rate_on_divergence():
    tr = gradient_descent(lambda x: float(x @ x), np.array([1.0]), 1.5, iters=40, delta=1e-9)
    assert tr.metadata["rate_halvings"]
    assert tr.metadata["rate_halvings"][0]["rate"] == 0.75


def test_gradient_descent_budget():
    tr = gradient_descent(lambda x: float(x @ x), np.ones(3), 0.1, iters=100, max_evals=10)
    assert tr.incomplete and tr.evals == 10


def test_gradient_descent_rejects_rate():
    with pytest.raises(ValidationError):
        gradient_descent(lambda x: 0.0, np.zeros(1), 0.0)


def test_line_minimize_quadratic():
    f = lambda x: float((x[0] - 2.5) ** 2)
    x, fx = line_minimize(f, np.zeros(1), f(np.zeros(1)), np.array([1.0]))
    assert x[0] == pytest.approx(2.5, abs=1e-6)
    x, _ = line_minimize(f, np.zeros(1), f(np.zeros(1)), np.array([-1.0]))
    assert x[0] == pytest.approx(2.5, abs=1e-6)


def test_powell_1d_quadratic():
    f = Counter(lambda x: float((x[0] - 3.0) ** 2 + 1.0))
    tr = powell_minimize(f, np.array([0.0]), ftol=1e-10, max_evals=1000)
    assert tr.converged and f.n < 100
    assert tr.best_F - 1.0 <= 1e-10


def test_powell_rosenbrock():
    tr = powell_minimize(rosenbrock, np.array([-1.2, 1.0]), max_evals=10_000)
    assert tr.best_F < 1e-4


def test_powell_idle_coordinate():
    f = lambda x: float((x[0] - 1.0) ** 2)
    tr = powell_minimize(f, np.array([0.0, 0.7]), max_evals=2000)
    assert tr.best_x[0] == pytest.approx(1.0, abs=1e-6)
    assert abs(tr.best_x[1] - 0.7) <= 1e-6


def test_powell_budget_flag_and_trace():
    tr = powell_minimize(rosenbrock, np.array([-1.2, 1.0]), max_evals=120, interval=50)
    assert tr.incomplete and not tr.converged
    assert [r.evals for r in tr.records] == [1, 50, 100, 120]
    F = [r.best_F for r in tr.records]
    assert all(b <= a for a, b in zip(F, F[1:]))


def test_powell_rejects_tiny_budget():
    with pytest.raises(ValidationError):
        powell_minimize(rosenbrock, np.zeros(2), max_evals=2)


@given(st.integers(0, 2 ** 32 - 1))
def test_powell_convex_quadratics(seed):
    g = np.random.default_rng(seed)
    A = g.normal(size=(4, 4))
    A = A @ A.T + 0.5 * np.eye(4)
    b = g.normal(size=4)
    f = lambda x: float(0.5 * x @ A @ x - b @ x)
    tr = powell_minimize(f, np.zeros(4), max_evals=5000)
    xstar = np.linalg.solve(A, b)
    # sweep-level ftol stopping leaves a small gap on ill-conditioned bowls
    assert tr.best_F <= f(xstar) + 1e-6 * (1 + abs(f(xstar)))


def test_eval_tracker_snapshots():
    t = EvalTracker(lambda x: -float(x[0]), max_evals=None, interval=2)
    for v in range(5):
        t(np.array([float(v)]))
    assert [r.evals for r in t.records] == [1, 2, 4]
    assert t.trace().records[-1].evals == 5
    with pytest.raises(FloatingPointError):
        EvalTracker(lambda x: math.inf)(np.zeros(1))


def test_deterministic():
    a = powell_minimize(rosenbrock, np.array([-1.2, 1.0]), max_evals=500)
    b = powell_minimize(rosenbrock, np.array([-1.2, 1.0]), max_evals=500)
    assert [r.best_F for r in a.records] == [r.best_F for r in b.records]
