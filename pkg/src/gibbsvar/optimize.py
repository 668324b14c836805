"""Gradient descent and Powell's conjugate-direction method with best-so-far traces."""
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import ValidationError

GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))  # 0.381966...
EXPAND = 1.0 + (1.0 + math.sqrt(5.0)) / 2.0
DEFAULT_INTERVAL = 50
DIVERGENCE_PATIENCE = 10


@dataclass
class TraceRecord:
    evals: int
    best_F: float
    best_x: np.ndarray


@dataclass
class OptimizationTrace:
    records: List[TraceRecord] = field(default_factory=list)
    final_state: object = None
    incomplete: bool = False
    converged: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def best_F(self) -> float:
        return self.records[-1].best_F

    @property
    def best_x(self) -> np.ndarray:
        return self.records[-1].best_x

    @property
    def evals(self) -> int:
        return self.records[-1].evals


@dataclass
class GradientEstimate:
    g: np.ndarray
    delta: float
    f0: float = float("nan")


class BudgetExhausted(Exception):
    pass


class EvalTracker:
    """Wraps an objective: counts calls, keeps the running minimum, and
    snapshots it every ``interval`` evaluations (and at the first one).

    Once ``max_evals`` calls have been made, further calls raise
    :class:`BudgetExhausted`.
    """

    def __init__(self, objective: Callable, max_evals: Optional[int] = None,
                 interval: Optional[int] = DEFAULT_INTERVAL):
        self.objective = objective
        self.max_evals = max_evals
        self.interval = interval
        self.evals = 0
        self.best_F = math.inf
        self.best_x = None
        self.records: List[TraceRecord] = []

    def __call__(self, x) -> float:
        if self.max_evals is not None and self.evals >= self.max_evals:
            raise BudgetExhausted
        x = np.array(x, dtype=np.float64)
        f = float(self.objective(x))
        self.evals += 1
        if not math.isfinite(f):
            raise FloatingPointError(f"objective returned {f} at evaluation {self.evals}")
        if f < self.best_F:
            self.best_F = f
            self.best_x = x
        if self.interval and (self.evals == 1 or self.evals % self.interval == 0):
            self.snapshot()
        return f

    def snapshot(self):
        if self.records and self.records[-1].evals == self.evals:
            return
        self.records.append(TraceRecord(self.evals, self.best_F, self.best_x.copy()))

    def trace(self, **kwargs) -> OptimizationTrace:
        if self.evals:
            self.snapshot()
        return OptimizationTrace(records=self.records, **kwargs)


def finite_diff_gradient(objective: Callable, x, delta: float, f0: Optional[float] = None) -> GradientEstimate:
    """Forward differences ``(f(x + delta e_i) - f(x)) / delta``; N+1 calls."""
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta!r}")
    x = np.asarray(x, dtype=np.float64)
    if f0 is None:
        f0 = float(objective(x))
    if not math.isfinite(f0):
        raise FloatingPointError(f"objective is {f0} at the base point")
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        xp = x.copy()
        xp[i] += delta
        fi = float(objective(xp))
        if not math.isfinite(fi):
            raise FloatingPointError(f"objective is {fi} after stepping coordinate {i}")
        g[i] = (fi - f0) / delta
    return GradientEstimate(g, float(delta), f0)


def gradient_descent(objective: Callable, x0, rate: float, iters: int = 100, tol: float = 1e-8,
                     delta: float = 1e-4, max_evals: Optional[int] = None) -> OptimizationTrace:
    """``x <- x - rate * grad f(x)`` with forward-difference gradients.

    One record per iteration. If f rises for ten consecutive steps the rate
    is halved; each halving is logged in ``metadata["rate_halvings"]``.
    """
    if not rate > 0:
        raise ValidationError(f"rate must be positive, got {rate!r}")
    tracker = EvalTracker(objective, max_evals, interval=None)
    x = np.array(x0, dtype=np.float64)
    halvings = []
    rises = 0
    prev_f = math.inf
    converged = incomplete = False
    try:
        for it in range(iters):
            est = finite_diff_gradient(tracker, x, delta)
            tracker.snapshot()
            if est.f0 > prev_f:
                rises += 1
                if rises >= DIVERGENCE_PATIENCE:
                    rate *= 0.5
                    halvings.append({"iteration": it, "rate": rate})
                    rises = 0
            else:
                rises = 0
            prev_f = est.f0
            if np.linalg.norm(est.g) < tol:
                converged = True
                break
            x = x - rate * est.g
        else:
            tracker(x)
            tracker.snapshot()
    except BudgetExhausted:
        incomplete = True
    return tracker.trace(incomplete=incomplete, converged=converged,
                         metadata={"rate": rate, "rate_halvings": halvings, "delta": delta})


def _bracket(f, fa, step, max_expand=50):
    """Golden expansion from 0 along a line; returns (a, b, c, fa, fb, fc) with fb <= fa, fc."""
    a, b = 0.0, step
    fb = f(b)
    if fb > fa:
        a, b, fa, fb = b, a, fb, fa
    c = b + (EXPAND - 1.0) * (b - a)
    fc = f(c)
    for _ in range(max_expand):
        if fb <= fc:
            break
        a, b, fa, fb = b, c, fb, fc
        c = b + (EXPAND - 1.0) * (b - a)
        fc = f(c)
    return a, b, c, fa, fb, fc


def _golden(f, a, b, c, fb, xtol):
    """Golden-section search on the bracket (a, b, c); returns (xmin, fmin)."""
    lo, hi = min(a, c), max(a, c)
    x, fx = b, fb
    while hi - lo > xtol * (1.0 + abs(x)):
        if (x - lo) > (hi - x):
            u = x - GOLDEN * (x - lo)
        else:
            u = x + GOLDEN * (hi - x)
        fu = f(u)
        if fu < fx:
            if u < x:
                hi = x
            else:
                lo = x
            x, fx = u, fu
        else:
            if u < x:
                lo = u
            else:
                hi = u
    return x, fx


def line_minimize(f: Callable, x, fx: float, direction, step: float = 1.0, xtol: float = 1e-8):
    """Minimize ``f(x + s * direction)`` over s; returns the new point and value."""
    line = lambda s: f(x + s * direction)
    a, b, c, _, fb, _ = _bracket(line, fx, step)
    s, fs = _golden(line, a, b, c, fb, xtol)
    if fs < fx:
        return x + s * direction, fs
    return x, fx


def powell_minimize(objective: Callable, x0, ftol: float = 1e-10, max_evals: int = 5000,
                    interval: int = DEFAULT_INTERVAL, xtol: float = 1e-8,
                    step: float = 1.0) -> OptimizationTrace:
    """Powell's conjugate-direction method.

    Each sweep line-minimizes along every direction in the set, then along
    the net displacement, which replaces the oldest direction. The set is
    reset to the coordinate axes every ``dim`` sweeps, and also when a sweep
    stalls; convergence is declared only when a sweep along the fresh axes
    improves f by less than ``ftol`` (relative). Line minimization is
    a golden-ratio bracket followed by golden-section search to ``xtol``.

    Running out of ``max_evals`` is not an error: the best-so-far trace is
    returned with ``incomplete=True``.
    """
    x = np.array(x0, dtype=np.float64)
    dim = x.shape[0]
    if max_evals < dim + 1:
        raise ValidationError(f"max_evals must be >= dim + 1 = {dim + 1}")
    tracker = EvalTracker(objective, max_evals, interval)
    converged = incomplete = False
    sweeps = 0
    try:
        fx = tracker(x)
        directions = np.eye(dim)
        since_reset = 0
        while True:
            if since_reset == dim:
                directions, since_reset = np.eye(dim), 0
            x_start, f_start = x.copy(), fx
            for i in range(dim):
                x, fx = line_minimize(tracker, x, fx, directions[i], step, xtol)
            sweeps += 1
            since_reset += 1
            if 2.0 * (f_start - fx) <= ftol * (abs(f_start) + abs(fx)) + 1e-300:
                if since_reset == 1:
                    converged = True
                    break
                # a stalled sweep on an updated set may just mean the set has
                # gone degenerate; only a stall on the axes counts
                directions, since_reset = np.eye(dim), 0
                continue
            disp = x - x_start
            norm = np.linalg.norm(disp)
            if norm > 0 and dim > 1:  # in 1-D the displacement is the only direction
                u = disp / norm
                x, fx = line_minimize(tracker, x, fx, u, step, xtol)
                directions = np.vstack([directions[1:], u])
    except BudgetExhausted:
        incomplete = True
    return tracker.trace(incomplete=incomplete, converged=converged,
                         metadata={"sweeps": sweeps, "xtol": xtol, "ftol": ftol})
