"""Certified Fourier-series approximation of ln p on [p_min, 1].

Pipeline::

    choose_taylor_truncation -> taylor_log -> taylor_to_fourier -> to_real_form

and :func:`build_log_series` runs all of it and refuses to return a series
that fails its grid certificate.

The Taylor series is taken in ``x = 1 - p`` (``ln p = -sum_k x^k / k``) and
converted to a series in ``e^{i pi m x / 2}`` through the arcsine
substitution: on ``|x| <= 1 - delta``, ``x = (2/pi) arcsin(sin(pi x / 2))``,
the arcsine power series has non-negative coefficients summing to one, and
every power of ``sin`` is a finite Fourier sum with unit l1-norm. Truncating
the power series in ``sin`` and then the frequencies can only shrink the
l1-norm, which is why ``||c||_1 <= ||a||_1`` holds by construction.
"""
import functools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from . import kernels
from .errors import CertificateError, ValidationError

DEFAULT_GRID = 10_000


@dataclass(frozen=True)
class TaylorSeries:
    """``a0 + sum_{k=1}^K a_k x^k`` with ``x = 1 - p``."""

    a: np.ndarray
    a0: float = 0.0

    @property
    def K(self) -> int:
        return len(self.a)

    @property
    def l1(self) -> float:
        return abs(self.a0) + float(np.sum(np.abs(self.a)))

    def poly(self, x):
        x = np.asarray(x, dtype=np.float64)
        acc = np.zeros_like(x)
        for ak in self.a[::-1]:
            acc = (acc + ak) * x
        return acc + self.a0

    def __call__(self, p):
        return self.poly(1.0 - np.asarray(p, dtype=np.float64))


@dataclass(frozen=True)
class ComplexFourierSeries:
    """``sum_{m=-M}^{M} c_m e^{i pi m x / 2}``; ``c[m + M]`` holds ``c_m``."""

    M: int
    c: np.ndarray

    @property
    def l1(self) -> float:
        return float(np.sum(np.abs(self.c)))

    def coeff(self, m: int) -> complex:
        return complex(self.c[m + self.M])

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        m = np.arange(-self.M, self.M + 1)
        return np.exp(0.5j * np.pi * np.outer(x, m)) @ self.c

    def at_p(self, p):
        """Real part of the series at ``x = 1 - p``."""
        return np.real(self(1.0 - np.atleast_1d(np.asarray(p, dtype=np.float64))))


@dataclass(frozen=True)
class RealFourierSeries:
    """``constant + sum_m b1_m cos(t_m p) + b2_m sin(t_m p)`` with ``t_m = pi m / 2``."""

    M: int
    b1: np.ndarray
    b2: np.ndarray
    t: np.ndarray
    constant: float = 0.0
    p_min: Optional[float] = None
    eps: Optional[float] = None

    @property
    def b_l1(self) -> float:
        return float(np.sum(np.abs(self.b1)) + np.sum(np.abs(self.b2)))

    def __call__(self, p):
        p = np.atleast_1d(np.asarray(p, dtype=np.float64))
        return kernels.series_eval(np.ascontiguousarray(p), float(self.constant),
                                   self.b1, self.b2, self.t)

    def truncate(self, M: int) -> "RealFourierSeries":
        return RealFourierSeries(M, self.b1[:M].copy(), self.b2[:M].copy(), self.t[:M].copy(),
                                 self.constant, self.p_min, self.eps)

    def to_dict(self) -> dict:
        return {
            "p_min": self.p_min,
            "eps": self.eps,
            "M": int(self.M),
            "constant": float(self.constant),
            "b1": [float(v) for v in self.b1],
            "b2": [float(v) for v in self.b2],
            "t": [float(v) for v in self.t],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RealFourierSeries":
        try:
            M = int(d["M"])
            b1 = np.asarray(d["b1"], dtype=np.float64)
            b2 = np.asarray(d["b2"], dtype=np.float64)
            t = np.asarray(d["t"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed series document: {exc}") from exc
        if not (len(b1) == len(b2) == len(t) == M):
            raise ValidationError("series arrays must all have length M")
        return cls(M, b1, b2, t, float(d.get("constant", 0.0)), d.get("p_min"), d.get("eps"))


@dataclass(frozen=True)
class ErrorCertificate:
    grid_size: int
    max_error: float
    target_eps: float
    passed: bool
    interval: tuple = (0.0, 1.0)
    worst_point: float = float("nan")
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["interval"] = list(self.interval)
        return d


def _check_pmin_eps(p_min, eps):
    if not (0.0 < p_min <= 1.0):
        raise ValidationError(f"p_min must lie in (0, 1], got {p_min!r}")
    if not eps > 0.0:
        raise ValidationError(f"eps must be positive, got {eps!r}")


def taylor_remainder_bound(p_min: float, K: int) -> float:
    return (1.0 - p_min) ** K / (K + 1)


def choose_taylor_truncation(p_min: float, eps: float) -> int:
    """Smallest K with ``(1 - p_min)^K / (K + 1) <= eps / 4``."""
    _check_pmin_eps(p_min, eps)
    target = eps / 4.0
    # bound is monotone decreasing in K; exponential search then bisection
    hi = 1
    while taylor_remainder_bound(p_min, hi) > target:
        hi *= 2
    lo = hi // 2
    if lo < 1:
        return 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if taylor_remainder_bound(p_min, mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def tail_remainder_bound(p_min: float, K: int) -> float:
    """Rigorous tail bound ``sum_{k>K} x^k / k <= x^(K+1) / ((K+1)(1-x))``, x = 1 - p_min."""
    return (1.0 - p_min) ** (K + 1) / ((K + 1) * p_min)


def choose_certified_truncation(p_min: float, eps: float) -> int:
    """Smallest K whose rigorous tail bound is ``<= eps / 4``.

    :func:`choose_taylor_truncation` uses the cruder ``(1-p)^K/(K+1)`` estimate,
    which misses a ``1/p_min`` factor and undershoots K for small ``p_min``.
    """
    _check_pmin_eps(p_min, eps)
    if p_min >= 1.0:
        return 1
    target = eps / 4.0
    K = max(1, choose_taylor_truncation(p_min, eps))
    while tail_remainder_bound(p_min, K) > target:
        K += max(1, K // 8)
    while K > 1 and tail_remainder_bound(p_min, K - 1) <= target:
        K -= 1
    return K


def taylor_log(K: int) -> TaylorSeries:
    if K < 1:
        raise ValidationError(f"K must be >= 1, got {K}")
    return TaylorSeries(-1.0 / np.arange(1, K + 1))


def fourier_degree(a_l1: float, delta: float, eps: float) -> int:
    """``M = 2 ceil(ln(4 ||a||_1 / eps) / delta)``."""
    return 2 * math.ceil(math.log(4.0 * a_l1 / eps) / delta)


def _arcsine_series(J: int) -> np.ndarray:
    """Coefficients of ``(2/pi) arcsin(y)`` up to degree J (they sum to 1 as J -> inf)."""
    g = np.zeros(J + 1)
    beta = 2.0 / np.pi
    for l in range((J - 1) // 2 + 1):
        g[2 * l + 1] = beta
        beta *= (2 * l + 1) ** 2 / ((2 * l + 2) * (2 * l + 3))
    return g


def _sine_degree(a_l1: float, delta: float, budget: float) -> int:
    """Smallest J with ``||a||_1 cos(pi delta / 2)^(J+1) <= budget``."""
    y0 = math.cos(0.5 * math.pi * delta)
    if y0 <= 0.0:
        return 1
    need = math.log(a_l1 / budget) / -math.log(y0) - 1.0
    return max(1, math.ceil(need))


def taylor_to_fourier(ts: TaylorSeries, delta: float, eps: float) -> ComplexFourierSeries:
    """Convert a Taylor polynomial in x to a Fourier series in ``e^{i pi m x/2}``.

    Accuracy target on ``[-1 + delta, 1 - delta]`` is ``3 eps / 4`` relative to
    the polynomial; the remaining ``eps / 4`` belongs to the Taylor truncation.
    """
    a_l1 = ts.l1
    if not 0.0 < delta <= 1.0:
        raise ValidationError(f"delta must lie in (0, 1], got {delta!r}")
    if not (0.0 < eps <= 4.0 * a_l1):
        raise ValidationError(f"eps must lie in (0, 4*||a||_1] = (0, {4 * a_l1}], got {eps!r}")
    M = fourier_degree(a_l1, delta, eps)
    if ts.K == 0 or np.all(ts.a == 0):
        c = np.zeros(2 * M + 1, dtype=np.complex128)
        c[M] = ts.a0
        return ComplexFourierSeries(M, c)
    # sin-power truncation gets half the 3eps/4 conversion budget; the
    # frequency cut at M is far below that for the chosen M
    J = _sine_degree(a_l1, delta, 3.0 * eps / 8.0)
    g = _arcsine_series(J)
    # Horner in g: P = a0 + g (a1 + g (a2 + ...)), truncated to degree J
    poly = np.array([ts.a[-1]])
    for ak in list(ts.a[-2::-1]) + [ts.a0]:
        poly = _truncated_product(poly, g, J)
        poly[0] += ak
    gamma = np.zeros(J + 1)
    gamma[:len(poly)] = poly
    c = kernels.binomial_fourier(gamma, M)
    return ComplexFourierSeries(M, c)


def _truncated_product(p, q, J):
    if len(p) * len(q) < 200_000:
        out = np.convolve(p, q)
    else:
        out = fftconvolve(p, q)
    return out[:J + 1].copy()


def to_real_form(cf: ComplexFourierSeries, p_min=None, eps=None) -> RealFourierSeries:
    """Rewrite ``Re sum_m c_m e^{i pi m (1-p)/2}`` as a cosine/sine series in p.

    With ``d_m = c_m e^{i pi m / 2}`` the pair (m, -m) contributes
    ``(d_m + d_-m) cos(t_m p) - i (d_m - d_-m) sin(t_m p)``.
    """
    M = cf.M
    m = np.arange(1, M + 1)
    rot = np.exp(0.5j * np.pi * m)
    d_pos = cf.c[M + 1:] * rot
    d_neg = cf.c[M - 1::-1] * rot.conj()
    b1 = np.real(d_pos + d_neg)
    b2 = np.imag(d_pos - d_neg)
    t = 0.5 * np.pi * m.astype(np.float64)
    return RealFourierSeries(M, b1, b2, t, float(np.real(cf.c[M])), p_min, eps)


def verify_error(series: Callable, target: Callable, interval: Sequence[float],
                 grid_size: int = DEFAULT_GRID, eps: float = 0.0) -> ErrorCertificate:
    """Max of ``|target - series|`` over a uniform grid plus both endpoints."""
    lo, hi = float(interval[0]), float(interval[1])
    grid = np.unique(np.concatenate([np.linspace(lo, hi, grid_size), [lo, hi]]))
    err = np.abs(np.real(np.asarray(target(grid))) - np.real(np.asarray(series(grid))))
    i = int(np.argmax(err))
    max_error = float(err[i])
    return ErrorCertificate(len(grid), max_error, float(eps), bool(max_error <= eps),
                            (lo, hi), float(grid[i]))


@functools.lru_cache(maxsize=64)
def _build_cached(p_min: float, eps: float, grid_size: int):
    K = choose_certified_truncation(p_min, eps)
    ts = taylor_log(K)
    cf = taylor_to_fourier(ts, p_min, eps)
    series = to_real_form(cf, p_min, eps)
    cert = verify_error(series, np.log, (p_min, 1.0), grid_size, eps)
    notes = {
        "K": K,
        "taylor_budget": eps / 4.0,
        "conversion_budget": 3.0 * eps / 4.0,
        "a_l1": ts.l1,
        "c_l1": cf.l1,
        "b_l1": series.b_l1,
    }
    cert = ErrorCertificate(cert.grid_size, cert.max_error, cert.target_eps, cert.passed,
                            cert.interval, cert.worst_point, notes)
    return series, cert


def build_log_series(p_min: float, eps: float, grid_size: int = DEFAULT_GRID):
    """Certified ``(RealFourierSeries, ErrorCertificate)`` for ln on ``[p_min, 1]``.

    Raises :class:`CertificateError` (carrying the certificate) if the grid
    check fails; an uncertified series is never returned.
    """
    _check_pmin_eps(p_min, eps)
    if p_min >= 1.0:
        raise ValidationError("p_min must be < 1 to build a series")
    if grid_size < DEFAULT_GRID:
        raise ValidationError(f"grid_size must be >= {DEFAULT_GRID}")
    series, cert = _build_cached(float(p_min), float(eps), int(grid_size))
    if not cert.passed:
        raise CertificateError(
            f"series for p_min={p_min}, eps={eps} has max error {cert.max_error:.3e} > eps",
            cert, series)
    return series, cert


def series_document(series: RealFourierSeries, cert: Optional[ErrorCertificate] = None) -> dict:
    doc = series.to_dict()
    if cert is not None:
        doc["certificate"] = cert.to_dict()
        doc["passed"] = cert.passed
    return doc


def load_series(path) -> RealFourierSeries:
    with open(path) as fh:
        return RealFourierSeries.from_dict(json.load(fh))
