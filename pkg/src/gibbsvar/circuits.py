"""Measurement statistics of the entropy and energy circuits, shot sampling,
and query-cost accounting.

The oracles are never compiled to gates. Outcome probabilities are computed
exactly from the state spectrum (entropy circuit) or from the LCU data
(energy circuit); ``sample_bernoulli`` supplies finite-shot noise on top.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import ValidationError
from .fourierlog import build_log_series
from .hamiltonians import LCUDecomposition
from .numkernel import DensityMatrix, PureStateVector

PROB_TOL = 1e-12


@dataclass(frozen=True)
class ShotResult:
    shots: int
    plus_count: int

    @property
    def estimate(self) -> float:
        return 2.0 * self.plus_count / self.shots - 1.0


@dataclass(frozen=True)
class QueryCostReport:
    oracle_name: str
    eps: float
    query_count: int
    formula_terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _spectrum(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.spectrum()
    return np.clip(np.linalg.eigvalsh(np.asarray(rho)), 0.0, None)


def fourier_term_expectation(rho, t: float, kind: str = "cos") -> float:
    """``Tr(rho cos(rho t))`` or ``Tr(rho sin(rho t))``."""
    C, S = kernels.trig_moments(_spectrum(rho), np.array([float(t)]))
    if kind == "cos":
        return float(C[0])
    if kind == "sin":
        return float(S[0])
    raise ValidationError(f"kind must be 'cos' or 'sin', got {kind!r}")


def fourier_term_probability(rho, t: float, phase: float = 0.0) -> float:
    """``Pr(+) = (1 + Tr(rho cos(rho t + phase))) / 2``.

    ``phase=0`` gives the cosine term, ``phase=-pi/2`` the sine term.
    """
    p = _spectrum(rho)
    val = float(np.dot(p, np.cos(p * t + phase)))
    return min(1.0, max(0.0, 0.5 * (1.0 + val)))


def energy_probability(psi, lcu: LCUDecomposition) -> float:
    """``Pr(+1) = (1 + <psi|H|psi> / ||alpha||_1) / 2`` for ``H = sum alpha_k V_k``."""
    amp = psi.amplitudes if isinstance(psi, PureStateVector) else np.asarray(psi, dtype=np.complex128)
    if amp.shape[0] != lcu.dim:
        raise ValidationError(f"state dim {amp.shape[0]} != LCU dim {lcu.dim}")
    expect = sum(a * np.vdot(amp, V @ amp) for a, V in zip(lcu.alphas, lcu.unitaries))
    val = 0.5 * (1.0 + float(np.real(expect)) / lcu.alpha_norm)
    return min(1.0, max(0.0, val))


def sample_bernoulli(p: float, shots: int, seed) -> ShotResult:
    """Binomial(shots, p) draw from a generator seeded with ``seed``.

    ``seed`` may be anything :func:`numpy.random.default_rng` accepts,
    including a ``SeedSequence``.
    """
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    if not (-PROB_TOL <= p <= 1.0 + PROB_TOL):
        raise ValidationError(f"probability {p!r} outside [0, 1]")
    p = min(1.0, max(0.0, float(p)))
    rng = np.random.default_rng(seed)
    return ShotResult(int(shots), int(rng.binomial(shots, p)))


def amplitude_estimation_cost(eps: float) -> int:
    """Oracle calls to learn a probability to additive error ``eps``: ``ceil(pi / eps)``."""
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps!r}")
    return max(1, math.ceil(math.pi / eps))


def entropy_query_count(terms: dict) -> int:
    return max(1, math.ceil(terms["b_l1"] / terms["eps"]
                            * (terms["time_sum"] + terms["precision_sum"] + terms["norm_sum"])))


def entropy_estimation_cost(p_min: float, eps: float) -> QueryCostReport:
    """Preparations of the purification needed to estimate S(rho) to ``eps``.

    ``(||b||_1 / eps) * sum_{m=1}^{M} (t_m + ln(1/eps) + ln ||b||_1)`` using the
    certified series for ``(p_min, eps)``.
    """
    series, _ = build_log_series(p_min, eps)
    b_l1 = series.b_l1
    M = series.M
    terms = {
        "M": M,
        "b_l1": b_l1,
        "eps": float(eps),
        "time_sum": float(np.sum(series.t)),
        "precision_sum": M * math.log(1.0 / eps),
        "norm_sum": M * math.log(b_l1),
        "per_term_precision": eps / b_l1,
    }
    return QueryCostReport("U_rho", float(eps), entropy_query_count(terms), terms)


def energy_estimation_cost(alpha_norm: float, eps: float) -> QueryCostReport:
    """Uses of ``U_P``, ``U_S`` and the state preparation: AE at precision ``eps / ||alpha||_1``."""
    if not alpha_norm > 0:
        raise ValidationError(f"alpha_norm must be positive, got {alpha_norm!r}")
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps!r}")
    delta = eps / alpha_norm
    terms = {"alpha_norm": float(alpha_norm), "eps": float(eps), "probability_precision": delta}
    return QueryCostReport("U_P,U_S,U_psi", float(eps), amplitude_estimation_cost(delta), terms)
