"""Free-energy objective, entropy/energy estimators and the Gibbs-preparation experiment."""
import csv
import io
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .ansatz import (AnsatzConfig, AnsatzParameters, ansatz_state, feasibility_projection,
                     linear_path_phis)
from .circuits import energy_probability, sample_bernoulli
from .errors import ConfigurationError, SpectrumWarning, ValidationError
from .fourierlog import RealFourierSeries, build_log_series
from .hamiltonians import (AdiabaticFamily, PauliSum, gibbs_free_energy, gibbs_probabilities,
                           gibbs_state, lcu_decompose, to_matrix)
from .numkernel import DensityMatrix, PureStateVector, trace_distance
from .optimize import (DEFAULT_INTERVAL, OptimizationTrace, gradient_descent,
                       powell_minimize)

ENTROPY_MODES = ("exact", "fourier_exact", "fourier_shots")
SPECTRUM_TOL = 1e-12
WORKERS_ENV = "GIBBSVAR_WORKERS"


@dataclass(frozen=True)
class ObjectiveConfig:
    beta: float
    penalty_weight: float = 100.0
    entropy_mode: str = "exact"
    p_min: float = 0.05
    series_eps: float = 1e-2
    shots_per_term: int = 1000
    base_seed: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValidationError(f"beta must be > 0, got {self.beta}")
        if not self.penalty_weight > 0:
            raise ValidationError(f"penalty_weight must be > 0, got {self.penalty_weight}")
        if self.entropy_mode not in ENTROPY_MODES:
            raise ValidationError(f"entropy_mode must be one of {ENTROPY_MODES}")
        if self.entropy_mode != "exact" and not (0 < self.p_min < 1 and self.series_eps > 0):
            raise ValidationError("fourier modes need p_min in (0, 1) and series_eps > 0")
        if self.shots_per_term < 1:
            raise ValidationError("shots_per_term must be >= 1")


def von_neumann_entropy(rho) -> float:
    """``-sum p ln p`` over the spectrum, natural log, ``0 ln 0 = 0``."""
    p = rho.spectrum() if isinstance(rho, DensityMatrix) else np.clip(np.linalg.eigvalsh(rho), 0, None)
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log(p))))


def _term_seed(seed, m: int, kind: int) -> np.random.SeedSequence:
    base = list(seed) if isinstance(seed, (tuple, list)) else [int(seed)]
    return np.random.SeedSequence(base + [m, kind])


def entropy_fourier(rho, series: Optional[RealFourierSeries], mode: str = "fourier_exact",
                    shots: Optional[int] = None, seed=0) -> float:
    """Entropy from the Fourier series of ln.

    ``S ~ -(constant + sum_m b1_m Tr(rho cos(rho t_m)) + b2_m Tr(rho sin(rho t_m)))``.
    The minus sign is applied here and nowhere else. In ``fourier_shots``
    mode every trace is replaced by ``2 k / shots - 1`` for a binomial count
    ``k`` at the circuit's outcome probability, seeded from ``(seed, m, kind)``.
    """
    if series is None:
        raise ConfigurationError("a certified series is required for Fourier entropy")
    p = rho.spectrum() if isinstance(rho, DensityMatrix) else np.clip(np.linalg.eigvalsh(rho), 0, None)
    if series.p_min is not None and p.min() < series.p_min - SPECTRUM_TOL:
        warnings.warn(f"spectrum minimum {p.min():.3g} below certified p_min {series.p_min}",
                      SpectrumWarning, stacklevel=2)
    C, S = kernels.trig_moments(np.ascontiguousarray(p), series.t)
    if mode == "fourier_shots":
        if shots is None or shots < 1:
            raise ConfigurationError("fourier_shots mode needs shots >= 1")
        C = np.array([sample_bernoulli(0.5 * (1 + c), shots, _term_seed(seed, m, 0)).estimate
                      for m, c in enumerate(C)])
        S = np.array([sample_bernoulli(0.5 * (1 + s), shots, _term_seed(seed, m, 1)).estimate
                      for m, s in enumerate(S)])
    elif mode != "fourier_exact":
        raise ConfigurationError(f"unknown Fourier entropy mode {mode!r}")
    ln_moment = series.constant * p.sum() + np.dot(series.b1, C) + np.dot(series.b2, S)
    return float(-ln_moment)


def average_energy(rho, h, route: str = "exact", psi=None) -> float:
    """``Tr(rho H)``.

    ``route="purification"`` instead runs the LCU circuit statistics on the
    purification ``psi`` (system register first) and rescales:
    ``E = ||alpha||_1 (2 Pr(+1) - 1)``.
    """
    if route == "exact":
        H = to_matrix(h) if isinstance(h, PauliSum) else np.asarray(h)
        m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
        if m.shape != H.shape:
            raise ValidationError(f"dimension mismatch: rho {m.shape} vs H {H.shape}")
        return float(np.real(np.vdot(H.conj().T, m)))  # Tr(rho H) = sum conj(H^dag)_ij rho_ij
    if route == "purification":
        if psi is None:
            raise ValidationError("purification route needs psi")
        amp = psi.amplitudes if isinstance(psi, PureStateVector) else np.asarray(psi)
        lcu = lcu_decompose(h)
        if amp.shape[0] % lcu.dim:
            raise ValidationError(f"purification dim {amp.shape[0]} not a multiple of {lcu.dim}")
        ext = lcu.extended(amp.shape[0] // lcu.dim)
        return ext.alpha_norm * (2.0 * energy_probability(amp, ext) - 1.0)
    raise ValidationError(f"unknown energy route {route!r}")


def free_energy(params: AnsatzParameters, family: AdiabaticFamily, acfg: AnsatzConfig,
                ocfg: ObjectiveConfig, series: Optional[RealFourierSeries] = None, seed=None,
                h_matrix: Optional[np.ndarray] = None) -> float:
    """``Tr(rho H) - S(rho) / beta + penalty_weight * violation``.

    ``rho`` is built from the feasibility-projected parameters; ``violation``
    is the squared distance of that projection.
    """
    proj, violation = feasibility_projection(params)
    rho = ansatz_state(proj, family, acfg)
    H = to_matrix(family.hamiltonian()) if h_matrix is None else h_matrix
    energy = average_energy(rho, H)
    if ocfg.entropy_mode == "exact":
        S = von_neumann_entropy(rho)
    else:
        if series is None:
            series, _ = build_log_series(ocfg.p_min, ocfg.series_eps)
        S = entropy_fourier(rho, series, ocfg.entropy_mode, ocfg.shots_per_term,
                            ocfg.base_seed if seed is None else seed)
    return energy - S / ocfg.beta + ocfg.penalty_weight * violation


class FreeEnergyObjective:
    """Callable ``x -> F`` over the flat vector ``(phi_1..phi_r, p_1..p_{D-1})``.

    Counts its own evaluations; shot-mode seeds are ``(base_seed, eval index)``
    so results do not depend on who calls in which order beyond that index.
    """

    def __init__(self, family: AdiabaticFamily, acfg: AnsatzConfig, ocfg: ObjectiveConfig,
                 series: Optional[RealFourierSeries] = None):
        if family.n != acfg.n:
            raise ValidationError(f"family has {family.n} qubits, config says {acfg.n}")
        self.family, self.acfg, self.ocfg = family, acfg, ocfg
        self.h_matrix = to_matrix(family.hamiltonian())
        if ocfg.entropy_mode != "exact" and series is None:
            series, _ = build_log_series(ocfg.p_min, ocfg.series_eps)
        self.series = series
        self.evals = 0

    def params(self, x) -> AnsatzParameters:
        return AnsatzParameters.from_vector(x, self.acfg.r)

    def __call__(self, x) -> float:
        seed = (self.ocfg.base_seed, self.evals)
        self.evals += 1
        return free_energy(self.params(x), self.family, self.acfg, self.ocfg, self.series, seed,
                           self.h_matrix)

    def state(self, x) -> DensityMatrix:
        proj, _ = feasibility_projection(self.params(x))
        return ansatz_state(proj, self.family, self.acfg)


def gibbs_matched_probs(family: AdiabaticFamily, beta: float) -> np.ndarray:
    """Gibbs probabilities of H = H0 + H1 placed on computational basis states.

    Basis state j gets the weight of the H eigenlevel whose rank equals the
    rank of H0's diagonal entry j. This is what an adiabatic sweep from H0
    to H carries over; for H1 = 0 it reproduces the Gibbs state exactly.
    """
    _, _, pg = gibbs_probabilities(family.hamiltonian(), beta)
    e0 = np.real(np.diag(family.matrices[0]))
    rank = np.argsort(np.argsort(e0, kind="stable"), kind="stable")
    return pg[rank]


def initial_parameters(family: AdiabaticFamily, acfg: AnsatzConfig, beta: float, init: str,
                       sigma: float, rng: np.random.Generator) -> AnsatzParameters:
    D, r = acfg.D, acfg.r
    if init == "perturbed_truth":
        probs = gibbs_matched_probs(family, beta)[:D - 1] + rng.normal(0.0, sigma, D - 1)
        phi = linear_path_phis(r) + rng.normal(0.0, sigma, r)
    elif init == "random":
        probs = rng.dirichlet(np.ones(D))[:D - 1]
        phi = rng.normal(0.0, 1.0, r)
    else:
        raise ValidationError(f"unknown init {init!r}")
    params, _ = feasibility_projection(AnsatzParameters(phi, probs))
    return params


@dataclass
class ExperimentResult:
    trace: OptimizationTrace
    rows: list
    F_gibbs: float
    initial: AnsatzParameters
    settings: dict = field(default_factory=dict)

    @property
    def final(self) -> dict:
        return self.rows[-1]

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["evals", "best_F", "delta_F", "trace_distance"])
        for row in self.rows:
            w.writerow([row["evals"], repr(row["best_F"]), repr(row["delta_F"]),
                        repr(row["trace_distance"])])
        return buf.getvalue()

    def summary(self, delta_f_target: float = 0.05, td_target: float = 0.1) -> dict:
        f = self.final
        return {
            "final_delta_F": f["delta_F"],
            "final_trace_distance": f["trace_distance"],
            "evals_used": self.trace.evals,
            "F_gibbs": self.F_gibbs,
            "incomplete": self.trace.incomplete,
            "converged": self.trace.converged,
            "delta_F_target": delta_f_target,
            "trace_distance_target": td_target,
            "verdict": "pass" if (f["delta_F"] <= delta_f_target and f["trace_distance"] <= td_target)
            else "fail",
        }

    def to_dict(self) -> dict:
        return {
            "settings": self.settings,
            "F_gibbs": self.F_gibbs,
            "initial_params": self.initial.to_dict(),
            "records": self.rows,
            "incomplete": self.trace.incomplete,
            "converged": self.trace.converged,
            "metadata": self.trace.metadata,
        }


def run_experiment(family: AdiabaticFamily, acfg: AnsatzConfig, ocfg: ObjectiveConfig,
                   init: str = "perturbed_truth", sigma: float = 0.1, optimizer: str = "powell",
                   budget: int = 5000, seed: int = 0, interval: int = DEFAULT_INTERVAL,
                   rate: float = 1e-2, fd_delta: float = 1e-4,
                   series: Optional[RealFourierSeries] = None) -> ExperimentResult:
    """Minimize the free energy from a seeded start and score every trace record
    against the exact Gibbs state (ΔF and trace distance)."""
    if family.n > 6:
        raise ValidationError("full-trace metrics need n <= 6")
    rng = np.random.default_rng(seed)
    x0_params = initial_parameters(family, acfg, ocfg.beta, init, sigma, rng)
    objective = FreeEnergyObjective(family, acfg, ocfg, series)
    x0 = x0_params.as_vector()
    if optimizer == "powell":
        trace = powell_minimize(objective, x0, max_evals=budget, interval=interval)
    elif optimizer == "gradient":
        iters = max(1, budget // (x0.shape[0] + 1))
        trace = gradient_descent(objective, x0, rate, iters=iters, delta=fd_delta, max_evals=budget)
    else:
        raise ValidationError(f"unknown optimizer {optimizer!r}")

    H = family.hamiltonian()
    rho_g = gibbs_state(H, ocfg.beta)
    F_g = gibbs_free_energy(H, ocfg.beta)
    rows = []
    for rec in trace.records:
        p = objective.params(rec.best_x)
        rows.append({
            "evals": rec.evals,
            "best_F": rec.best_F,
            "delta_F": rec.best_F - F_g,
            "trace_distance": trace_distance(objective.state(rec.best_x), rho_g),
            "best_params": p.to_dict(),
        })
    trace.final_state = objective.state(trace.best_x)
    settings = {
        "n": acfg.n, "r": acfg.r, "T": acfg.T, "segment_substeps": acfg.segment_substeps,
        "objective": asdict(ocfg), "init": init, "sigma": sigma, "optimizer": optimizer,
        "budget": budget, "seed": seed, "interval": interval,
    }
    return ExperimentResult(trace, rows, F_g, x0_params, settings)


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get(WORKERS_ENV)
    n = requested or (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _run_job(kwargs):
    return run_experiment(**kwargs)


def run_many(jobs: Sequence[dict], workers: Optional[int] = None) -> list:
    """Run several ``run_experiment`` keyword sets; parallelism capped by ``GIBBSVAR_WORKERS``.

    Results come back in job order and do not depend on the worker count.
    """
    n = min(worker_count(workers), len(jobs))
    if n <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_job, jobs))
