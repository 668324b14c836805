"""Trotterized adiabatic ansatz acting on a purification.

The state is

    prod_{k=0..r} exp(-i H'(mid_k) (theta_{k+1} - theta_k) T)  sum_j sqrt(p_j) |j>|j>

with theta_0 = 0, theta_{r+1} = 1, interior theta_k = tanh(phi_k), and the
evolution acting on the first (system) register only.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .errors import InfeasibleParametersError, ValidationError
from .hamiltonians import AdiabaticFamily
from .numkernel import DensityMatrix, PureStateVector, partial_trace

FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class AnsatzConfig:
    n: int
    r: int
    T: float
    segment_substeps: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.r < 0:
            raise ValidationError(f"r must be >= 0, got {self.r}")
        if not self.T >= 0:
            raise ValidationError(f"T must be >= 0, got {self.T}")
        if self.segment_substeps < 1:
            raise ValidationError("segment_substeps must be >= 1")

    @property
    def D(self) -> int:
        return 2 ** self.n

    @property
    def n_params(self) -> int:
        return self.r + self.D - 1


@dataclass(frozen=True)
class AnsatzParameters:
    """Path variables ``phi`` (length r) and free probabilities ``probs`` (length D-1)."""

    phi: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=np.float64).reshape(-1))

    @property
    def full_probs(self) -> np.ndarray:
        """``(p_1, ..., p_{D-1}, p_D)`` with ``p_D = 1 - sum p_j``."""
        return np.append(self.probs, 1.0 - np.sum(self.probs))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.phi, self.probs])

    @classmethod
    def from_vector(cls, x, r: int) -> "AnsatzParameters":
        x = np.asarray(x, dtype=np.float64)
        return cls(x[:r].copy(), x[r:].copy())

    def to_dict(self) -> dict:
        return {"phi": [float(v) for v in self.phi], "probs": [float(v) for v in self.probs]}

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzParameters":
        return cls(d["phi"], d["probs"])


def thetas_from_phis(params) -> np.ndarray:
    phi = params.phi if isinstance(params, AnsatzParameters) else np.asarray(params, dtype=np.float64)
    return np.concatenate([[0.0], np.tanh(phi), [1.0]])


def linear_path_phis(r: int) -> np.ndarray:
    """``phi_k`` with ``tanh(phi_k) = k / (r + 1)``."""
    return np.arctanh(np.arange(1, r + 1) / (r + 1.0))


def feasibility_projection(params: AnsatzParameters) -> Tuple[AnsatzParameters, float]:
    """Clamp each ``p_j`` to [0, 1], then scale down if ``sum p_j > 1``.

    Returns the projected parameters and the squared l2 distance moved.
    """
    p = params.probs
    q = np.clip(p, 0.0, 1.0)
    total = q.sum()
    if total > 1.0:
        q = q / total
    violation = float(np.sum((q - p) ** 2))
    return AnsatzParameters(params.phi.copy(), q), violation


def _checked_probs(params: AnsatzParameters, D: int) -> np.ndarray:
    if params.probs.shape[0] != D - 1:
        raise ValidationError(f"expected {D - 1} probabilities, got {params.probs.shape[0]}")
    full = params.full_probs
    if np.any(full < -FEASIBILITY_TOL):
        raise InfeasibleParametersError(f"negative probability in {full.tolist()}")
    return np.clip(full, 0.0, None)


def initial_purification(params: AnsatzParameters, D: int) -> PureStateVector:
    """``sum_j sqrt(p_j) |j>|j>`` on a D*D dimensional space."""
    full = _checked_probs(params, D)
    amp = np.zeros(D * D, dtype=np.complex128)
    amp[np.arange(D) * (D + 1)] = np.sqrt(full)
    return PureStateVector(amp / np.linalg.norm(amp))


def path_unitary(params: AnsatzParameters, family: AdiabaticFamily, config: AnsatzConfig) -> np.ndarray:
    if family.n != config.n:
        raise ValidationError(f"family has {family.n} qubits, config says {config.n}")
    if params.phi.shape[0] != config.r:
        raise ValidationError(f"expected {config.r} path variables, got {params.phi.shape[0]}")
    h0, h1 = family.matrices
    return kernels.path_unitary(h0, h1, thetas_from_phis(params), float(config.T),
                                int(config.segment_substeps))


def evolve(params: AnsatzParameters, family: AdiabaticFamily, config: AnsatzConfig,
           unitary: Optional[np.ndarray] = None) -> PureStateVector:
    """Apply the segment product to the system register of the purification."""
    D = config.D
    psi0 = initial_purification(params, D).amplitudes.reshape(D, D)
    U = path_unitary(params, family, config) if unitary is None else unitary
    return PureStateVector((U @ psi0).reshape(-1))


def reduced_state(psi, D: int) -> DensityMatrix:
    """Trace out the ancilla (second) register."""
    amp = psi.amplitudes if isinstance(psi, PureStateVector) else np.asarray(psi)
    if amp.shape[0] != D * D:
        raise ValidationError(f"state dim {amp.shape[0]} is not D^2 = {D * D}")
    return partial_trace(amp, D, D, keep="A")


def ansatz_state(params: AnsatzParameters, family: AdiabaticFamily, config: AnsatzConfig) -> DensityMatrix:
    return reduced_state(evolve(params, family, config), config.D)
