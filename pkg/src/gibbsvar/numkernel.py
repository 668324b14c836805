"""Dense complex linear algebra for small quantum systems (dim <= 2^8)."""
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, ValidationError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-10
NORM_TOL = 1e-10


class HermitianEig(NamedTuple):
    values: np.ndarray   # ascending
    vectors: np.ndarray  # columns are eigenvectors


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def hermitian_part(m, tol=HERMITIAN_TOL) -> np.ndarray:
    """Return (m + m^dagger)/2 after checking m is Hermitian within `tol`."""
    a = as_matrix(m)
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > tol:
        raise ValidationError(f"matrix is not Hermitian: max |m - m^dagger| = {asym:.3e}")
    return 0.5 * (a + a.conj().T)


def hermitian_eig(m) -> HermitianEig:
    w, v = np.linalg.eigh(hermitian_part(m))
    return HermitianEig(w, v)


def matrix_function(m, f: Callable) -> np.ndarray:
    """Apply the scalar function `f` to Hermitian `m` through its spectrum.

    `f` is called with the array of eigenvalues. A non-finite result at any
    eigenvalue raises :class:`DomainError` naming that eigenvalue.
    """
    w, v = hermitian_eig(m)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=np.complex128)
    if fw.shape != w.shape:
        fw = np.broadcast_to(fw, w.shape)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        lam = w[np.argmax(bad)]
        raise DomainError(f"function undefined at eigenvalue {lam!r}")
    return (v * fw) @ v.conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator.

    Construct through :meth:`from_matrix` to get validation and the
    small-negative-eigenvalue cleanup; the raw constructor trusts its input.
    """

    mat: np.ndarray

    @classmethod
    def from_matrix(cls, m) -> "DensityMatrix":
        h = hermitian_part(m)
        tr = np.trace(h).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {tr!r}, expected 1")
        w, v = np.linalg.eigh(h)
        if w[0] < -NEGATIVE_EIG_TOL:
            raise ValidationError(f"negative eigenvalue {w[0]!r}")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            w = w / w.sum()
            h = (v * w) @ v.conj().T
        h.setflags(write=False)
        return cls(h)

    @classmethod
    def from_spectrum(cls, probs, basis=None) -> "DensityMatrix":
        p = np.asarray(probs, dtype=np.float64)
        if basis is None:
            m = np.diag(p).astype(np.complex128)
        else:
            m = (basis * p) @ basis.conj().T
        return cls.from_matrix(m)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls.from_matrix(np.eye(dim) / dim)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, ascending, clipped at 0."""
        return np.clip(np.linalg.eigvalsh(self.mat), 0.0, None)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.mat, self.mat)))


@dataclass(frozen=True)
class PureStateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm is {norm!r}, expected 1")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureStateVector":
        a = np.zeros(dim, dtype=np.complex128)
        a[index] = 1.0
        return cls(a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix.from_matrix(np.outer(self.amplitudes, self.amplitudes.conj()))


def partial_trace(state, dimA: int, dimB: int, keep: str = "A") -> DensityMatrix:
    """Reduced state of a bipartite `state` on A (x) B.

    Accepts a :class:`DensityMatrix`, a :class:`PureStateVector`, or a raw
    array (vector or matrix). For pure states the reduction is done on the
    amplitude matrix directly, without forming the full projector.
    """
    if keep not in ("A", "B"):
        raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")
    if isinstance(state, PureStateVector):
        state = state.amplitudes
    elif isinstance(state, DensityMatrix):
        state = state.mat
    a = np.asarray(state, dtype=np.complex128)
    dim = dimA * dimB
    if a.ndim == 1:
        if a.shape[0] != dim:
            raise ValidationError(f"state dim {a.shape[0]} != {dimA}*{dimB}")
        psi = a.reshape(dimA, dimB)
        red = psi @ psi.conj().T if keep == "A" else psi.T @ psi.conj()
    else:
        if a.shape != (dim, dim):
            raise ValidationError(f"state shape {a.shape} != ({dim}, {dim})")
        t = a.reshape(dimA, dimB, dimA, dimB)
        red = np.einsum("ijkj->ik", t) if keep == "A" else np.einsum("ijil->jl", t)
    return DensityMatrix.from_matrix(red)


def _pair(a, b):
    ma = a.mat if isinstance(a, DensityMatrix) else as_matrix(a)
    mb = b.mat if isinstance(b, DensityMatrix) else as_matrix(b)
    if ma.shape != mb.shape:
        raise ValidationError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return ma, mb


def trace_distance(a, b) -> float:
    ma, mb = _pair(a, b)
    w = np.linalg.eigvalsh(hermitian_part(ma - mb))
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def fidelity(a, b) -> float:
    """Uhlmann fidelity (squared convention)."""
    ma, mb = _pair(a, b)
    w, v = np.linalg.eigh(hermitian_part(ma))
    sa = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = np.linalg.eigvalsh(hermitian_part(sa @ mb @ sa))
    return float(np.sum(np.sqrt(np.clip(inner, 0, None))) ** 2)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density_matrix(dim: int, rng: np.random.Generator, p_floor: float = 0.0) -> DensityMatrix:
    """Random state with every eigenvalue >= `p_floor`.

    The spectrum is ``p_floor + (1 - dim*p_floor) * Dirichlet(1,...,1)``,
    conjugated by a Haar unitary.
    """
    if p_floor * dim > 1.0 + 1e-15:
        raise ValidationError(f"p_floor={p_floor} infeasible for dim={dim}")
    spec = p_floor + (1.0 - dim * p_floor) * rng.dirichlet(np.ones(dim))
    return DensityMatrix.from_spectrum(spec, random_unitary(dim, rng))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (z + z.conj().T)
