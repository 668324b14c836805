"""Pauli-sum Hamiltonians, LCU decompositions and the Gibbs-state oracle."""
import functools
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .errors import ResourceError, ValidationError
from .numkernel import DensityMatrix

MAX_QUBITS = 8

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        s = str(self.letters).upper()
        if not s or any(ch not in PAULI for ch in s):
            raise ValidationError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", s)

    @property
    def n(self) -> int:
        return len(self.letters)

    @classmethod
    def single(cls, n: int, site: int, letter: str) -> "PauliString":
        return cls.from_sites(n, {site: letter})

    @classmethod
    def from_sites(cls, n: int, sites: dict) -> "PauliString":
        chars = ["I"] * n
        for q, ch in sites.items():
            chars[q] = ch
        return cls("".join(chars))

    def matrix(self) -> np.ndarray:
        if self.n > MAX_QUBITS:
            raise ResourceError(f"{self.n} qubits exceeds dense limit {MAX_QUBITS}")
        return functools.reduce(np.kron, (PAULI[ch] for ch in self.letters))


class PauliSum:
    """Real linear combination of Pauli strings on ``n`` qubits.

    Duplicate strings are merged and exact zeros dropped on construction.
    Qubit 0 is the leftmost tensor factor.
    """

    def __init__(self, n: int, terms: Iterable[Tuple[float, "PauliString | str"]] = ()):
        if n < 1:
            raise ValidationError(f"n must be >= 1, got {n}")
        merged = {}
        for coeff, s in terms:
            ps = s if isinstance(s, PauliString) else PauliString(s)
            if ps.n != n:
                raise ValidationError(f"string {ps.letters} has {ps.n} qubits, expected {n}")
            c = float(coeff)
            if not math.isfinite(c):
                raise ValidationError(f"non-finite coefficient for {ps.letters}")
            merged[ps.letters] = merged.get(ps.letters, 0.0) + c
        self.n = n
        self.terms: List[Tuple[float, PauliString]] = [
            (c, PauliString(s)) for s, c in merged.items() if c != 0.0
        ]

    def __repr__(self):
        body = " + ".join(f"{c:+.4g}*{s.letters}" for c, s in self.terms) or "0"
        return f"PauliSum(n={self.n}, {body})"

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n == other.n and self._as_dict() == other._as_dict()

    def _as_dict(self):
        return {s.letters: c for c, s in self.terms}

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n != self.n:
            raise ValidationError("qubit counts differ")
        return PauliSum(self.n, list(self.terms) + list(other.terms))

    def scaled(self, s: float) -> "PauliSum":
        return PauliSum(self.n, [(s * c, p) for c, p in self.terms])

    def allclose(self, other: "PauliSum", atol=1e-12) -> bool:
        a, b = self._as_dict(), other._as_dict()
        keys = set(a) | set(b)
        return self.n == other.n and all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= atol for k in keys)

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [{"coeff": c, "letters": s.letters} for c, s in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "PauliSum":
        try:
            return cls(int(d["n"]), [(t["coeff"], t["letters"]) for t in d["terms"]])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed PauliSum document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        return cls.from_dict(json.loads(text))


def to_matrix(h: PauliSum) -> np.ndarray:
    if h.n > MAX_QUBITS:
        raise ResourceError(f"{h.n} qubits exceeds dense limit {MAX_QUBITS}")
    dim = 2 ** h.n
    out = np.zeros((dim, dim), dtype=np.complex128)
    for c, s in h.terms:
        out += c * s.matrix()
    return out


@dataclass(frozen=True)
class LCUDecomposition:
    alphas: np.ndarray
    unitaries: Tuple[np.ndarray, ...]

    @property
    def alpha_norm(self) -> float:
        return float(np.sum(self.alphas))

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]

    def matrix(self) -> np.ndarray:
        return sum(a * V for a, V in zip(self.alphas, self.unitaries))

    def extended(self, ancilla_dim: int) -> "LCUDecomposition":
        """Same decomposition acting as ``V_k (x) I`` on system (x) ancilla."""
        eye = np.eye(ancilla_dim, dtype=np.complex128)
        return LCUDecomposition(self.alphas.copy(), tuple(np.kron(V, eye) for V in self.unitaries))


def lcu_decompose(h: PauliSum) -> LCUDecomposition:
    """``H = sum_k alpha_k V_k`` with ``alpha_k = |coeff_k|`` and the sign folded into ``V_k``."""
    if not h.terms:
        raise ValidationError("cannot decompose the zero Hamiltonian (||alpha||_1 = 0)")
    alphas = np.array([abs(c) for c, _ in h.terms])
    unitaries = tuple(math.copysign(1.0, c) * s.matrix() for c, s in h.terms)
    return LCUDecomposition(alphas, unitaries)


@dataclass(frozen=True)
class AdiabaticFamily:
    """``H'(s) = H0 + s H1``."""

    h0: PauliSum
    h1: PauliSum

    def __post_init__(self):
        if self.h0.n != self.h1.n:
            raise ValidationError(f"H0 has {self.h0.n} qubits but H1 has {self.h1.n}")

    @property
    def n(self) -> int:
        return self.h0.n

    @functools.cached_property
    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        return to_matrix(self.h0), to_matrix(self.h1)

    def hamiltonian(self) -> PauliSum:
        return interpolate(self, 1.0)

    def to_dict(self) -> dict:
        return {"h0": self.h0.to_dict(), "h1": self.h1.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "AdiabaticFamily":
        try:
            return cls(PauliSum.from_dict(d["h0"]), PauliSum.from_dict(d["h1"]))
        except KeyError as exc:
            raise ValidationError(f"family document missing {exc}") from exc


def interpolate(f: AdiabaticFamily, s: float) -> PauliSum:
    return PauliSum(f.n, list(f.h0.terms) + [(s * c, p) for c, p in f.h1.terms])


def zz_pairs(n: int, topology: str = "all") -> List[Tuple[int, int]]:
    if topology == "all":
        return list(itertools.combinations(range(n), 2))
    if topology == "chain":
        return [(j, j + 1) for j in range(n - 1)]
    raise ValidationError(f"unknown topology {topology!r}")


def random_instance(n: int, seed: int, topology: str = "all") -> AdiabaticFamily:
    """Random ``H0 = sum a_j Z_j``, ``H1 = sum b_j X_j + sum c_jk Z_j Z_k``.

    All coefficients are i.i.d. uniform on [-1, 1], drawn in the order
    a, b, c from ``numpy.random.default_rng(seed)``.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, n)
    b = rng.uniform(-1.0, 1.0, n)
    pairs = zz_pairs(n, topology)
    c = rng.uniform(-1.0, 1.0, len(pairs))
    h0 = PauliSum(n, [(a[j], PauliString.single(n, j, "Z")) for j in range(n)])
    h1_terms = [(b[j], PauliString.single(n, j, "X")) for j in range(n)]
    h1_terms += [(c[i], PauliString.from_sites(n, {j: "Z", k: "Z"})) for i, (j, k) in enumerate(pairs)]
    return AdiabaticFamily(h0, PauliSum(n, h1_terms))


def _as_dense(h) -> np.ndarray:
    return to_matrix(h) if isinstance(h, PauliSum) else np.asarray(h, dtype=np.complex128)


def gibbs_probabilities(h, beta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues (ascending), eigenvectors and Boltzmann weights of ``h``."""
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    w, v = np.linalg.eigh(_as_dense(h))
    x = np.exp(-beta * (w - w[0]))
    return w, v, x / x.sum()


def gibbs_state(h, beta: float) -> DensityMatrix:
    """``exp(-beta H) / Tr exp(-beta H)``."""
    _, v, p = gibbs_probabilities(h, beta)
    return DensityMatrix.from_spectrum(p, v)


def gibbs_free_energy(h, beta: float) -> float:
    """``-ln(Z) / beta``, evaluated with the ground energy factored out."""
    if beta <= 0:
        raise ValidationError(f"beta must be > 0, got {beta}")
    w = np.linalg.eigvalsh(_as_dense(h))
    return float(w[0] - math.log(np.sum(np.exp(-beta * (w - w[0])))) / beta)


def random_pauli_sum(n: int, rng: np.random.Generator, n_terms: int = 8) -> PauliSum:
    """Random real combination of random Pauli strings (test/benchmark helper)."""
    letters = rng.choice(list("IXYZ"), size=(n_terms, n))
    coeffs = rng.uniform(-1.0, 1.0, n_terms)
    terms = [(c, "".join(row)) for c, row in zip(coeffs, letters)]
    h = PauliSum(n, terms)
    if not h.terms:
        h = PauliSum(n, [(1.0, "Z" * n)])
    return h
