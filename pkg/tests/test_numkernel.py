import numpy as np
import pytest
from hypothesis import given, strategies as st

from gibbsvar.errors import DomainError, ValidationError
from gibbsvar.numkernel import (DensityMatrix, PureStateVector, fidelity, hermitian_eig, kron,
                                matrix_function, partial_trace, random_density_matrix,
                                random_hermitian, random_unitary, trace_distance)

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.sampled_from([1, 2, 3, 4, 8])


def spectral_norm(m):
    return np.linalg.norm(m, 2)


def test_eig_pauli_z():
    assert np.allclose(hermitian_eig(Z).values, [-1, 1])


def test_eig_identity():
    assert np.allclose(hermitian_eig(I2).values, [1, 1])


def test_eig_reconstruction_8x8(rng):
    m = random_hermitian(8, rng)
    w, v = hermitian_eig(m)
    assert spectral_norm((v * w) @ v.conj().T - m) <= 1e-10
    assert spectral_norm(v.conj().T @ v - np.eye(8)) <= 1e-10
    assert np.all(np.diff(w) >= 0)


def test_eig_rejects_non_hermitian():
    m = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(ValidationError, match="not Hermitian"):
        hermitian_eig(m)


def test_eig_symmetrizes_roundoff():
    m = Z + 1e-13 * np.array([[0, 1], [0, 0]])
    assert np.allclose(hermitian_eig(m).values, [-1, 1])


def test_matrix_function_exp_zero():
    assert np.allclose(matrix_function(np.zeros((3, 3)), np.exp), np.eye(3))


def test_matrix_function_phase_on_z():
    t = np.pi / 2
    u = matrix_function(Z, lambda w: np.exp(-1j * w * t))
    assert np.allclose(u, np.diag([-1j, 1j]))


def test_matrix_function_cos_matches_power_series(rng):
    m = random_hermitian(4, rng)
    m = m / spectral_norm(m)  # keep the 30-term series well converged
    ref = np.zeros_like(m)
    term = np.eye(4, dtype=complex)
    for k in range(30):
        if k % 2 == 0:
            ref += (-1) ** (k // 2) * term
        term = term @ m / (k + 1)
    assert np.allclose(matrix_function(m, np.cos), ref, atol=1e-8)


def test_matrix_function_domain_error():
    with np.errstate(divide="ignore"), pytest.raises(DomainError, match="eigenvalue"):
        matrix_function(np.diag([0.0, 1.0]), np.log)


@given(seeds, dims)
def test_identity_function_roundtrip(seed, d):
    m = random_hermitian(d, np.random.default_rng(seed))
    assert np.allclose(matrix_function(m, lambda w: w), m, atol=1e-12, rtol=0)


@given(seeds, dims)
def test_exp_times_exp_minus_is_identity(seed, d):
    m = random_hermitian(d, np.random.default_rng(seed))
    m = m / max(1.0, spectral_norm(m))
    prod = matrix_function(m, np.exp) @ matrix_function(m, lambda w: np.exp(-w))
    assert spectral_norm(prod - np.eye(d)) <= 1e-10


@given(seeds, dims)
def test_reconstruction_property(seed, d):
    m = random_hermitian(d, np.random.default_rng(seed))
    w, v = hermitian_eig(m)
    assert spectral_norm((v * w) @ v.conj().T - m) <= 1e-10 * max(1.0, spectral_norm(m))


def test_kron_examples():
    assert np.allclose(kron(I2, I2), np.eye(4))
    assert np.allclose(kron(Z, Z), np.diag([1, -1, -1, 1]))
    ket00 = np.array([1, 0, 0, 0], dtype=complex)
    assert np.allclose(kron(X, Z) @ ket00, [0, 0, 1, 0])


def test_density_matrix_validation():
    with pytest.raises(ValidationError, match="trace"):
        DensityMatrix.from_matrix(np.eye(2))
    with pytest.raises(ValidationError, match="negative"):
        DensityMatrix.from_matrix(np.diag([1.1, -0.1]))
    rho = DensityMatrix.from_matrix(np.diag([1.0 + 5e-11, -5e-11]))
    assert rho.spectrum().min() >= 0
    assert abs(np.trace(rho.mat).real - 1) < 1e-12


def test_density_matrix_is_read_only():
    rho = DensityMatrix.maximally_mixed(2)
    with pytest.raises(ValueError):
        rho.mat[0, 0] = 1.0


def test_pure_state_norm_checked():
    with pytest.raises(ValidationError):
        PureStateVector(np.array([1.0, 1.0]))


def test_partial_trace_product_state(rng):
    a = random_density_matrix(2, rng)
    b = random_density_matrix(4, rng)
    red = partial_trace(kron(a.mat, b.mat), 2, 4, keep="A")
    assert np.allclose(red.mat, a.mat, atol=1e-12)
    red = partial_trace(kron(a.mat, b.mat), 2, 4, keep="B")
    assert np.allclose(red.mat, b.mat, atol=1e-12)


def test_partial_trace_bell_state():
    bell = PureStateVector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(partial_trace(bell, 2, 2).mat, I2 / 2)
    assert np.allclose(partial_trace(bell.density_matrix(), 2, 2).mat, I2 / 2)


def test_partial_trace_purification():
    psi = np.zeros(4)
    psi[0], psi[3] = np.sqrt(0.7), np.sqrt(0.3)
    assert np.allclose(partial_trace(psi, 2, 2).mat, np.diag([0.7, 0.3]))


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValidationError):
        partial_trace(np.ones(6) / np.sqrt(6), 2, 2)


@given(seeds, st.sampled_from([(2, 2), (2, 3), (4, 2), (3, 3)]))
def test_partial_trace_of_kron_property(seed, dims_ab):
    g = np.random.default_rng(seed)
    a, b = random_density_matrix(dims_ab[0], g), random_density_matrix(dims_ab[1], g)
    red = partial_trace(kron(a.mat, b.mat), *dims_ab, keep="A")
    assert np.max(np.abs(red.mat - a.mat)) <= 1e-12


def test_trace_distance_examples():
    zero = DensityMatrix.from_spectrum([1, 0])
    one = DensityMatrix.from_spectrum([0, 1])
    mixed = DensityMatrix.maximally_mixed(2)
    assert trace_distance(zero, zero) == pytest.approx(0, abs=1e-15)
    assert trace_distance(zero, one) == pytest.approx(1)
    assert trace_distance(zero, mixed) == pytest.approx(0.5)


def test_trace_distance_dimension_mismatch():
    with pytest.raises(ValidationError):
        trace_distance(DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(4))


@given(seeds, st.sampled_from([2, 4, 8]))
def test_trace_distance_metric_properties(seed, d):
    g = np.random.default_rng(seed)
    a, b, c = (random_density_matrix(d, g) for _ in range(3))
    ab, bc, ac = trace_distance(a, b), trace_distance(b, c), trace_distance(a, c)
    assert ab == pytest.approx(trace_distance(b, a), abs=1e-12)
    assert 0 <= ab <= 1
    assert ac <= ab + bc + 1e-10


@given(seeds)
def test_fuchs_van_de_graaf(seed):
    g = np.random.default_rng(seed)
    a, b = random_density_matrix(4, g), random_density_matrix(4, g)
    F, D = fidelity(a, b), trace_distance(a, b)
    assert 1 - np.sqrt(F) <= D + 1e-9
    assert D <= np.sqrt(1 - F) + 1e-9


def test_random_unitary_is_unitary(rng):
    u = random_unitary(8, rng)
    assert spectral_norm(u.conj().T @ u - np.eye(8)) < 1e-12


def test_random_density_matrix_floor(rng):
    rho = random_density_matrix(8, rng, 0.05)
    assert rho.spectrum().min() >= 0.05 - 1e-12
    with pytest.raises(ValidationError):
        random_density_matrix(8, rng, 0.2)
