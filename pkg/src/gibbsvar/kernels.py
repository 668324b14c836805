"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names (``series_eval``, ``trig_moments``, ``binomial_fourier``,
``path_unitary``) are bound to the numba versions unless ``GIBBSVAR_NUMBA=0``
is set or numba is missing. Both variants stay importable under ``*_nb`` and
``*_np`` so they can be cross-checked and benchmarked against each other.
"""
import math

import numpy as np
from scipy.special import gammaln

from ._accel import USE_NUMBA, njit

__all__ = [
    "series_eval",
    "trig_moments",
    "binomial_fourier",
    "path_unitary",
    "expm_hermitian",
]

_CHUNK = 2048


# ---------------------------------------------------------------------------
# real Fourier series  const + sum_m b1_m cos(t_m p) + b2_m sin(t_m p)
# ---------------------------------------------------------------------------

def series_eval_np(p, const, b1, b2, t):
    p = np.asarray(p, dtype=np.float64)
    out = np.empty(p.shape[0], dtype=np.float64)
    for start in range(0, p.shape[0], _CHUNK):
        chunk = p[start:start + _CHUNK]
        phase = np.outer(chunk, t)
        out[start:start + _CHUNK] = const + np.cos(phase) @ b1 + np.sin(phase) @ b2
    return out


@njit
def series_eval_nb(p, const, b1, b2, t):
    n = p.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = const
        x = p[i]
        for m in range(t.shape[0]):
            acc += b1[m] * math.cos(t[m] * x) + b2[m] * math.sin(t[m] * x)
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# spectral moments  C_m = sum_j p_j cos(p_j t_m),  S_m = sum_j p_j sin(p_j t_m)
# ---------------------------------------------------------------------------

def trig_moments_np(spectrum, t):
    phase = np.outer(t, spectrum)
    return np.cos(phase) @ spectrum, np.sin(phase) @ spectrum


@njit
def trig_moments_nb(spectrum, t):
    M = t.shape[0]
    C = np.zeros(M, dtype=np.float64)
    S = np.zeros(M, dtype=np.float64)
    for m in range(M):
        c = 0.0
        s = 0.0
        for j in range(spectrum.shape[0]):
            pj = spectrum[j]
            c += pj * math.cos(pj * t[m])
            s += pj * math.sin(pj * t[m])
        C[m] = c
        S[m] = s
    return C, S


# ---------------------------------------------------------------------------
# power series in y = sin(pi x / 2)  ->  Fourier coefficients of e^{i pi m x/2}
#
#   y^j = (2i)^{-j} sum_l C(j,l) (-1)^{j-l} e^{i pi (2l-j) x / 2}
#
# Frequencies with |2l - j| > M are dropped. Output index is m + M.
# ---------------------------------------------------------------------------

def _minus_i_power(j):
    r = j % 4
    if r == 0:
        return 1.0 + 0.0j
    if r == 1:
        return -1.0j
    if r == 2:
        return -1.0 + 0.0j
    return 1.0j


def binomial_fourier_np(gamma, M):
    out = np.zeros(2 * M + 1, dtype=np.complex128)
    for j in range(gamma.shape[0]):
        g = gamma[j]
        if g == 0.0:
            continue
        lo = max(0, -((M - j) // 2))  # ceil((j - M) / 2)
        hi = min(j, (j + M) // 2)
        if lo > hi:
            continue
        ls = np.arange(j + 1)
        logw = gammaln(j + 1.0) - gammaln(ls + 1.0) - gammaln(j - ls + 1.0)
        w = np.exp(logw - logw.max())
        w /= w.sum()
        ls = ls[lo:hi + 1]
        signs = np.where((j - ls) % 2 == 0, 1.0, -1.0)
        out[2 * ls - j + M] += (g * _minus_i_power(j)) * signs * w[lo:hi + 1]
    return out


@njit
def binomial_fourier_nb(gamma, M):
    out = np.zeros(2 * M + 1, dtype=np.complex128)
    J = gamma.shape[0] - 1
    logw = np.empty(J + 1, dtype=np.float64)
    for j in range(J + 1):
        g = gamma[j]
        if g == 0.0:
            continue
        lo = max(0, -((M - j) // 2))
        hi = min(j, (j + M) // 2)
        if lo > hi:
            continue
        lj = math.lgamma(j + 1.0)
        top = -np.inf
        for l in range(j + 1):
            v = lj - math.lgamma(l + 1.0) - math.lgamma(j - l + 1.0)
            logw[l] = v
            if v > top:
                top = v
        total = 0.0
        for l in range(j + 1):
            total += math.exp(logw[l] - top)
        r = j % 4
        if r == 0:
            phase = 1.0 + 0.0j
        elif r == 1:
            phase = -1.0j
        elif r == 2:
            phase = -1.0 + 0.0j
        else:
            phase = 1.0j
        for l in range(lo, hi + 1):
            w = math.exp(logw[l] - top) / total
            if (j - l) % 2 == 1:
                w = -w
            out[2 * l - j + M] += g * phase * w
    return out


# ---------------------------------------------------------------------------
# adiabatic path unitary
#   U = prod_{k=0..r} exp(-i H'(mid_k) (theta_{k+1} - theta_k) T),  H'(s) = h0 + s h1
# later segments multiply from the left
# ---------------------------------------------------------------------------

def expm_hermitian_np(h, tau):
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * tau * w)) @ v.conj().T


def path_unitary_np(h0, h1, thetas, T, substeps=1):
    D = h0.shape[0]
    U = np.eye(D, dtype=np.complex128)
    for k in range(thetas.shape[0] - 1):
        s = 0.5 * (thetas[k] + thetas[k + 1])
        tau = (thetas[k + 1] - thetas[k]) * T
        if substeps == 1:
            Uk = expm_hermitian_np(h0 + s * h1, tau)
        else:
            step = expm_hermitian_np(h0, tau / substeps) @ expm_hermitian_np(s * h1, tau / substeps)
            Uk = np.linalg.matrix_power(step, substeps)
        U = Uk @ U
    return U


@njit
def expm_hermitian_nb(h, tau):
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * tau * w)
    vd = np.ascontiguousarray(v.conj().T)
    return np.ascontiguousarray(v * phases) @ vd


@njit
def path_unitary_nb(h0, h1, thetas, T, substeps=1):
    D = h0.shape[0]
    U = np.eye(D, dtype=np.complex128)
    for k in range(thetas.shape[0] - 1):
        s = 0.5 * (thetas[k] + thetas[k + 1])
        tau = (thetas[k + 1] - thetas[k]) * T
        if substeps == 1:
            Uk = expm_hermitian_nb(h0 + s * h1, tau)
        else:
            step = expm_hermitian_nb(h0, tau / substeps) @ expm_hermitian_nb(s * h1, tau / substeps)
            Uk = np.eye(D, dtype=np.complex128)
            for _ in range(substeps):
                Uk = step @ Uk
        U = Uk @ U
    return U


if USE_NUMBA:
    series_eval = series_eval_nb
    trig_moments = trig_moments_nb
    binomial_fourier = binomial_fourier_nb
    path_unitary = path_unitary_nb
    expm_hermitian = expm_hermitian_nb
else:
    series_eval = series_eval_np
    trig_moments = trig_moments_np
    binomial_fourier = binomial_fourier_np
    path_unitary = path_unitary_np
    expm_hermitian = expm_hermitian_np
