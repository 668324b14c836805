"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 5]

Both variants are called on identical inputs; the first numba call (JIT
compile or cache load) is excluded from the timings. Results are checked
for agreement before anything is reported.
"""
import argparse
import timeit

import numpy as np

from gibbsvar import kernels
from gibbsvar._accel import USE_NUMBA
from gibbsvar.fourierlog import build_log_series
from gibbsvar.hamiltonians import random_instance


def cases():
    series, _ = build_log_series(0.05, 1e-3)
    grid = np.linspace(0.05, 1.0, 10_000)
    spectrum = np.random.default_rng(0).dirichlet(np.ones(64))
    gamma = np.random.default_rng(1).random(200)
    h0, h1 = random_instance(4, 0).matrices
    thetas = np.concatenate([[0.0], np.linspace(0.1, 0.9, 5), [1.0]])
    return {
        "series_eval (10k grid, M=%d)" % series.M:
            ("series_eval", (grid, series.constant, series.b1, series.b2, series.t)),
        "trig_moments (D=64)": ("trig_moments", (spectrum, series.t)),
        "binomial_fourier (J=199, M=400)": ("binomial_fourier", (gamma, 400)),
        "path_unitary (4 qubits, r=5)": ("path_unitary", (h0, h1, thetas, 5.0, 1)),
    }


def _close(a, b):
    if isinstance(a, tuple):
        return all(_close(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-9, atol=1e-10)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not USE_NUMBA:
        print("numba disabled (GIBBSVAR_NUMBA=0 or not installed): the *_nb kernels run as plain Python")
    print(f"{'kernel':36s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for label, (name, argv) in cases().items():
        f_np = getattr(kernels, name + "_np")
        f_nb = getattr(kernels, name + "_nb")
        if not _close(f_np(*argv), f_nb(*argv)):
            raise SystemExit(f"{name}: backends disagree")
        n = 3
        t_np = min(timeit.repeat(lambda: f_np(*argv), number=n, repeat=args.repeat)) / n
        t_nb = min(timeit.repeat(lambda: f_nb(*argv), number=n, repeat=args.repeat)) / n
        print(f"{label:36s} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
