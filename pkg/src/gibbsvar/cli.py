"""Command-line entry point.

Exit codes: 0 success, 1 validation/config error, 2 certificate failure,
3 anything else.
"""
import argparse
import json
import os
import sys
import tempfile
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from .ansatz import AnsatzConfig
from .circuits import energy_estimation_cost, entropy_estimation_cost
from .errors import CertificateError, ConfigurationError, GibbsVarError, SpectrumWarning, ValidationError
from .fourierlog import build_log_series, load_series, series_document
from .hamiltonians import AdiabaticFamily, random_instance
from .numkernel import DensityMatrix, random_density_matrix
from .variational import ObjectiveConfig, entropy_fourier, run_experiment, von_neumann_entropy

EXIT_OK, EXIT_VALIDATION, EXIT_CERTIFICATE, EXIT_INTERNAL = 0, 1, 2, 3

CONFIG_DEFAULTS = {
    "topology": "all",
    "segment_substeps": 1,
    "p_min": 0.05,
    "series_eps": 1e-2,
    "entropy_mode": "exact",
    "shots_per_term": 1000,
    "penalty_weight": 100.0,
    "optimizer": "powell",
    "budget": 5000,
    "init": "perturbed_truth",
    "sigma": 0.1,
    "interval": 50,
    "rate": 1e-2,
    "fd_delta": 1e-4,
}


def atomic_write(path, text: str):
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fresh_seed() -> int:
    seed = int(np.random.SeedSequence().entropy % (2 ** 32))
    print(f"generated seed: {seed}", file=sys.stderr)
    return seed


def config_schema() -> dict:
    text = resources.files("gibbsvar").joinpath("schemas/experiment_config.schema.json").read_text()
    return json.loads(text)


def load_config(path) -> dict:
    """Read and schema-validate an experiment config; defaults filled in afterwards."""
    import jsonschema

    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, config_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config {path}: {where}: {exc.message}") from exc
    return {**CONFIG_DEFAULTS, **raw}


def _resolve(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


def _load_state(path) -> DensityMatrix:
    path = Path(path)
    if path.suffix == ".npy":
        m = np.load(path)
    else:
        with open(path) as fh:
            doc = json.load(fh)
        if "real" not in doc:
            raise ValidationError("state JSON needs a 'real' matrix (and optional 'imag')")
        m = np.asarray(doc["real"], dtype=np.float64) + 1j * np.asarray(doc.get("imag", 0.0))
    return DensityMatrix.from_matrix(m)


def cmd_series(args) -> int:
    try:
        series, cert = build_log_series(args.p_min, args.eps)
        code = EXIT_OK
    except CertificateError as exc:
        series, cert = exc.series, exc.certificate
        code = EXIT_CERTIFICATE
    atomic_write(args.out, _dumps(series_document(series, cert)))
    print(_dumps({"out": str(args.out), "M": series.M, "max_error": cert.max_error,
                  "passed": cert.passed}), end="")
    return code


def cmd_estimate_entropy(args) -> int:
    seed = _fresh_seed() if args.seed is None else args.seed
    series = load_series(args.series)
    if args.state:
        rho = _load_state(args.state)
    else:
        floor = args.p_floor if args.p_floor is not None else (series.p_min or 0.0)
        rho = random_density_matrix(2 ** args.random, np.random.default_rng(seed), floor)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SpectrumWarning)
        exact = von_neumann_entropy(rho)
        if args.mode == "exact":
            est = exact
        else:
            est = entropy_fourier(rho, series, args.mode, args.shots, seed)
    spectrum_warnings = [str(w.message) for w in caught if issubclass(w.category, SpectrumWarning)]
    out = {
        "mode": args.mode,
        "seed": seed,
        "exact_entropy": exact,
        "estimated_entropy": est,
        "abs_error": abs(est - exact),
        "warning": spectrum_warnings[0] if spectrum_warnings else None,
    }
    if series.p_min is not None and series.eps is not None:
        out["cost"] = entropy_estimation_cost(series.p_min, series.eps).to_dict()
    print(_dumps(out), end="")
    return EXIT_OK


def cmd_resources(args) -> int:
    out = {
        "entropy": entropy_estimation_cost(args.p_min, args.eps).to_dict(),
        "energy": energy_estimation_cost(args.alpha_norm, args.eps).to_dict(),
    }
    print(_dumps(out), end="")
    return EXIT_OK


def cmd_prepare_gibbs(args) -> int:
    cfg_path = Path(args.config)
    cfg = load_config(cfg_path)
    base = cfg_path.parent
    if "seed" not in cfg:
        cfg["seed"] = _fresh_seed()
    if "hamiltonian_file" in cfg:
        with open(_resolve(base, cfg["hamiltonian_file"])) as fh:
            family = AdiabaticFamily.from_dict(json.load(fh))
        if family.n != cfg["n"]:
            raise ValidationError(f"hamiltonian file has {family.n} qubits, config says {cfg['n']}")
    else:
        family = random_instance(cfg["n"], cfg.get("instance_seed", cfg["seed"]), cfg["topology"])
    acfg = AnsatzConfig(cfg["n"], cfg["r"], float(cfg["T"]), cfg["segment_substeps"])
    ocfg = ObjectiveConfig(beta=float(cfg["beta"]), penalty_weight=float(cfg["penalty_weight"]),
                           entropy_mode=cfg["entropy_mode"], p_min=float(cfg["p_min"]),
                           series_eps=float(cfg["series_eps"]),
                           shots_per_term=cfg["shots_per_term"], base_seed=cfg["seed"])
    result = run_experiment(family, acfg, ocfg, init=cfg["init"], sigma=float(cfg["sigma"]),
                            optimizer=cfg["optimizer"], budget=cfg["budget"], seed=cfg["seed"],
                            interval=cfg["interval"], rate=float(cfg["rate"]),
                            fd_delta=float(cfg["fd_delta"]))
    prefix = _resolve(base, cfg["output_prefix"])
    doc = result.to_dict()
    doc["config"] = cfg
    doc["family"] = family.to_dict()
    summary = result.summary()
    atomic_write(f"{prefix}.csv", result.csv_text())
    atomic_write(f"{prefix}.json", _dumps(doc))
    atomic_write(f"{prefix}.summary.json", _dumps(summary))
    print(_dumps(summary), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbsvar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("series", help="build and certify the Fourier series of ln p")
    p.add_argument("--p-min", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("estimate-entropy", help="compare a Fourier entropy estimate with the exact value")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="density matrix as .npy or JSON {real, imag}")
    src.add_argument("--random", type=int, metavar="N_QUBITS", help="random state on N qubits")
    p.add_argument("--p-floor", type=float, default=None,
                   help="minimum eigenvalue of the random state (default: the series p_min)")
    p.add_argument("--series", required=True)
    p.add_argument("--mode", choices=("exact", "fourier_exact", "fourier_shots"), default="fourier_exact")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_estimate_entropy)

    p = sub.add_parser("resources", help="query-cost reports for the entropy and energy estimators")
    p.add_argument("--p-min", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha-norm", type=float, required=True)
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("prepare-gibbs", help="run a free-energy minimization from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_prepare_gibbs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.func(args)
    except CertificateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (ValidationError, ConfigurationError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GibbsVarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last resort
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
