import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gibbsvar import cli, fourierlog
from gibbsvar.hamiltonians import AdiabaticFamily, PauliSum, random_instance


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def series_file(tmp_path, capsys):
    path = tmp_path / "series.json"
    code, _, _ = run(capsys, "series", "--p-min", 0.1, "--eps", 1e-2, "--out", path)
    assert code == 0
    return path


def test_series_command(series_file, tmp_path, capsys):
    doc = json.loads(series_file.read_text())
    assert doc["passed"] is True and doc["certificate"]["max_error"] <= 1e-2
    again = tmp_path / "again.json"
    run(capsys, "series", "--p-min", 0.1, "--eps", 1e-2, "--out", again)
    assert again.read_bytes() == series_file.read_bytes()


def test_series_rejects_zero_p_min(tmp_path, capsys):
    code, _, err = run(capsys, "series", "--p-min", 0, "--eps", 1e-2, "--out", tmp_path / "x.json")
    assert code == cli.EXIT_VALIDATION and "p_min" in err
    assert not (tmp_path / "x.json").exists()


def test_series_certificate_failure_still_writes(tmp_path, capsys, monkeypatch):
    real_verify = fourierlog.verify_error
    monkeypatch.setattr(fourierlog, "verify_error",
                        lambda s, f, i, g, eps: real_verify(s, f, i, g, eps * 1e-6))
    fourierlog._build_cached.cache_clear()
    try:
        out = tmp_path / "bad.json"
        code, _, _ = run(capsys, "series", "--p-min", 0.3, "--eps", 1e-2, "--out", out)
    finally:
        fourierlog._build_cached.cache_clear()
    assert code == cli.EXIT_CERTIFICATE
    assert json.loads(out.read_text())["passed"] is False


def test_estimate_entropy_maximally_mixed_exact(series_file, tmp_path, capsys):
    state = tmp_path / "rho.json"
    state.write_text(json.dumps({"real": (np.eye(4) / 4).tolist()}))
    code, out, _ = run(capsys, "estimate-entropy", "--state", state, "--series", series_file,
                       "--mode", "exact", "--seed", 0)
    doc = json.loads(out)
    assert code == 0 and doc["exact_entropy"] == pytest.approx(2 * math.log(2))
    assert doc["estimated_entropy"] == pytest.approx(2 * math.log(2))


def test_estimate_entropy_fourier_exact(series_file, tmp_path, capsys):
    np.save(tmp_path / "rho.npy", np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex))
    code, out, _ = run(capsys, "estimate-entropy", "--state", tmp_path / "rho.npy",
                       "--series", series_file, "--seed", 0)
    doc = json.loads(out)
    assert code == 0 and doc["abs_error"] <= 1e-2 and doc["warning"] is None
    assert doc["cost"]["oracle_name"] == "U_rho"


def test_estimate_entropy_shots_reproducible(series_file, capsys):
    argv = ("estimate-entropy", "--random", 2, "--series", series_file, "--mode", "fourier_shots",
            "--shots", 2000, "--seed", 17)
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_estimate_entropy_warning_field(series_file, capsys):
    code, out, _ = run(capsys, "estimate-entropy", "--random", 2, "--p-floor", 0.0,
                       "--series", series_file, "--seed", 3)
    doc = json.loads(out)
    # a Dirichlet spectrum on 4 levels with no floor dips below 0.1 for this seed
    assert code == 0 and doc["warning"] and "p_min" in doc["warning"]


def test_estimate_entropy_generated_seed(series_file, capsys):
    code, out, err = run(capsys, "estimate-entropy", "--random", 1, "--series", series_file)
    assert code == 0 and "generated seed" in err
    assert isinstance(json.loads(out)["seed"], int)


def test_resources(capsys):
    code, out, _ = run(capsys, "resources", "--p-min", 0.1, "--eps", 0.01, "--alpha-norm", 2)
    doc = json.loads(out)
    assert code == 0 and doc["energy"]["query_count"] == 629
    t = doc["entropy"]["formula_terms"]
    q = math.ceil(t["b_l1"] / t["eps"] * (t["time_sum"] + t["precision_sum"] + t["norm_sum"]))
    assert doc["entropy"]["query_count"] == q
    code, _, _ = run(capsys, "resources", "--p-min", 0.1, "--eps", 0.01, "--alpha-norm", 0)
    assert code == cli.EXIT_VALIDATION


def write_config(tmp_path, **kw):
    cfg = {"n": 2, "beta": 1.0, "r": 2, "T": 3.0, "output_prefix": "out/run", "budget": 150}
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_prepare_gibbs_exact_start(tmp_path, capsys):
    f = random_instance(2, 0)
    (tmp_path / "ham.json").write_text(json.dumps(AdiabaticFamily(f.h0, PauliSum(2, [])).to_dict()))
    cfg = write_config(tmp_path, hamiltonian_file="ham.json", sigma=0.0, seed=1)
    code, out, _ = run(capsys, "prepare-gibbs", "--config", cfg)
    assert code == 0
    summary = json.loads((tmp_path / "out/run.summary.json").read_text())
    assert summary["final_delta_F"] <= 1e-9
    assert json.loads(out) == summary
    first = (tmp_path / "out/run.csv").read_text().splitlines()[1].split(",")
    assert first[0] == "1" and float(first[2]) <= 1e-9


def test_prepare_gibbs_rerun_identical(tmp_path, capsys):
    cfg = write_config(tmp_path, seed=4)
    run(capsys, "prepare-gibbs", "--config", cfg)
    first = (tmp_path / "out/run.csv").read_bytes()
    doc = json.loads((tmp_path / "out/run.json").read_text())
    assert doc["config"]["seed"] == 4 and "family" in doc
    run(capsys, "prepare-gibbs", "--config", cfg)
    assert (tmp_path / "out/run.csv").read_bytes() == first


def test_prepare_gibbs_embeds_generated_seed(tmp_path, capsys):
    cfg = write_config(tmp_path, budget=20)
    code, _, err = run(capsys, "prepare-gibbs", "--config", cfg)
    assert code == 0 and "generated seed" in err
    seed = json.loads((tmp_path / "out/run.json").read_text())["config"]["seed"]
    assert str(seed) in err


@pytest.mark.parametrize("bad", [{"bogus": 1}, {"beta": -1.0}, {"optimizer": "adam"},
                                 {"instance_seed": 1, "hamiltonian_file": "h.json"}])
def test_prepare_gibbs_schema_violation(tmp_path, capsys, bad):
    cfg = write_config(tmp_path, **bad)
    code, _, err = run(capsys, "prepare-gibbs", "--config", cfg)
    assert code == cli.EXIT_VALIDATION and "config" in err
    assert not (tmp_path / "out").exists()


def test_prepare_gibbs_missing_required(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n": 2}))
    assert run(capsys, "prepare-gibbs", "--config", path)[0] == cli.EXIT_VALIDATION
    path.write_text("{not json")
    assert run(capsys, "prepare-gibbs", "--config", path)[0] == cli.EXIT_VALIDATION


def test_internal_error_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "run_experiment", boom)
    code, _, err = run(capsys, "prepare-gibbs", "--config", write_config(tmp_path, seed=1))
    assert code == cli.EXIT_INTERNAL and "boom" in err


def test_bad_flags_exit_validation(capsys):
    assert cli.main(["series", "--p-min", "x"]) == cli.EXIT_VALIDATION
    assert cli.main([]) == cli.EXIT_VALIDATION


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.json"
    proc = subprocess.run([sys.executable, "-m", "gibbsvar", "series", "--p-min", "0.2", "--eps", "0.01",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(out.read_text())["passed"]
