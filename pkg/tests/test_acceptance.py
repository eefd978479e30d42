"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that the conftest prints at the end of
the session (``pytest tests/test_acceptance.py``).
"""

import statistics
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, random_library
from phasefrac import io, synth
from phasefrac.core import AngleGrid, Composition, Spectrum, validate_dataset
from phasefrac.errors import DegenerateFit
from phasefrac.metrics import dominant_phase_accuracy, rho
from phasefrac.solver import SolverConfig, estimate_composition, fit_phase_library, spectrum_sse
from phasefrac.validation import loocv, resubstitution_eval

# seeded baselines for the paper-shaped preset (seed 2023); a change here
# means the solver or the generator changed
PAPER_SHAPED_LOOCV_RHO = 0.9916067865388635
PAPER_SHAPED_RESUB_RHO = 0.9947018611433264
BASELINE_TOL = 1e-9


def record(key, ok, line):
    ACCEPTANCE[key] = (bool(ok), line)
    assert ok, line


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def test_c1_metric_exactness():
    names = ("a", "b")
    checks = [
        rho(Composition([0.5, 0.5], names), Composition([0.6, 0.4], names)) - 0.9,
        rho(Composition([1.0, 0.0], names), Composition([0.0, 1.0], names)) - 0.0,
        rho(Composition([0.3, 0.7], names), Composition([0.3, 0.7], names)) - 1.0,
    ]
    worst = max(abs(c) for c in checks)
    record("C1 metric exactness", worst <= 1e-12, f"max |rho - expected| = {worst:.2e} (tol 1e-12)")


def test_c2_oracle_equivalence():
    rng = np.random.default_rng(20240501)
    step = 0.001
    worst_ratio, n = 0.0, 0
    off_model_violations = 0
    for m in (2, 3):
        for k in (10, 200):
            for _ in range(26):
                lib = random_library(rng, m, k)
                alpha = rng.dirichlet(np.ones(m))
                if rng.uniform() < 0.3:
                    alpha[rng.integers(m)] = 0.0  # land on a face of the simplex
                    alpha /= alpha.sum()
                y = Spectrum(alpha @ lib.patterns, lib.grid)
                est, _ = estimate_composition(y, lib)
                oracle = synth.oracle_simplex_search(y, lib, step)
                e_est = spectrum_sse(y, lib, est.fractions)
                e_orc = spectrum_sse(y, lib, oracle.fractions)
                tol = max(1e-6, synth.lattice_bound(y, lib, est.fractions, step))
                worst_ratio = max(worst_ratio, abs(e_est - e_orc) / tol)
                n += 1

                # arbitrary spectrum: the lattice optimum is never worse than
                # the solver beyond lattice resolution
                z = Spectrum(rng.uniform(0.0, 1.0, k) * lib.patterns.max() + 1e-3, lib.grid)
                try:
                    est_z, _ = estimate_composition(z, lib)
                except DegenerateFit:
                    continue
                orc_z = synth.oracle_simplex_search(z, lib, step)
                bound = synth.lattice_bound(z, lib, est_z.fractions, step)
                if spectrum_sse(z, lib, orc_z.fractions) > spectrum_sse(z, lib, est_z.fractions) + max(1e-6, bound):
                    off_model_violations += 1
    ok = n >= 100 and worst_ratio <= 1.0 and off_model_violations == 0
    record(
        "C2 oracle equivalence",
        ok,
        f"{n} instances, max |E2_solver - E2_oracle| / tol = {worst_ratio:.3g}; "
        f"off-model oracle-above-solver violations = {off_model_violations}",
    )


@pytest.fixture(scope="module")
def criterion3():
    ds, truth = synth.generate(synth.preset("ci-small", noise_sigma=0.0))
    assert (ds.M, ds.K, ds.N) == (3, 200, 12)
    return ds, truth, loocv(ds)


def test_c3_noise_free_identifiability(criterion3):
    ds, truth, cv = criterion3
    lib, _ = fit_phase_library(ds)
    cos = [cosine(e, t) for e, t in zip(lib.patterns, truth.patterns)]
    ok = min(cos) >= 0.999 and cv.report.mean_rho >= 0.999
    record(
        "C3 noise-free identifiability",
        ok,
        f"min pattern cosine = {min(cos):.9f} (>= 0.999), LOOCV mean rho = {cv.report.mean_rho:.9f} (>= 0.999)",
    )


@pytest.mark.slow
def test_c4_noisy_desk_scale():
    ds, _ = synth.generate(synth.preset("paper-shaped"))
    assert (ds.M, ds.K, ds.N) == (7, 4000, 46)
    start = time.perf_counter()
    cv = loocv(ds, jobs=1)
    resub = resubstitution_eval(ds)
    elapsed = time.perf_counter() - start
    dom = dominant_phase_accuracy(ds.compositions, cv.predictions)
    baseline_ok = (
        abs(cv.report.mean_rho - PAPER_SHAPED_LOOCV_RHO) <= BASELINE_TOL
        and abs(resub.mean_rho - PAPER_SHAPED_RESUB_RHO) <= BASELINE_TOL
    )
    ok = cv.report.mean_rho >= 0.95 and dom == 1.0 and resub.mean_rho >= cv.report.mean_rho and elapsed < 300 and baseline_ok
    record(
        "C4 noisy desk-scale run",
        ok,
        f"LOOCV rho = {cv.report.mean_rho:.6f} (>= 0.95), dominant acc = {dom:.3f} (= 1), "
        f"resub rho = {resub.mean_rho:.6f} (>= LOOCV), MAE = {cv.report.mae:.5f}, CS = {cv.report.mean_cosine:.5f}, "
        f"{elapsed:.1f}s single-threaded (< 300s), baselines {'match' if baseline_ok else 'DRIFTED'}",
    )


def test_c5_training_monotonicity():
    rng = np.random.default_rng(7)
    worst, n = -np.inf, 0
    for _ in range(60):
        m = int(rng.integers(1, 6))
        k = int(rng.integers(1, 40))
        nsamp = int(rng.integers(m, m + 15))
        alphas = [np.eye(m)[s] if s < m else rng.dirichlet(np.ones(m)) for s in range(nsamp)]
        ys = rng.uniform(0, 10, size=(nsamp, k)) * (rng.uniform(size=(nsamp, k)) < 0.7) + 1e-3
        ds = validate_dataset(list(zip(ys, alphas)), AngleGrid(np.arange(k, dtype=float)), [f"p{j}" for j in range(m)])
        _, trace = fit_phase_library(ds, SolverConfig(max_iterations=100))
        seq = [trace.initial_objective, *trace.objective_per_sweep]
        for prev, cur in zip(seq, seq[1:]):
            worst = max(worst, (cur - prev) / prev)
        n += 1
    record("C5 training monotonicity", n >= 50 and worst <= 1e-9, f"{n} datasets, max relative E2 increase = {worst:.2e} (<= 1e-9)")


def test_c6_simplex_closure():
    rng = np.random.default_rng(99)
    n, degenerate, bad = 0, 0, 0
    for _ in range(400):
        m = int(rng.integers(1, 7))
        k = int(rng.integers(1, 60))
        lib = random_library(rng, m, k, sparse=bool(rng.integers(2)))
        y = rng.uniform(0, 1, k) * (rng.uniform(size=k) < rng.uniform(0.05, 1.0)) * 10 ** rng.uniform(-6, 6)
        if not np.any(y > 0):
            y[rng.integers(k)] = 1.0
        try:
            comp, _ = estimate_composition(Spectrum(y, lib.grid), lib)
        except DegenerateFit:
            degenerate += 1
            continue
        n += 1
        if np.any(comp.fractions < 0) or abs(comp.fractions.sum() - 1.0) > 1e-9:
            bad += 1
    record("C6 simplex/non-negativity closure", bad == 0, f"{n} valid outputs, {degenerate} DegenerateFit, {bad} violations")


def test_c7_convergence_behavior(criterion3):
    _, _, cv = criterion3
    sweeps = [t.sweeps_used for t in cv.predict_traces]
    ok = all(t.converged for t in cv.predict_traces) and max(sweeps) <= 50
    record(
        "C7 inference convergence",
        ok,
        f"all folds converged (L-inf < 1e-8): {all(t.converged for t in cv.predict_traces)}, "
        f"max sweeps = {max(sweeps)} (<= 50), median = {statistics.median(sweeps)} (reference: ~15)",
    )


def _pipeline(workdir):
    ds, _ = synth.generate(synth.preset("ci-small", noise_sigma=0.01))
    manifest = io.save_dataset(ds, workdir / "data")
    loaded = io.load_dataset(manifest)
    lib, _ = fit_phase_library(loaded)
    io.save_library(lib, workdir / "lib.json")
    return ds, loaded, lib, io.load_library(workdir / "lib.json"), (workdir / "lib.json").read_bytes()


def test_c8_format_closure(tmp_path):
    ds, loaded, lib, back, blob1 = _pipeline(tmp_path / "run1")
    _, _, _, back2, blob2 = _pipeline(tmp_path / "run2")
    lossless = (
        loaded.intensities.tobytes() == ds.intensities.tobytes()
        and loaded.fractions.tobytes() == ds.fractions.tobytes()
        and back.patterns.tobytes() == lib.patterns.tobytes()
        and back.grid.angles.tobytes() == lib.grid.angles.tobytes()
        and back.phase_names == lib.phase_names
    )
    deterministic = blob1 == blob2 and back2.patterns.tobytes() == back.patterns.tobytes()
    record("C8 format closure", lossless and deterministic, f"lossless round trip: {lossless}, deterministic across runs: {deterministic}")
