"""Acceptance gate: one test per shipping criterion, tolerances pinned.

Quick mode (default) runs the two big Monte Carlo sweeps at 200 trials per
grid point with statistical tolerances doubled; set ``ACCEPTANCE_FULL=1`` for
the full 1000-trial version with undoubled tolerances. Every test appends the
numbers it measured to ``acceptance_report.txt`` in the repository root, so a
``pytest -v`` run leaves both the pass/fail verdicts (test outcomes) and the
measured margins (report file) behind.
"""

import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

sys.path.insert(0, os.path.dirname(__file__))
from lp_oracle import equality_l1_optimum, inequality_l1_optimum  # noqa: E402

from phaseonly_cs.admm import (SolveStatus, SolverOptions, solve_equality_l1,
                               solve_inequality_l1)
from phaseonly_cs.cli import main as cli_main
from phaseonly_cs.experiments import TrialConfig, run_trial, sweep_k, sweep_m
from phaseonly_cs.model import (Dictionary, build_measurement_set,
                                generate_sensing_matrix, generate_sparse_signal,
                                measure, sample_corruption)
from phaseonly_cs.recovery import MethodId, run_method

pytestmark = pytest.mark.acceptance

FULL = os.environ.get("ACCEPTANCE_FULL", "") == "1"
#: Monte Carlo trials per grid point for the sweep criteria.
L = 1000 if FULL else 200
#: The two non-default configurations feed only the soft quantitative
#: report, so quick mode samples them at half resolution.
EXTRA_L = 1000 if FULL else 100
#: Additive statistical tolerances scale up, required dominance margins scale
#: down, by this factor in quick mode.
TOL = 1.0 if FULL else 2.0
#: Throughput options for the Monte Carlo criteria (defaults stay untouched;
#: the solved programs are identical, only splitting parameters differ).
TUNED = SolverOptions(rho=3.0, relax=1.8)

SEED = 20260823
_REPORT = Path(__file__).resolve().parent.parent / "acceptance_report.txt"


def _record(line: str):
    print(line)
    with open(_REPORT, "a", encoding="utf-8") as handle:
        handle.write(line + "\n")


@pytest.fixture(scope="module", autouse=True)
def _report_header():
    with open(_REPORT, "w", encoding="utf-8") as handle:
        handle.write(f"acceptance run: mode={'full' if FULL else 'quick'} "
                     f"L={L} tolerance_scale={TOL}\n")


# =====================================================================
# 1. solver objectives match a vertex-enumeration LP oracle
# =====================================================================


def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    started = time.perf_counter()
    worst_eq = 0.0
    for _ in range(60):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, n + 1))
        a = rng.standard_normal((m, n))
        x0 = np.zeros(n)
        nz = int(rng.integers(1, min(m, n) + 1))
        x0[rng.choice(n, nz, replace=False)] = rng.standard_normal(nz)
        b = a @ x0
        opt = equality_l1_optimum(a, b)
        assert opt is not None
        rep = solve_equality_l1(a, b)
        assert rep.status is SolveStatus.CONVERGED
        worst_eq = max(worst_eq, abs(rep.objective - opt))

    worst_in = 0.0
    compared = infeasible = 0
    while compared < 50:
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 9))
        c = rng.standard_normal((m, n))
        opt = inequality_l1_optimum(c)
        rep = solve_inequality_l1(c)
        if opt is None:
            # empty feasible set: the solver must not claim convergence
            assert rep.status is not SolveStatus.CONVERGED
            infeasible += 1
            continue
        assert rep.status is SolveStatus.CONVERGED
        worst_in = max(worst_in, abs(rep.objective - opt))
        compared += 1
    elapsed = time.perf_counter() - started

    _record(f"criterion 1: equality worst |obj-opt| = {worst_eq:.3e}, "
            f"inequality worst = {worst_in:.3e} over {60 + compared} instances "
            f"(+{infeasible} infeasible cross-checks), {elapsed:.1f}s")
    assert worst_eq <= 1e-4
    assert worst_in <= 1e-4
    assert elapsed < 60.0


# =====================================================================
# 2. phase-only methods are bit-identical under amplitude rescaling
# =====================================================================


def test_criterion_2_phase_only_invariance():
    rng = np.random.default_rng(SEED + 1)
    for i in range(50):
        mode = "real" if i % 2 else "complex"
        sig = generate_sparse_signal(16, 2, mode, rng)
        phi = generate_sensing_matrix(12, 16, mode, rng)
        y, a = measure(phi, Dictionary.identity(16), sig)
        v1 = sample_corruption(12, rng=rng)
        v2 = sample_corruption(12, rng=rng)
        ms1 = build_measurement_set(y, v1)
        ms2 = build_measurement_set(y, v2 * v1)     # z rescaled by diag(v2)
        assert np.array_equal(ms1.z_p, ms2.z_p)
        for method in (MethodId.POBP, MethodId.POSSR):
            r1 = run_method(method, a, ms1, TUNED)
            r2 = run_method(method, a, ms2, TUNED)
            assert np.array_equal(r1.solution, r2.solution)
            assert r1.iterations == r2.iterations
            assert r1.status == r2.status
    _record("criterion 2: 50 instances, POBP/POSSR outputs bit-identical "
            "under positive amplitude rescaling")


# =====================================================================
# 3. scaled ground truth satisfies the one-sided constraints
# =====================================================================


def test_criterion_3_ground_truth_feasibility():
    rng = np.random.default_rng(SEED + 2)
    worst_re = 0.0
    worst_im = 0.0
    for i in range(1000):
        mode = "real" if i % 2 else "complex"
        n = int(rng.integers(8, 40))
        m = int(rng.integers(4, 30))
        k = int(rng.integers(1, min(n, 6) + 1))
        sig = generate_sparse_signal(n, k, mode, rng)
        phi = generate_sensing_matrix(m, n, mode, rng)
        y, a = measure(phi, Dictionary.identity(n), sig)
        v = sample_corruption(m, rng=rng)
        ms = build_measurement_set(y, v)
        t = np.conj(ms.z_p) * (a @ (sig.coefficients / ms.y_a.min()))
        worst_re = max(worst_re, float(np.max(1.0 - t.real)))
        if np.iscomplexobj(t):
            worst_im = max(worst_im, float(np.max(np.abs(t.imag))))
    _record(f"criterion 3: 1000 instances, worst 1-Re = {worst_re:.3e}, "
            f"worst |Im| = {worst_im:.3e}")
    assert worst_re <= 1e-9
    assert worst_im <= 1e-9


# =====================================================================
# 4 + 5. success probability vs measurement count (N=100, K=4)
# =====================================================================

_M_GRID = tuple(range(10, 150, 10))
_REDUCED_GRID = (50, 60, 70, 80, 90, 100, 110, 140)


def _msweep_config(mode, strict):
    return TrialConfig(
        n=100, m=10, k=4, mode=mode, base_seed=SEED,
        solver=SolverOptions(rho=3.0, relax=1.8, strict_imag=strict))


@pytest.fixture(scope="module")
def msweep():
    started = time.perf_counter()
    res = sweep_m(_msweep_config("complex", True), _M_GRID, trials=L)
    _record(f"m-sweep (complex, strict): L={L}, "
            f"{time.perf_counter() - started:.0f}s")
    return res


def test_criterion_4a_endpoint_dominance(msweep):
    last = len(_M_GRID) - 1
    possr = msweep.spsr[MethodId.POSSR][last]
    hw_possr = msweep.halfwidth[MethodId.POSSR][last]
    ok = True
    for baseline in (MethodId.SBP, MethodId.POBP):
        rate = msweep.spsr[baseline][last]
        hw = msweep.halfwidth[baseline][last]
        margin = possr - rate
        need = (2.0 / TOL) * (hw_possr + hw)
        _record(f"criterion 4a: possr {possr:.3f} vs {baseline.value} "
                f"{rate:.3f} at M=140, margin {margin:.3f} > {need:.3f}")
        ok = ok and margin > need
    assert ok


def test_criterion_4b_possr_monotone(msweep):
    rates = msweep.spsr[MethodId.POSSR]
    hws = msweep.halfwidth[MethodId.POSSR]
    worst = 0.0
    for i in range(len(rates) - 1):
        dip = rates[i] - rates[i + 1]
        allowance = 2.0 * TOL * (hws[i] + hws[i + 1])
        worst = max(worst, dip - allowance)
        assert dip <= allowance, (
            f"possr drops {dip:.3f} from M={_M_GRID[i]} to "
            f"M={_M_GRID[i + 1]}, allowed {allowance:.3f}")
    _record(f"criterion 4b: possr non-decreasing in M "
            f"(worst dip-minus-allowance {worst:.3f})")


def test_criterion_4c_sbp_peak_then_decline(msweep):
    rates = msweep.spsr[MethodId.SBP]
    hws = msweep.halfwidth[MethodId.SBP]
    peak = int(np.argmax(rates))
    peak_m = _M_GRID[peak]
    _record(f"criterion 4c: sbp peak {rates[peak]:.3f} at M={peak_m}")
    assert 50 <= peak_m <= 110
    for i in range(peak, len(rates) - 1):
        rise = rates[i + 1] - rates[i]
        allowance = 2.0 * TOL * (hws[i] + hws[i + 1])
        assert rise <= allowance, (
            f"sbp rises {rise:.3f} after its peak at M={_M_GRID[i + 1]}")


@pytest.fixture(scope="module")
def extra_mode_sweeps():
    out = {}
    for mode, strict, label in (("real", True, "real"),
                                ("complex", False, "complex relaxed-imag")):
        started = time.perf_counter()
        out[label] = sweep_m(_msweep_config(mode, strict), _REDUCED_GRID,
                             trials=EXTRA_L)
        _record(f"m-sweep ({label}): L={EXTRA_L}, reduced grid, "
                f"{time.perf_counter() - started:.0f}s")
    return out


def test_criterion_5_quantitative_targets(msweep, extra_mode_sweeps):
    # soft criterion: the reference numbers depend on modelling choices the
    # methods' description leaves open, so this reports per configuration
    # and records which one lands closest instead of failing the gate
    targets = (("possr@140", MethodId.POSSR, 140, 0.861, 0.08),
               ("sbp peak", MethodId.SBP, None, 0.762, 0.10),
               ("possr@80", MethodId.POSSR, 80, 0.736, 0.10))
    configs = {"complex strict": msweep}
    configs.update(extra_mode_sweeps)
    closest, closest_dev = None, math.inf
    for label, res in configs.items():
        total = 0.0
        for name, method, at_m, target, tol in targets:
            if at_m is None:
                value = max(res.spsr[method])
            else:
                value = res.spsr[method][res.grid.index(at_m)]
            dev = abs(value - target)
            total += dev
            verdict = "PASS" if dev <= tol * TOL else "FAIL"
            _record(f"criterion 5 [{label}] {name}: {value:.3f} vs "
                    f"{target} +/- {tol * TOL:g} -> {verdict}")
            assert 0.0 <= value <= 1.0
        if total < closest_dev:
            closest, closest_dev = label, total
    _record(f"criterion 5: closest configuration = {closest} "
            f"(total deviation {closest_dev:.3f}); soft criterion, "
            "reported not gated")


# =====================================================================
# 6. success probability vs sparsity (N=100, M=100)
# =====================================================================

_K_GRID = tuple(range(1, 11))


@pytest.fixture(scope="module")
def ksweep():
    started = time.perf_counter()
    cfg = TrialConfig(n=100, m=100, k=1, mode="complex", base_seed=SEED,
                      solver=SolverOptions(rho=3.0, relax=1.8))
    res = sweep_k(cfg, _K_GRID, trials=L)
    _record(f"k-sweep (complex, strict): L={L}, "
            f"{time.perf_counter() - started:.0f}s")
    return res


def test_criterion_6_possr_dominates_over_k(ksweep):
    slack = 0.03 * TOL
    dominant = 0
    for i, k in enumerate(_K_GRID):
        possr = ksweep.spsr[MethodId.POSSR][i]
        hw_possr = ksweep.halfwidth[MethodId.POSSR][i]
        beats_both = True
        for baseline in (MethodId.SBP, MethodId.POBP):
            rate = ksweep.spsr[baseline][i]
            hw = ksweep.halfwidth[baseline][i]
            assert possr >= rate - slack, (
                f"possr {possr:.3f} below {baseline.value} {rate:.3f} - "
                f"{slack:g} at K={k}")
            if possr - rate <= (2.0 / TOL) * (hw_possr + hw):
                beats_both = False
        dominant += beats_both
    _record(f"criterion 6: possr >= baselines - {slack:g} at every K; "
            f"strict dominance at {dominant}/{len(_K_GRID)} K values")
    assert dominant >= len(_K_GRID) // 2


# =====================================================================
# 7. near-uncorrupted sanity rate for the baseline
# =====================================================================


def test_criterion_7_sbp_uncorrupted_sanity():
    cfg = TrialConfig(n=100, m=60, k=4, mode="complex",
                      corruption_variance=1e-8, methods=(MethodId.SBP,),
                      base_seed=SEED, solver=TUNED)
    successes = sum(run_trial(cfg, i).success[MethodId.SBP]
                    for i in range(200))
    rate = successes / 200
    _record(f"criterion 7: sbp at variance 1e-8 -> {successes}/200 = {rate:.3f}")
    assert rate >= 0.95


# =====================================================================
# 8. corruption sampler moments
# =====================================================================


def test_criterion_8_corruption_sampler():
    v = sample_corruption(10**6, 1.0, 0.5, np.random.default_rng(SEED))
    mean = float(v.mean())
    _record(f"criterion 8: 1e6 samples, mean {mean:.6f} "
            f"(target 1.1126 +/- 0.01), min {v.min():.3e}")
    assert abs(mean - 1.1126) <= 0.01
    assert v.min() > 0.0


# =====================================================================
# 9. byte-identical sweep output across worker counts
# =====================================================================


def test_criterion_9_determinism_across_jobs(tmp_path):
    runner = CliRunner()
    cfg = {"n": 20, "m": 12, "k": 1, "base_seed": SEED,
           "solver": {"rho": 3.0, "relax": 1.8},
           "sweep": {"axis": "k", "from": 1, "to": 3, "trials": 16}}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    result = runner.invoke(cli_main, ["sweep", "k", "--config", str(cfg_path),
                                      "--jobs", "1", "--out", str(a_dir)])
    assert result.exit_code == 0, result.output
    # second run re-keyed from the first run's manifest, eight workers
    manifest = a_dir / "sweep_k.manifest.json"
    result = runner.invoke(cli_main, ["sweep", "k", "--config", str(manifest),
                                      "--jobs", "8", "--out", str(b_dir)])
    assert result.exit_code == 0, result.output
    a_bytes = (a_dir / "sweep_k.csv").read_bytes()
    b_bytes = (b_dir / "sweep_k.csv").read_bytes()
    _record(f"criterion 9: sweep CSV {len(a_bytes)} bytes, "
            f"--jobs 1 vs --jobs 8 identical = {a_bytes == b_bytes}")
    assert a_bytes == b_bytes
