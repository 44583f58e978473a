"""Monte Carlo harness tests.

The centerpiece is an end-to-end oracle: a straight-line re-implementation of
one trial (its seed chain, its draw order, its scoring) written without
calling run_trial, so a silent change to either side breaks the comparison.
"""

import math

import numpy as np
import pytest

from phaseonly_cs.admm import SolveStatus, SolverOptions
from phaseonly_cs.experiments import (
    TrialConfig,
    compute_spsr,
    mix_seed,
    run_trial,
    sweep_k,
    sweep_m,
)
from phaseonly_cs.recovery import MethodId, Support, extract_support, supports_equal
from phaseonly_cs.recovery import solve_pobp, solve_possr, solve_sbp


# ------------------------------------------------------------------ seed mixing


def _splitmix_reference(*parts):
    # independently restated from the published splitmix64 finalizer
    mask = 2**64 - 1
    state = 0
    for part in parts:
        z = (state + (part & mask) + 0x9E3779B97F4A7C15) & mask
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        z ^= z >> 31
        state = z
    return state


def test_mix_seed_matches_published_finalizer():
    cases = [(0,), (1,), (0, 0), (12345, 60, 4), (2**63, 7, 7, 999, 3)]
    for parts in cases:
        assert mix_seed(*parts) == _splitmix_reference(*parts)


def test_mix_seed_prefix_consistency_and_spread():
    assert mix_seed(5, 6) != mix_seed(6, 5)
    assert mix_seed(0) != mix_seed(1)
    seeds = {mix_seed(0, m, k, t) for m in range(3) for k in range(1, 3)
             for t in range(10)}
    assert len(seeds) == 60                        # no collisions on a small grid
    with pytest.raises(ValueError):
        mix_seed()


# ------------------------------------------------------------------ TrialConfig


def test_trial_config_validation():
    TrialConfig(n=8, m=4, k=2)                      # fine
    with pytest.raises(ValueError):
        TrialConfig(n=8, m=4, k=0)
    with pytest.raises(ValueError):
        TrialConfig(n=8, m=4, k=9)
    with pytest.raises(ValueError):
        TrialConfig(n=8, m=0, k=1)
    with pytest.raises(ValueError):
        TrialConfig(n=8, m=4, k=1, mode="quaternion")
    with pytest.raises(ValueError):
        TrialConfig(n=8, m=4, k=1, corruption_variance=0.0)
    with pytest.raises(ValueError):
        TrialConfig(n=8, m=4, k=1, methods=())
    with pytest.raises(ValueError):
        TrialConfig(n=8, m=4, k=1, methods=("sbp", "sbp"))
    with pytest.raises(TypeError):
        TrialConfig(n=8, m=4, k=1, base_seed=1.5)


def test_trial_config_coerces_method_names():
    cfg = TrialConfig(n=8, m=4, k=1, methods=("possr", "sbp"))
    assert cfg.methods == (MethodId.POSSR, MethodId.SBP)


# ------------------------------------------------------------------ run_trial


def _oracle_trial(cfg, trial_index):
    """Re-derive one trial from scratch: seed chain, draws, solves, scoring."""
    seed = _splitmix_reference(cfg.base_seed, cfg.m, cfg.k, trial_index, 0)
    rng = np.random.default_rng(seed)
    # signal: support first, then values (complex = two normal blocks / sqrt 2)
    idx = rng.choice(cfg.n, size=cfg.k, replace=False)
    if cfg.mode == "real":
        vals = rng.standard_normal(cfg.k)
        x = np.zeros(cfg.n)
    else:
        vals = (rng.standard_normal(cfg.k)
                + 1j * rng.standard_normal(cfg.k)) * math.sqrt(0.5)
        x = np.zeros(cfg.n, dtype=complex)
    x[idx] = vals
    truth = tuple(sorted(int(i) for i in idx))
    # sensing matrix from the same stream
    if cfg.mode == "real":
        a = rng.standard_normal((cfg.m, cfg.n))
    else:
        a = (rng.standard_normal((cfg.m, cfg.n))
             + 1j * rng.standard_normal((cfg.m, cfg.n))) * math.sqrt(0.5)
    # corruption: truncated normal by rejection
    v = rng.normal(cfg.corruption_mean, math.sqrt(cfg.corruption_variance),
                   size=cfg.m)
    while (v <= 0).any():
        v[v <= 0] = rng.normal(cfg.corruption_mean,
                               math.sqrt(cfg.corruption_variance),
                               size=int((v <= 0).sum()))
    y = a @ x
    z = v * y
    z_p = y / np.abs(y)
    solves = {
        MethodId.SBP: solve_sbp(a, z, cfg.solver),
        MethodId.POBP: solve_pobp(a, z_p, cfg.solver),
        MethodId.POSSR: solve_possr(a, z_p, cfg.solver),
    }
    success = {}
    for method, report in solves.items():
        guess = extract_support(report.solution, cfg.k)
        success[method] = (report.status is SolveStatus.CONVERGED
                           and guess.indices == truth)
    return seed, success, {m: r.status for m, r in solves.items()}


def test_run_trial_matches_straight_line_oracle():
    cfg = TrialConfig(n=4, m=4, k=1, base_seed=314)
    for index in range(4):
        expect_seed, expect_success, expect_status = _oracle_trial(cfg, index)
        result = run_trial(cfg, index)
        assert result.seed == expect_seed
        assert result.success == expect_success
        assert result.status == expect_status


def test_run_trial_oracle_real_mode():
    cfg = TrialConfig(n=5, m=4, k=2, mode="real", base_seed=2718)
    for index in range(3):
        expect_seed, expect_success, expect_status = _oracle_trial(cfg, index)
        result = run_trial(cfg, index)
        assert result.seed == expect_seed
        assert result.success == expect_success


def test_run_trial_deterministic():
    cfg = TrialConfig(n=12, m=8, k=2, base_seed=7)
    r1 = run_trial(cfg, 5, keep_estimates=True)
    r2 = run_trial(cfg, 5, keep_estimates=True)
    assert r1.seed == r2.seed
    assert r1.success == r2.success
    for method in cfg.methods:
        assert np.array_equal(r1.estimates[method], r2.estimates[method])


def test_run_trial_no_cross_method_leakage():
    # dropping methods from the config must not change the survivors
    full = TrialConfig(n=12, m=8, k=2, base_seed=11)
    only = TrialConfig(n=12, m=8, k=2, base_seed=11, methods=(MethodId.POSSR,))
    rf = run_trial(full, 3, keep_estimates=True)
    ro = run_trial(only, 3, keep_estimates=True)
    assert rf.seed == ro.seed
    assert rf.success[MethodId.POSSR] == ro.success[MethodId.POSSR]
    assert np.array_equal(rf.estimates[MethodId.POSSR], ro.estimates[MethodId.POSSR])


def test_run_trial_distinct_indices_draw_distinct_instances():
    cfg = TrialConfig(n=10, m=6, k=2, base_seed=0)
    seeds = {run_trial(cfg, i).seed for i in range(8)}
    assert len(seeds) == 8


def test_run_trial_easy_regime_succeeds():
    # k=1 from 12 of 16 coordinates: plenty of freedom for the L1 programs
    cfg = TrialConfig(n=16, m=12, k=1, base_seed=100)
    result = run_trial(cfg, 0)
    assert all(result.success.values())
    assert all(s is SolveStatus.CONVERGED for s in result.status.values())


def test_run_trial_keeps_diagnostics_lean_by_default():
    cfg = TrialConfig(n=8, m=8, k=1, base_seed=100)
    result = run_trial(cfg, 0)
    assert result.signal is None and result.estimates is None


def test_run_trial_overdetermined_statuses():
    # with m > n the corruption pushes z out of the operator's range, so the
    # equality programs detect infeasibility while the one-sided program
    # still solves
    cfg = TrialConfig(n=6, m=10, k=2, base_seed=21)
    result = run_trial(cfg, 0)
    assert result.status[MethodId.SBP] is SolveStatus.INFEASIBLE_DETECTED
    assert result.status[MethodId.POBP] is SolveStatus.INFEASIBLE_DETECTED
    assert result.status[MethodId.POSSR] is SolveStatus.CONVERGED
    assert not result.success[MethodId.SBP]
    assert not result.success[MethodId.POBP]


def test_run_trial_rejects_negative_index():
    with pytest.raises(ValueError):
        run_trial(TrialConfig(n=4, m=4, k=1), -1)


def test_fixed_phi_shares_matrix_across_trials():
    cfg = TrialConfig(n=8, m=6, k=1, base_seed=5, fixed_phi=True)
    r0 = run_trial(cfg, 0, keep_estimates=True)
    r1 = run_trial(cfg, 1, keep_estimates=True)
    assert r0.seed != r1.seed                        # fresh signals either way
    # reconstruct the matrix both trials must have shared (tagged stream)
    phi_seed = mix_seed(cfg.base_seed, cfg.m, cfg.k, 0x5068695F666978)
    rng = np.random.default_rng(phi_seed)
    phi = (rng.standard_normal((6, 8)) + 1j * rng.standard_normal((6, 8))) * math.sqrt(0.5)
    for r in (r0, r1):
        # the equality solve pinned phi @ x_pobp to the clean phases of this
        # trial's signal under the shared operator; a trial-local operator
        # would leave an O(1) residual here instead of solver tolerance
        y = phi @ r.signal.coefficients
        z_p = y / np.abs(y)
        resid = np.linalg.norm(phi @ r.estimates[MethodId.POBP] - z_p)
        assert resid <= 1e-5 * (1.0 + np.linalg.norm(z_p))


# ------------------------------------------------------------------ SPSR stats


def test_wilson_known_value():
    est = compute_spsr([True] * 762 + [False] * 238)
    assert est.rate == pytest.approx(0.762)
    assert est.successes == 762 and est.trials == 1000
    # independently restated Wilson 95% half-width
    z, nobs, p = 1.96, 1000, 0.762
    half = (z / (1 + z * z / nobs)) * math.sqrt(
        p * (1 - p) / nobs + z * z / (4 * nobs * nobs))
    assert est.halfwidth == pytest.approx(half, rel=1e-12)


def test_wilson_extremes_stay_inside_unit_interval():
    for flags in ([True] * 50, [False] * 50, [True]):
        est = compute_spsr(flags)
        assert 0.0 <= est.rate - est.halfwidth or est.rate == 0.0
        assert est.halfwidth > 0.0
        center = (est.rate + 1.96**2 / (2 * est.trials)) / (1 + 1.96**2 / est.trials)
        assert 0.0 <= center - est.halfwidth and center + est.halfwidth <= 1.0


def test_wilson_halfwidth_shrinks_with_trials():
    small = compute_spsr([True, False] * 10)
    large = compute_spsr([True, False] * 1000)
    assert large.halfwidth < small.halfwidth


def test_compute_spsr_accepts_iterables_and_rejects_empty():
    est = compute_spsr(iter([1, 0, 1, 1]))
    assert est.rate == 0.75
    with pytest.raises(ValueError):
        compute_spsr([])


# ------------------------------------------------------------------ sweeps


_SWEEP_CFG = TrialConfig(n=10, m=8, k=1, base_seed=77,
                         solver=SolverOptions(rho=3.0, relax=1.8))


def test_sweep_k_shapes_and_counts():
    res = sweep_k(_SWEEP_CFG, [1, 2, 3], trials=6)
    assert res.axis == "k" and res.grid == (1, 2, 3)
    assert res.trials_per_point == 6
    for method in _SWEEP_CFG.methods:
        assert len(res.spsr[method]) == 3
        for rate, succ in zip(res.spsr[method], res.successes[method]):
            assert rate == succ / 6
    assert len(res.seeds) == 3
    assert res.seeds[0] == mix_seed(77, 8, 1)


def test_sweep_results_match_their_own_trials():
    res = sweep_m(_SWEEP_CFG, [6, 8], trials=5)
    for j, m in enumerate((6, 8)):
        cfg = TrialConfig(n=10, m=m, k=1, base_seed=77,
                          solver=SolverOptions(rho=3.0, relax=1.8))
        for method in cfg.methods:
            direct = sum(run_trial(cfg, i).success[method] for i in range(5))
            assert res.successes[method][j] == direct


def test_sweep_parallel_equals_serial():
    serial = sweep_k(_SWEEP_CFG, [1, 2], trials=8, jobs=1)
    parallel = sweep_k(_SWEEP_CFG, [1, 2], trials=8, jobs=2)
    assert serial.spsr == parallel.spsr
    assert serial.halfwidth == parallel.halfwidth
    assert serial.successes == parallel.successes
    assert serial.solver_failures == parallel.solver_failures


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        sweep_k(_SWEEP_CFG, [], trials=5)
    with pytest.raises(ValueError):
        sweep_k(_SWEEP_CFG, [2, 2], trials=5)
    with pytest.raises(ValueError):
        sweep_k(_SWEEP_CFG, [3, 1], trials=5)
    with pytest.raises(ValueError):
        sweep_k(_SWEEP_CFG, [0, 1], trials=5)
    with pytest.raises(ValueError):
        sweep_k(_SWEEP_CFG, [1, _SWEEP_CFG.n + 1], trials=5)
    with pytest.raises(ValueError):
        sweep_m(_SWEEP_CFG, [0, 4], trials=5)
    with pytest.raises(ValueError):
        sweep_k(_SWEEP_CFG, [1, 2], trials=0)


def test_sweep_records_solver_failures():
    # m > n makes the equality methods infeasible on every trial; the
    # failure counters must agree with the statuses of the trials they
    # summarize, method by method
    cfg = TrialConfig(n=4, m=6, k=1, base_seed=1)
    res = sweep_m(cfg, [6, 8], trials=3)
    assert res.solver_failures[MethodId.SBP] == (3, 3)
    assert res.solver_failures[MethodId.POBP] == (3, 3)
    assert res.spsr[MethodId.SBP] == (0.0, 0.0)
    for j, m in enumerate((6, 8)):
        point = TrialConfig(n=4, m=m, k=1, base_seed=1)
        for method in cfg.methods:
            direct = sum(run_trial(point, i).status[method]
                         is not SolveStatus.CONVERGED for i in range(3))
            assert res.solver_failures[method][j] == direct
