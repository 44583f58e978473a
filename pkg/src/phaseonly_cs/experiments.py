"""Seeded Monte Carlo harness for support-recovery success probabilities.

A trial draws a fresh sparse signal, sensing matrix and corruption vector,
runs every requested recovery method on the same data, and scores each one by
exact support equality. Sweeps repeat that over a grid of sparsity or
measurement counts and aggregate per-point success rates with Wilson
confidence half-widths.

Reproducibility contract: every random draw inside a trial comes from a
generator seeded by an avalanche mix of (base_seed, m, k, trial_index), so a
trial's outcome is a pure function of the config and its index. Trials can be
fanned out across processes in any order without changing a single bit of the
aggregate result.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import SolveStatus, SolverOptions
from .model import (Dictionary, build_measurement_set, generate_sensing_matrix,
                    generate_sparse_signal, measure, sample_corruption)
from .recovery import MethodId, Support, extract_support, run_method, supports_equal
from .validation import UndefinedPhaseError, check_count, check_mode

# splitmix64 finalizer constants (Steele, Lea & Flood's published mixing
# function). Each absorbed value advances the state by the golden-ratio gamma
# and runs the xor-shift/multiply avalanche, so nearby (seed, m, k, index)
# tuples land on unrelated 64-bit streams.
_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_MULT1 = 0xBF58476D1CE4E5B9
_SPLITMIX_MULT2 = 0x94D049BB133111EB

# Distinguishes the shared-sensing-matrix stream from per-trial streams.
_FIXED_PHI_TAG = 0x5068695F666978

# Degenerate draws (a measurement landing exactly on zero, where a phase is
# undefined) are redrawn from the next attempt stream. Probability zero under
# the continuous model; the bound only guards against pathological configs.
_MAX_ATTEMPTS = 8

_WILSON_Z = 1.96


def mix_seed(*parts: int) -> int:
    """Avalanche-mix any number of integers into one 64-bit seed.

    The chain is prefix-consistent: ``mix_seed(a, b)`` equals the state that
    ``mix_seed(a, b, c)`` absorbed ``c`` into, so a stored prefix is enough
    provenance to re-derive every downstream stream.
    """
    if not parts:
        raise ValueError("mix_seed needs at least one part")
    state = 0
    for part in parts:
        z = (state + (int(part) & _MASK64) + _SPLITMIX_GAMMA) & _MASK64
        z ^= z >> 30
        z = (z * _SPLITMIX_MULT1) & _MASK64
        z ^= z >> 27
        z = (z * _SPLITMIX_MULT2) & _MASK64
        z ^= z >> 31
        state = z
    return state


_DEFAULT_METHODS = (MethodId.SBP, MethodId.POBP, MethodId.POSSR)


@dataclass(frozen=True)
class TrialConfig:
    """Everything one Monte Carlo trial depends on, seed included."""

    n: int
    m: int
    k: int
    mode: str = "complex"
    corruption_mean: float = 1.0
    corruption_variance: float = 0.5
    methods: tuple[MethodId, ...] = _DEFAULT_METHODS
    solver: SolverOptions = field(default_factory=SolverOptions)
    base_seed: int = 0
    fixed_phi: bool = False

    def __post_init__(self):
        check_count(self.n, "n", minimum=1)
        check_count(self.m, "m", minimum=1)
        check_count(self.k, "k", minimum=1)
        if self.k > self.n:
            raise ValueError(f"k must not exceed n, got k={self.k} n={self.n}")
        check_mode(self.mode)
        if not math.isfinite(self.corruption_mean):
            raise ValueError("corruption_mean must be finite")
        if not (self.corruption_variance > 0 and math.isfinite(self.corruption_variance)):
            raise ValueError("corruption_variance must be positive and finite")
        methods = tuple(MethodId(m) for m in self.methods)
        if len(set(methods)) != len(methods):
            raise ValueError("methods must not contain duplicates")
        if not methods:
            raise ValueError("at least one method is required")
        object.__setattr__(self, "methods", methods)
        if not isinstance(self.base_seed, int):
            raise TypeError("base_seed must be an integer")
        if not isinstance(self.solver, SolverOptions):
            raise TypeError("solver must be a SolverOptions instance")

    def point_seed_root(self) -> int:
        """Mix prefix shared by all of this config's trial streams."""
        return mix_seed(self.base_seed, self.m, self.k)


@dataclass(frozen=True)
class TrialResult:
    """Per-method outcome of a single trial."""

    seed: int
    success: dict
    status: dict
    iterations: dict
    signal: object = None
    estimates: dict | None = None


@dataclass(frozen=True)
class SpsrEstimate:
    """Success probability of support recovery with a Wilson 95% half-width."""

    rate: float
    halfwidth: float
    successes: int
    trials: int


@dataclass(frozen=True)
class SweepResult:
    """Aggregated sweep outcome over one axis of the (K, M) plane."""

    axis: str
    grid: tuple[int, ...]
    trials_per_point: int
    spsr: dict
    halfwidth: dict
    successes: dict
    solver_failures: dict
    seeds: tuple[int, ...]
    config: TrialConfig


def run_trial(cfg: TrialConfig, trial_index: int, keep_estimates: bool = False) -> TrialResult:
    """Run every configured method on one freshly drawn instance.

    Draw order within the trial stream is fixed (signal, then sensing matrix
    unless shared, then corruption); changing it would silently re-key every
    published result. A method succeeds only if its solver converged and the
    extracted top-k support equals the true one; non-converged solves count
    as failures and stay visible through the status field.
    """
    check_count(trial_index, "trial_index")
    for attempt in range(_MAX_ATTEMPTS):
        seed = mix_seed(cfg.base_seed, cfg.m, cfg.k, trial_index, attempt)
        rng = np.random.default_rng(seed)
        signal = generate_sparse_signal(cfg.n, cfg.k, cfg.mode, rng)
        if cfg.fixed_phi:
            phi_rng = np.random.default_rng(
                mix_seed(cfg.base_seed, cfg.m, cfg.k, _FIXED_PHI_TAG))
            phi = generate_sensing_matrix(cfg.m, cfg.n, cfg.mode, phi_rng)
        else:
            phi = generate_sensing_matrix(cfg.m, cfg.n, cfg.mode, rng)
        v = sample_corruption(cfg.m, cfg.corruption_mean,
                              cfg.corruption_variance, rng)
        y, a = measure(phi, Dictionary.identity(cfg.n), signal)
        try:
            measurements = build_measurement_set(y, v)
        except UndefinedPhaseError:
            continue
        break
    else:
        raise RuntimeError(
            f"could not draw a nondegenerate instance in {_MAX_ATTEMPTS} attempts")

    truth = Support(signal.true_support, cfg.n)
    success = {}
    status = {}
    iterations = {}
    estimates = {} if keep_estimates else None
    for method in cfg.methods:
        report = run_method(method, a, measurements, cfg.solver)
        status[method] = report.status
        iterations[method] = report.iterations
        guess = extract_support(report.solution, cfg.k)
        success[method] = (report.status is SolveStatus.CONVERGED
                           and supports_equal(guess, truth))
        if keep_estimates:
            estimates[method] = report.solution
    return TrialResult(seed=seed, success=success, status=status,
                       iterations=iterations,
                       signal=signal if keep_estimates else None,
                       estimates=estimates)


def _wilson_estimate(count: int, trials: int) -> SpsrEstimate:
    rate = count / trials
    z2 = _WILSON_Z * _WILSON_Z
    denom = 1.0 + z2 / trials
    halfwidth = (_WILSON_Z / denom) * math.sqrt(
        rate * (1.0 - rate) / trials + z2 / (4.0 * trials * trials))
    return SpsrEstimate(rate=rate, halfwidth=halfwidth,
                        successes=count, trials=trials)


def compute_spsr(successes) -> SpsrEstimate:
    """Success rate with a Wilson score 95% interval half-width."""
    successes = list(successes)
    if not successes:
        raise ValueError("successes must be nonempty")
    return _wilson_estimate(sum(bool(s) for s in successes), len(successes))


def _trial_successes(cfg: TrialConfig, trial_index: int):
    """Worker payload: success and convergence flags in method order."""
    result = run_trial(cfg, trial_index)
    return (tuple(result.success[m] for m in cfg.methods),
            tuple(result.status[m] is not SolveStatus.CONVERGED
                  for m in cfg.methods))


def _run_point(cfg: TrialConfig, trials: int, jobs: int, executor):
    """All trials for one grid point; summed counts are order-invariant."""
    succ = [0] * len(cfg.methods)
    fail = [0] * len(cfg.methods)
    if executor is None:
        outcomes = (_trial_successes(cfg, i) for i in range(trials))
    else:
        chunk = max(1, trials // (jobs * 4))
        outcomes = executor.map(_PointWorker(cfg), range(trials), chunksize=chunk)
    for success_row, failure_row in outcomes:
        for i, flag in enumerate(success_row):
            succ[i] += bool(flag)
        for i, flag in enumerate(failure_row):
            fail[i] += bool(flag)
    return succ, fail


class _PointWorker:
    """Picklable callable so process pools can run trials by index."""

    def __init__(self, cfg: TrialConfig):
        self.cfg = cfg

    def __call__(self, trial_index: int):
        return _trial_successes(self.cfg, trial_index)


def _sweep(cfg: TrialConfig, axis: str, values, trials: int, jobs: int) -> SweepResult:
    values = tuple(int(v) for v in values)
    if not values:
        raise ValueError("sweep grid must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"sweep grid must be strictly increasing, got {values}")
    check_count(trials, "trials", minimum=1)
    check_count(jobs, "jobs", minimum=1)

    configs = [replace(cfg, **{axis: value}) for value in values]

    per_point = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            for point_cfg in configs:
                per_point.append(_run_point(point_cfg, trials, jobs, executor))
    else:
        for point_cfg in configs:
            per_point.append(_run_point(point_cfg, trials, jobs, None))

    spsr = {m: [] for m in cfg.methods}
    halfwidth = {m: [] for m in cfg.methods}
    successes = {m: [] for m in cfg.methods}
    failures = {m: [] for m in cfg.methods}
    for succ, fail in per_point:
        for i, method in enumerate(cfg.methods):
            est = _wilson_estimate(succ[i], trials)
            spsr[method].append(est.rate)
            halfwidth[method].append(est.halfwidth)
            successes[method].append(succ[i])
            failures[method].append(fail[i])
    return SweepResult(
        axis=axis,
        grid=values,
        trials_per_point=trials,
        spsr={m: tuple(v) for m, v in spsr.items()},
        halfwidth={m: tuple(v) for m, v in halfwidth.items()},
        successes={m: tuple(v) for m, v in successes.items()},
        solver_failures={m: tuple(v) for m, v in failures.items()},
        seeds=tuple(c.point_seed_root() for c in configs),
        config=cfg,
    )


def sweep_k(cfg: TrialConfig, k_values, trials: int, jobs: int = 1) -> SweepResult:
    """Success probabilities over a sparsity grid at fixed measurement count."""
    k_values = tuple(int(v) for v in k_values)
    for k in k_values:
        if not 1 <= k <= cfg.n:
            raise ValueError(f"every k must lie in [1, {cfg.n}], got {k}")
    return _sweep(cfg, "k", k_values, trials, jobs)


def sweep_m(cfg: TrialConfig, m_values, trials: int, jobs: int = 1) -> SweepResult:
    """Success probabilities over a measurement-count grid at fixed sparsity."""
    m_values = tuple(int(v) for v in m_values)
    for m in m_values:
        if m < 1:
            raise ValueError(f"every m must be at least 1, got {m}")
    return _sweep(cfg, "m", m_values, trials, jobs)
