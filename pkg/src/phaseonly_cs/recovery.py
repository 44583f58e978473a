"""The three support-recovery programs and support bookkeeping.

``solve_sbp`` consumes the full corrupted measurements; ``solve_pobp`` and
``solve_possr`` consume only the unit-modulus phase vector, so their output
is unchanged by any positive rescaling of the measurement amplitudes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .admm import SolveReport, SolverOptions, solve_equality_l1, solve_inequality_l1
from .validation import check_count, check_matrix, check_unit_modulus, check_vector


class MethodId(str, enum.Enum):
    SBP = "sbp"
    POBP = "pobp"
    POSSR = "possr"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Support:
    """A sorted set of coefficient indices inside an ambient dimension n."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if list(idx) != sorted(set(idx)):
            raise ValueError("support indices must be sorted and duplicate-free")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise ValueError(f"support indices must lie in [0, {self.n})")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "n", int(self.n))

    def __len__(self) -> int:
        return len(self.indices)


def extract_support(x, k) -> Support:
    """Indices of the k largest-modulus entries, ties broken to the lower index."""
    x = check_vector(x, "x")
    k = check_count(k, "k", minimum=0)
    if k > x.shape[0]:
        raise ValueError(f"k must be <= len(x), got k={k}, len={x.shape[0]}")
    # stable sort on descending modulus keeps equal-modulus entries in
    # ascending index order, which implements the tie rule directly
    order = np.argsort(-np.abs(x), kind="stable")
    return Support(tuple(sorted(int(i) for i in order[:k])), x.shape[0])


def supports_equal(s1: Support, s2: Support) -> bool:
    """Exact set equality of two supports over the same ambient dimension."""
    if s1.n != s2.n:
        raise ValueError(f"ambient dimensions differ: {s1.n} vs {s2.n}")
    return s1.indices == s2.indices


def solve_sbp(a, z, opts: SolverOptions | None = None) -> SolveReport:
    """Standard basis pursuit on the full (corrupted) measurements.

    ``min ||x||_1 s.t. a x = z``. This is the baseline that mismatches
    amplitude-corrupted data: the equality constraint forces the estimate to
    explain the corrupted amplitudes exactly.
    """
    a = check_matrix(a, "a")
    z = check_vector(z, "z", length=a.shape[0])
    return solve_equality_l1(a, z, opts)


def solve_pobp(a, z_p, opts: SolverOptions | None = None) -> SolveReport:
    """Basis pursuit fed the unit-modulus phase vector as if it were data.

    ``min ||x||_1 s.t. a x = z_p``. Requires ``|z_p[i]| = 1`` for all i.
    """
    a = check_matrix(a, "a")
    z_p = check_unit_modulus(z_p, "z_p")
    if z_p.shape[0] != a.shape[0]:
        raise ValueError(f"z_p must have length {a.shape[0]}, got {z_p.shape[0]}")
    return solve_equality_l1(a, z_p, opts)


def solve_possr(a, z_p, opts: SolverOptions | None = None) -> SolveReport:
    """Phase-only support recovery via the one-sided amplitude constraint.

    Rotates each measurement row by the conjugate phase, then solves
    ``min ||x||_1 s.t. Re(diag(conj(z_p)) a x) >= 1`` (imaginary parts pinned
    to zero under ``opts.strict_imag``). The solution is defined up to
    positive scale, so the reported vector is normalized to unit peak
    modulus; support extraction is unaffected.
    """
    a = check_matrix(a, "a")
    z_p = check_unit_modulus(z_p, "z_p")
    if z_p.shape[0] != a.shape[0]:
        raise ValueError(f"z_p must have length {a.shape[0]}, got {z_p.shape[0]}")
    c = np.conj(z_p)[:, None] * a
    report = solve_inequality_l1(c, opts)
    peak = float(np.max(np.abs(report.solution), initial=0.0))
    if peak > 0.0:
        scaled = report.solution / peak
        report = SolveReport(solution=scaled, iterations=report.iterations,
                             primal_residual=report.primal_residual,
                             dual_residual=report.dual_residual,
                             status=report.status,
                             objective=report.objective / peak,
                             history=report.history)
    return report


_SOLVERS = {
    MethodId.SBP: solve_sbp,
    MethodId.POBP: solve_pobp,
    MethodId.POSSR: solve_possr,
}


def run_method(method: MethodId, a, measurements: "object",
               opts: SolverOptions | None = None) -> SolveReport:
    """Dispatch one method against a MeasurementSet-like object.

    SBP reads the corrupted measurements ``z``; the phase-only methods read
    ``z_p`` and never see an amplitude.
    """
    method = MethodId(method)
    if method is MethodId.SBP:
        return solve_sbp(a, measurements.z, opts)
    if method is MethodId.POBP:
        return solve_pobp(a, measurements.z_p, opts)
    return solve_possr(a, measurements.z_p, opts)
