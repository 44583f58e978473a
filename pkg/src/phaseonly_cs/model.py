"""Sparse signal model: signals, sensing matrices, corruption, amplitude/phase split.

Conventions used throughout the package:

* ``mode="real"`` keeps every array float64 and phases are signs in {-1, +1};
  ``mode="complex"`` uses complex128 and phases are unit-modulus complex numbers.
* Standard complex normal draws have independent N(0, 1/2) real and imaginary
  parts, so the total variance per entry is 1 in both modes.
* Supports are 0-indexed, sorted, duplicate-free.

All container types freeze their arrays after construction (writeable=False),
so instances are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .validation import (
    PHASE_FLOOR,
    UndefinedPhaseError,
    check_count,
    check_matrix,
    check_mode,
    check_positive,
    check_rng,
    check_vector,
)

_ORTHONORMAL_TOL = 1e-10


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SparseSignal:
    """A length-n coefficient vector with exactly k nonzero entries.

    ``coefficients`` is float64 in real mode and complex128 in complex mode
    (in real mode the imaginary parts of the modelled complex signal are all
    zero, so they are simply not stored).
    """

    coefficients: np.ndarray
    true_support: tuple[int, ...]
    mode: str

    def __post_init__(self):
        check_mode(self.mode)
        coeff = check_vector(self.coefficients, "coefficients")
        support = tuple(int(i) for i in self.true_support)
        n = coeff.shape[0]
        if sorted(set(support)) != list(support):
            raise ValueError("true_support must be sorted and duplicate-free")
        if support and (support[0] < 0 or support[-1] >= n):
            raise ValueError("true_support indices out of range")
        nonzero = tuple(int(i) for i in np.flatnonzero(coeff))
        if nonzero != support:
            raise ValueError("nonzero index set does not match true_support")
        object.__setattr__(self, "coefficients", _freeze(coeff))
        object.__setattr__(self, "true_support", support)

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    @property
    def k(self) -> int:
        return len(self.true_support)


@dataclass(frozen=True)
class Dictionary:
    """An n-by-n orthonormal basis. Columns are checked to 1e-10 at construction."""

    matrix: np.ndarray
    is_identity: bool = False

    def __post_init__(self):
        mat = check_matrix(self.matrix, "dictionary")
        n = mat.shape[0]
        if mat.shape[1] != n:
            raise ValueError(f"dictionary must be square, got {mat.shape}")
        gram_dev = np.abs(mat.conj().T @ mat - np.eye(n)).max() if n else 0.0
        if gram_dev > _ORTHONORMAL_TOL:
            raise ValueError(
                f"dictionary columns are not orthonormal (max deviation {gram_dev:.3g})"
            )
        object.__setattr__(self, "matrix", _freeze(mat))

    @classmethod
    def identity(cls, n: int) -> "Dictionary":
        return cls(np.eye(check_count(n, "n", minimum=1)), is_identity=True)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SensingMatrix:
    """An m-by-n random measurement matrix plus a record of how it was drawn."""

    matrix: np.ndarray
    mode: str
    provenance: str = "unknown"

    def __post_init__(self):
        check_mode(self.mode)
        mat = check_matrix(self.matrix, "sensing matrix")
        if mat.shape[0] < 1 or mat.shape[1] < 1:
            raise ValueError(f"sensing matrix must be at least 1x1, got {mat.shape}")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class MeasurementSet:
    """Clean measurements y, corruption v, corrupted z, and their polar parts.

    The corrupted phases ``z_p`` are set equal to ``y_p`` at construction:
    a strictly positive corruption cannot move any phase, so this holds
    exactly, not just to rounding. The redundant amplitude ``z_a`` is kept
    for completeness and is only consumed by reconstruction checks.
    """

    y: np.ndarray
    v: np.ndarray
    z: np.ndarray
    y_a: np.ndarray = field(repr=False)
    y_p: np.ndarray = field(repr=False)
    z_a: np.ndarray = field(repr=False)
    z_p: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("y", "v", "z", "y_a", "y_p", "z_a", "z_p"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name))))

    @property
    def m(self) -> int:
        return self.y.shape[0]


def generate_sparse_signal(n, k, mode, rng) -> SparseSignal:
    """Draw a k-sparse signal with a uniformly random support.

    Nonzero values are i.i.d. standard normal (real mode) or standard complex
    normal (complex mode). Deterministic given the rng seed: the support is
    drawn first (choice without replacement), then the real parts, then the
    imaginary parts in complex mode.
    """
    n = check_count(n, "n", minimum=1)
    k = check_count(k, "k", minimum=0)
    check_mode(mode)
    rng = check_rng(rng)
    if k > n:
        raise ValueError(f"k must be <= n, got k={k}, n={n}")
    idx = rng.choice(n, size=k, replace=False)
    if mode == "real":
        values = rng.standard_normal(k)
        coeff = np.zeros(n)
    else:
        re = rng.standard_normal(k)
        im = rng.standard_normal(k)
        values = (re + 1j * im) * math.sqrt(0.5)
        coeff = np.zeros(n, dtype=np.complex128)
    coeff[idx] = values
    return SparseSignal(coeff, tuple(sorted(int(i) for i in idx)), mode)


def generate_sensing_matrix(m, n, mode, rng, provenance: str = "external-rng") -> SensingMatrix:
    """Draw an m-by-n matrix with i.i.d. standard (complex) normal entries."""
    m = check_count(m, "m", minimum=1)
    n = check_count(n, "n", minimum=1)
    check_mode(mode)
    rng = check_rng(rng)
    if mode == "real":
        mat = rng.standard_normal((m, n))
    else:
        mat = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) * math.sqrt(0.5)
    return SensingMatrix(mat, mode, provenance)


def measure(phi: SensingMatrix, psi: Dictionary, x: SparseSignal):
    """Apply the sensing pipeline: returns ``(y, a)`` with ``a = phi @ psi``
    and ``y = a @ x.coefficients``.

    The composed matrix ``a`` is what the recovery programs constrain against,
    so it is returned alongside the measurements.
    """
    if psi.n != x.n:
        raise ValueError(f"dictionary is {psi.n}x{psi.n} but signal has length {x.n}")
    if phi.n != psi.n:
        raise ValueError(f"sensing matrix has {phi.n} columns but dictionary is {psi.n}x{psi.n}")
    a = phi.matrix if psi.is_identity else phi.matrix @ psi.matrix
    y = a @ x.coefficients
    return y, a


def split(w):
    """Split a vector into amplitudes and unit-modulus phases.

    Returns ``(amplitudes, phases)`` with ``amplitudes[i] = |w[i]|`` and
    ``phases[i] = w[i] / |w[i]|``. In real mode the phases are exact signs.

    Raises
    ------
    UndefinedPhaseError
        If any entry is (numerically) zero; carries the offending index.
    """
    w = check_vector(w, "w")
    amplitudes = np.abs(w)
    tiny = amplitudes < PHASE_FLOOR
    if tiny.any():
        raise UndefinedPhaseError(int(np.flatnonzero(tiny)[0]))
    return amplitudes, w / amplitudes


def sample_corruption(m, mean=1.0, variance=0.5, rng=None, allow_sign_flips=False):
    """Draw the amplitude corruption vector v.

    Entries are i.i.d. N(mean, variance) truncated to (0, inf) by rejection
    sampling, so the corrupted measurements provably keep the clean phases.
    With ``allow_sign_flips=True`` the truncation is skipped (robustness
    studies only); zeros are still rejected.
    """
    m = check_count(m, "m", minimum=1)
    mean = float(mean)
    sd = math.sqrt(check_positive(variance, "variance"))
    rng = check_rng(rng)
    v = rng.normal(mean, sd, size=m)
    bad = (v == 0.0) if allow_sign_flips else (v <= 0.0)
    while bad.any():
        v[bad] = rng.normal(mean, sd, size=int(bad.sum()))
        bad = (v == 0.0) if allow_sign_flips else (v <= 0.0)
    return v


def corrupt(y, v):
    """Entrywise amplitude corruption ``z[i] = v[i] * y[i]``.

    ``v`` must be strictly positive; a nonpositive entry would flip the phase
    and is rejected.
    """
    y = check_vector(y, "y")
    v = check_vector(v, "v", length=y.shape[0])
    if np.iscomplexobj(v):
        raise ValueError("v must be a real vector")
    if (v <= 0).any():
        worst = int(np.flatnonzero(v <= 0)[0])
        raise ValueError(f"v must be strictly positive, got v[{worst}] = {v[worst]:.6g}")
    return v * y


def build_measurement_set(y, v) -> MeasurementSet:
    """Assemble a MeasurementSet from clean measurements and a corruption vector.

    ``z_p`` is assigned from ``y_p`` directly (positive corruption leaves
    phases untouched), which makes every phase-only consumer downstream see
    bit-identical inputs no matter how the amplitudes were scaled.
    """
    z = corrupt(y, v)
    y_a, y_p = split(y)
    return MeasurementSet(y=y, v=np.asarray(v, dtype=np.float64), z=z,
                          y_a=y_a, y_p=y_p, z_a=np.abs(z), z_p=y_p)


def estimate_rip_deviation(phi: SensingMatrix, k, trials, rng):
    """Monte Carlo lower bound on the order-k restricted isometry deviation.

    Samples random unit-norm k-sparse vectors u and returns the largest
    observed ``| ||phi @ u||^2 - ||u||^2 | / ||u||^2``. The ratio form keeps
    the estimate exactly zero for an exact isometry instead of leaving
    normalization round-off behind. Diagnostic only; never used by the
    recovery programs.
    """
    k = check_count(k, "k", minimum=1)
    trials = check_count(trials, "trials", minimum=1)
    rng = check_rng(rng)
    if k > phi.n:
        raise ValueError(f"k must be <= n, got k={k}, n={phi.n}")
    mat = phi.matrix
    probe = np.zeros(phi.n, dtype=mat.dtype)
    worst = 0.0
    for _ in range(trials):
        idx = rng.choice(phi.n, size=k, replace=False)
        if phi.mode == "real":
            u = rng.standard_normal(k)
        else:
            u = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * math.sqrt(0.5)
        probe[:] = 0.0
        probe[idx] = u / np.linalg.norm(u)
        ref = float(np.linalg.norm(probe) ** 2)
        dev = abs(float(np.linalg.norm(mat @ probe) ** 2) - ref) / ref
        worst = max(worst, dev)
    return worst


def exact_rip_deviation(phi: SensingMatrix, k):
    """Exact order-k isometry deviation by exhausting all C(n, k) supports.

    Returns ``max_S max(|lambda_max(G_S) - 1|, |1 - lambda_min(G_S)|)`` over
    the Gram submatrices ``G_S = phi_S^H phi_S``. Only viable for small n.
    """
    k = check_count(k, "k", minimum=1)
    if k > phi.n:
        raise ValueError(f"k must be <= n, got k={k}, n={phi.n}")
    gram = phi.matrix.conj().T @ phi.matrix
    worst = 0.0
    for support in combinations(range(phi.n), k):
        sub = gram[np.ix_(support, support)]
        eigs = np.linalg.eigvalsh(sub)
        worst = max(worst, abs(float(eigs[-1]) - 1.0), abs(1.0 - float(eigs[0])))
    return worst
