"""Input validation helpers shared across the package.

All user-facing entry points funnel their array arguments through these
checks so that shape/dtype problems surface as clear ``ValueError``s
instead of numpy broadcasting surprises deep inside a solver.
"""

from __future__ import annotations

import numbers

import numpy as np

MODES = ("real", "complex")

#: Magnitudes below this are treated as an exact zero when extracting a phase.
PHASE_FLOOR = 1e-300


class UndefinedPhaseError(ValueError):
    """A measurement entry is (numerically) zero, so its phase is undefined.

    Attributes
    ----------
    index : int
        Position of the first offending entry.
    """

    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"phase undefined: entry {self.index} is zero")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def check_rng(rng) -> np.random.Generator:
    """Coerce an int seed or Generator into a ``numpy.random.Generator``."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, numbers.Integral):
        return np.random.default_rng(int(rng))
    raise ValueError(f"rng must be an integer seed or numpy Generator, got {type(rng).__name__}")


def check_vector(w, name: str = "vector", length: int | None = None) -> np.ndarray:
    """Return ``w`` as a 1-D float64 or complex128 array with finite entries."""
    arr = np.asarray(w)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {arr.shape[0]}")
    return arr


def check_matrix(a, name: str = "matrix", shape: tuple[int, int] | None = None) -> np.ndarray:
    """Return ``a`` as a 2-D float64 or complex128 array with finite entries.

    ``shape`` entries set to ``None`` act as wildcards.
    """
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if shape is not None:
        for got, want in zip(arr.shape, shape):
            if want is not None and got != want:
                raise ValueError(
                    f"{name} must have shape {tuple(shape)}, got {arr.shape}")
    return arr


def check_unit_modulus(w, name: str = "phases", tol: float = 1e-6) -> np.ndarray:
    """Validate that every entry of ``w`` has modulus 1 within ``tol``."""
    arr = check_vector(w, name)
    dev = np.abs(np.abs(arr) - 1.0)
    if dev.size and dev.max() > tol:
        worst = int(np.argmax(dev))
        raise ValueError(
            f"{name} must be unit-modulus: |{name}[{worst}]| = {np.abs(arr[worst]):.6g}"
        )
    return arr


def check_count(value, name: str, minimum: int = 0) -> int:
    if not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_positive(value, name: str) -> float:
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value
