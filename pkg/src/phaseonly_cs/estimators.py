"""Scikit-learn style front ends for the three recovery methods.

Each estimator wraps one functional solver from :mod:`.recovery` behind the
familiar ``fit(X, y)`` protocol: ``X`` is the M-by-N measurement operator and
``y`` the measurement vector. After fitting, ``coef_`` holds the recovered
coefficients, ``support_`` the recovered index set and ``report_`` the full
solver diagnostics. Constructor parameters map one-to-one onto
:class:`~.admm.SolverOptions` fields so they show up in ``get_params`` and can
be grid-searched like any other hyperparameter.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .admm import SolveStatus, SolverOptions
from .model import split
from .recovery import extract_support, solve_pobp, solve_possr, solve_sbp
from .validation import check_matrix, check_vector

#: Relative magnitude below which a fitted coefficient does not count as
#: support when no explicit sparsity level was requested.
SUPPORT_RTOL = 1e-6


class _RecoveryEstimator(BaseEstimator):
    """Shared plumbing: parameter handling, fitting, support extraction."""

    def __init__(self, sparsity=None, rho=1.0, eps_abs=1e-6, eps_rel=1e-4,
                 max_iter=10000, adapt_rho=False, relax=1.0):
        self.sparsity = sparsity
        self.rho = rho
        self.eps_abs = eps_abs
        self.eps_rel = eps_rel
        self.max_iter = max_iter
        self.adapt_rho = adapt_rho
        self.relax = relax

    def _solver_options(self):
        return SolverOptions(rho=self.rho, eps_abs=self.eps_abs,
                             eps_rel=self.eps_rel, max_iter=self.max_iter,
                             adapt_rho=self.adapt_rho, relax=self.relax)

    def _measurements(self, y):
        """Hook: subclasses turn the raw measurement vector into solver input."""
        return y

    def _solve(self, a, y, opts):
        raise NotImplementedError

    def fit(self, X, y):
        """Recover coefficients from the operator ``X`` and measurements ``y``."""
        a = check_matrix(X, "X")
        y = check_vector(y, "y", length=a.shape[0])
        if self.sparsity is not None:
            sparsity = int(self.sparsity)
            if not 0 <= sparsity <= a.shape[1]:
                raise ValueError(
                    f"sparsity must lie in [0, {a.shape[1]}], got {sparsity}")
        report = self._solve(a, self._measurements(y), self._solver_options())
        self.report_ = report
        self.coef_ = report.solution
        self.n_iter_ = report.iterations
        self.converged_ = report.status is SolveStatus.CONVERGED
        if self.sparsity is not None:
            self.support_ = np.asarray(
                extract_support(report.solution, int(self.sparsity)).indices,
                dtype=np.intp)
        else:
            mags = np.abs(report.solution)
            floor = SUPPORT_RTOL * float(mags.max(initial=0.0))
            self.support_ = np.flatnonzero(mags > floor)
        return self

    def predict(self, X):
        """Measurements the fitted coefficients would produce under ``X``."""
        if not hasattr(self, "coef_"):
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet")
        a = check_matrix(X, "X", shape=(None, self.coef_.shape[0]))
        return a @ self.coef_


class StandardBasisPursuit(_RecoveryEstimator):
    """L1-minimal coefficients consistent with the full measurements.

    The baseline: ``min ||x||_1 s.t. y = X x``. Fitting corrupted
    measurements hands the corruption straight to the constraint, which is
    exactly the failure mode the phase-only estimators avoid.
    """

    def _solve(self, a, y, opts):
        return solve_sbp(a, y, opts)


class PhaseOnlyBasisPursuit(_RecoveryEstimator):
    """Basis pursuit against the phases of the measurements.

    ``y`` may be the raw (possibly amplitude-corrupted) measurement vector;
    its unit-modulus phases are extracted internally and equality-matched,
    so any positive amplitude corruption is discarded along with the
    legitimate amplitudes.
    """

    def _measurements(self, y):
        return split(y)[1]

    def _solve(self, a, y, opts):
        return solve_pobp(a, y, opts)


class PhaseOnlySupportRecovery(_RecoveryEstimator):
    """One-sided phase-consistency recovery.

    Rotates each measurement row by the conjugate phase and requires the
    result to be at least one, so only the phases of ``y`` matter and the
    recovered coefficients carry an arbitrary positive scale. ``strict_imag``
    additionally pins the rotated imaginary parts to zero on complex data.
    """

    def __init__(self, sparsity=None, rho=1.0, eps_abs=1e-6, eps_rel=1e-4,
                 max_iter=10000, adapt_rho=False, relax=1.0, strict_imag=True):
        super().__init__(sparsity=sparsity, rho=rho, eps_abs=eps_abs,
                         eps_rel=eps_rel, max_iter=max_iter,
                         adapt_rho=adapt_rho, relax=relax)
        self.strict_imag = strict_imag

    def _solver_options(self):
        return SolverOptions(rho=self.rho, eps_abs=self.eps_abs,
                             eps_rel=self.eps_rel, max_iter=self.max_iter,
                             strict_imag=self.strict_imag,
                             adapt_rho=self.adapt_rho, relax=self.relax)

    def _measurements(self, y):
        return split(y)[1]

    def _solve(self, a, y, opts):
        return solve_possr(a, y, opts)
