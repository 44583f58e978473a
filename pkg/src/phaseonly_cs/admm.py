"""First-order solvers for the two L1 programs the recovery methods need.

Both solvers are ADMM schemes over dense matrices:

* :func:`solve_equality_l1` -- ``min ||x||_1  s.t.  a @ x = b``.
  The x-update is an exact projection onto the affine constraint set (cached
  factorization of ``a a^H``), the z-update is a soft threshold, and the dual
  update is the standard scaled step.
* :func:`solve_inequality_l1` -- ``min ||x||_1  s.t.  Re(c @ x) >= 1``
  entrywise (plus ``Im(c @ x) = 0`` when ``strict_imag``). Slack splitting:
  the x-update solves the cached normal equations ``(I + c^H c) x = rhs``, the
  slack update clamps at the unit bound.

Everything is dtype-generic: pass real arrays to work entirely in float64,
complex arrays to work in complex128. The complex L1 norm (sum of moduli)
corresponds to a sum of 2-entry group norms under the real embedding provided
by :func:`embed_complex`; the shrinkage formula below is the same group
shrinkage expressed in complex arithmetic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .validation import check_matrix, check_vector

#: Absolute feasibility tolerance enforced before a solve may report converged.
FEAS_TOL = 1e-5

# Infeasibility is flagged when the primal residual has stalled above this
# multiple of its convergence threshold for several consecutive windows.
_STALL_WINDOW = 250
_STALL_RTOL = 1e-3
_STALL_FLOOR_FACTOR = 100.0
_STALL_STRIKES = 3

# Real instances are linear programs, and plain ADMM crawls through their
# tail (the dual residual decays sublinearly near a vertex). Every
# _POLISH_EVERY iterations we therefore try to jump straight to the vertex
# the iterates point at and accept it only with a full primal-dual
# certificate: feasibility within _POLISH_FEAS, dual feasibility and
# complementary slackness within _POLISH_CERT. Rows within _POLISH_NEAR of
# the bound count as active-set candidates even if the slack projection has
# not clamped them yet. A failed certificate names the offending row or
# column, so up to _POLISH_TRIES pivoted variants of the guess are examined
# per attempt before giving the iteration another window.
_POLISH_EVERY = 50
_POLISH_FEAS = 1e-9
_POLISH_CERT = 1e-8
_POLISH_NEAR = 1e-7
_POLISH_TRIES = 8

# Late lopsided stalls (one residual converged, the other stuck) are escaped
# by switching residual balancing on mid-run, whatever ``adapt_rho`` says.
_RESCUE_AFTER = 2000

# Sweep budget for the cyclic-projection dual search used by the equality
# certificate when the support is smaller than m (underdetermined dual).
_DUAL_SWEEPS = 500


def _rescue_due(r_norm, eps_pri, s_norm, eps_dual):
    """One residual is done while the other refuses to follow."""
    return ((r_norm <= 10.0 * eps_pri and s_norm >= 10.0 * eps_dual)
            or (s_norm <= 0.1 * eps_dual and r_norm > eps_pri))


class SolveStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER_REACHED = "max_iter_reached"
    INFEASIBLE_DETECTED = "infeasible_detected"

    def __str__(self) -> str:  # keep CSV/manifest output plain
        return self.value


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the ADMM solvers.

    ``rho`` is the penalty parameter; ``eps_abs``/``eps_rel`` feed the usual
    residual stopping rule; ``strict_imag`` selects the strict reading of the
    one-sided constraint (imaginary parts pinned to zero) and only affects
    :func:`solve_inequality_l1` on complex data. ``adapt_rho`` enables
    residual balancing (factor-2 updates when the primal/dual residual ratio
    exceeds 10); it is off by default so runs are exactly reproducible from
    the documented defaults. ``relax`` is the usual over-relaxation factor
    (1.0 disables it).
    """

    rho: float = 1.0
    eps_abs: float = 1e-6
    eps_rel: float = 1e-4
    max_iter: int = 10000
    strict_imag: bool = True
    adapt_rho: bool = False
    relax: float = 1.0

    def __post_init__(self):
        if self.rho <= 0 or self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("rho, eps_abs and eps_rel must all be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 1.0 <= self.relax < 2.0:
            raise ValueError("relax must lie in [1, 2)")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve: the iterate plus termination diagnostics."""

    solution: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    status: SolveStatus
    objective: float
    history: dict | None = field(default=None, repr=False, compare=False)


def l1_objective(x) -> float:
    """Sum of entry moduli (the complex L1 norm)."""
    return float(np.sum(np.abs(x)))


def soft_threshold(w, kappa):
    """Entrywise shrinkage: each entry's modulus shrinks by ``kappa``.

    For real input this is ``sign(w) * max(|w| - kappa, 0)``; for complex
    input the modulus shrinks while the phase is kept, which is the proximal
    operator of the complex L1 norm.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    w = np.asarray(w)
    mag = np.abs(w)
    shrunk = np.maximum(mag - kappa, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(mag > 0, w * (shrunk / np.where(mag > 0, mag, 1.0)), 0.0)
    if not np.iscomplexobj(w):
        out = out.real
    return out


def group_soft_threshold(w, kappa):
    """Shrink the Euclidean norm of a coordinate group by ``kappa``.

    Returns ``w * max(1 - kappa / ||w||_2, 0)`` with the zero vector returned
    at ``||w||_2 = 0``. Applied to the 2-entry (Re, Im) pairs of the real
    embedding this coincides with complex :func:`soft_threshold`.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    w = np.asarray(w, dtype=np.float64)
    nrm = float(np.linalg.norm(w))
    if nrm <= kappa:
        return np.zeros_like(w)
    return w * (1.0 - kappa / nrm)


def embed_complex(a) -> np.ndarray:
    """Real embedding of a complex matrix with interleaved (Re, Im) pairs.

    Each entry ``p + qi`` becomes the 2x2 block ``[[p, -q], [q, p]]`` at rows
    ``(2i, 2i+1)`` and columns ``(2j, 2j+1)``, so complex matrix-vector
    products are reproduced exactly on interleaved coordinates and the
    complex L1 norm becomes a sum of 2-entry group norms.
    """
    a = np.atleast_2d(np.asarray(a))
    m, n = a.shape
    out = np.zeros((2 * m, 2 * n))
    out[0::2, 0::2] = a.real
    out[0::2, 1::2] = -a.imag
    out[1::2, 0::2] = a.imag
    out[1::2, 1::2] = a.real
    return out


def interleave(v) -> np.ndarray:
    """Complex vector -> real vector of interleaved (Re, Im) pairs."""
    v = np.atleast_1d(np.asarray(v))
    out = np.empty(2 * v.shape[0])
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def deinterleave(v) -> np.ndarray:
    """Inverse of :func:`interleave`."""
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if v.shape[0] % 2:
        raise ValueError("interleaved vector must have even length")
    return v[0::2] + 1j * v[1::2]


def _work_dtype(*arrays):
    return np.complex128 if any(np.iscomplexobj(a) for a in arrays) else np.float64


def _real_dim(n: int, dtype) -> int:
    return 2 * n if dtype == np.complex128 else n


def _factor_gram(gram: np.ndarray):
    """Cholesky with escalating jitter so rank-deficient inputs still factor."""
    scale = float(np.abs(np.diag(gram)).mean()) or 1.0
    jitter = 0.0
    for _ in range(6):
        try:
            return scipy.linalg.cho_factor(
                gram + jitter * np.eye(gram.shape[0], dtype=gram.dtype), lower=True
            )
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100.0, 1e-12 * scale)
    raise np.linalg.LinAlgError("gram matrix could not be factorized")


def _history_append(history, objective, best_objective, r_norm, s_norm):
    history["objective"].append(objective)
    history["best_objective"].append(best_objective)
    history["primal_residual"].append(r_norm)
    history["dual_residual"].append(s_norm)


def _largest_entries(z, indices, count):
    order = np.argsort(-np.abs(z[indices]), kind="stable")
    return np.sort(indices[order[:count]])


def _center_dual(a, a_sub, sgn, nu, support):
    """Search the affine dual set for a point inside the unit sup-norm ball.

    When the support is smaller than m the system ``a_sub^T nu = sgn`` is
    underdetermined, and the min-norm solution may stick out of the box even
    though a valid certificate exists. The free directions are the null
    space of ``a_sub^T``: first recenter by least squares along them, then
    -- with a single degree of freedom -- intersect the per-column interval
    conditions exactly and take the midpoint, or otherwise walk into the box
    by alternating projections between the affine set and the violated
    slabs. The caller re-verifies whatever comes back, so running out of
    sweeps merely fails the certificate.
    """
    ns = scipy.linalg.null_space(a_sub.T)
    if ns.shape[1] == 0:
        return nu
    free = np.setdiff1d(np.arange(a.shape[1]), support)
    h = a.T @ ns  # support rows vanish: a_sub^T ns = 0 by construction
    t, *_ = np.linalg.lstsq(h[free], -(a.T @ nu)[free], rcond=None)
    nu = nu + ns @ t
    if ns.shape[1] == 1:
        g = a.T @ nu
        lo, hi = -math.inf, math.inf
        for j in free:
            hj = float(h[j, 0])
            if abs(hj) < 1e-14:
                if abs(float(g[j])) > 1.0 + 0.5 * _POLISH_CERT:
                    return nu  # this column rules every dual out
                continue
            ends = sorted(((-1.0 - float(g[j])) / hj, (1.0 - float(g[j])) / hj))
            lo, hi = max(lo, ends[0]), min(hi, ends[1])
        if lo <= hi:
            nu = nu + 0.5 * (lo + hi) * ns[:, 0]
        return nu
    pinv = np.linalg.pinv(a_sub.T)
    col_norm2 = np.einsum("ij,ij->j", a, a)
    for _ in range(_DUAL_SWEEPS):
        g = a.T @ nu
        g[support] = 0.0  # the affine part pins these to +-1 already
        over = np.flatnonzero(np.abs(g) > 1.0 + 0.5 * _POLISH_CERT)
        if over.size == 0:
            break
        for j in over:
            tj = float(a[:, j] @ nu)
            excess = math.copysign(max(abs(tj) - 1.0, 0.0), tj)
            nu = nu - a[:, j] * (excess / col_norm2[j])
        nu = nu - pinv @ (a_sub.T @ nu - sgn)
    return nu


def _try_equality_vertex(a, b, support):
    """Exact-fit one support guess and certify it.

    Returns ``("ok", (x, gap))`` when a dual vector ``nu`` with
    ``||a^T nu||_inf <= 1`` and matching signs on the support closes the
    duality gap (optimality by weak duality). Otherwise a tagged hint for
    the repair queue: ``("infeas", grow_col)`` when the restricted fit
    cannot reach ``b`` (``grow_col`` is the column most correlated with the
    fit residual -- an optimal vertex may carry coordinates far too small
    for the iterates to surface, so growth must consider every column),
    ``("shrink", dead)`` when some fitted entries are exactly zero, or
    ``("box", (worst_col, drop))`` when the dual escapes the unit sup-norm
    ball at ``worst_col`` (``drop`` is the support entry with the smallest
    fitted magnitude, the natural swap partner).
    """
    a_sub = a[:, support]
    xs, *_ = np.linalg.lstsq(a_sub, b, rcond=None)
    feas_gap = float(np.linalg.norm(a_sub @ xs - b))
    if feas_gap > _POLISH_FEAS * (1.0 + float(np.linalg.norm(b))):
        corr = np.abs(a.T @ (b - a_sub @ xs))
        corr[support] = -1.0
        return "infeas", int(np.argmax(corr))
    sgn = np.sign(xs)
    if np.any(sgn == 0.0):
        return "shrink", support[np.flatnonzero(sgn == 0.0)]
    nu, *_ = np.linalg.lstsq(a_sub.T, sgn, rcond=None)
    if float(np.max(np.abs(a_sub.T @ nu - sgn))) > _POLISH_CERT:
        return "fail", None
    g = a.T @ nu
    if float(np.max(np.abs(g))) > 1.0 + _POLISH_CERT and support.size < a.shape[0]:
        nu = _center_dual(a, a_sub, sgn, nu, support)
        if float(np.max(np.abs(a_sub.T @ nu - sgn))) > _POLISH_CERT:
            return "fail", None
        g = a.T @ nu
    worst_col = int(np.argmax(np.abs(g)))
    if float(np.abs(g[worst_col])) > 1.0 + _POLISH_CERT:
        drop = int(support[np.argmin(np.abs(xs))])
        return "box", (worst_col, drop)
    obj = float(np.sum(np.abs(xs)))
    gap = abs(obj - float(b @ nu))
    if gap > _POLISH_CERT * max(1.0, obj):
        return "fail", None
    x = np.zeros(a.shape[1])
    x[support] = xs
    return "ok", (x, gap)


def _polish_equality(a, b, z):
    """Certified vertex jump for real ``min ||x||_1 s.t. a x = b``.

    The soft threshold zeroes entries of ``z`` exactly, so the support guess
    is free; :func:`_try_equality_vertex` does the certifying. Failed
    certificates feed a short queue of pivoted variants (grow on an
    infeasible fit, drop exact zeros, swap on a dual bound violation), so a
    support guess that is one entry off still gets repaired. Returns
    ``(x, gap)`` or ``None``.
    """
    support = np.flatnonzero(z != 0.0)
    m, n = a.shape
    if support.size == 0:
        return None
    if support.size > m:
        # a vertex has at most m nonzeros; keep the dominant entries
        support = _largest_entries(z, support, m)
    queue = [support]
    seen = set()
    tries = 0
    while queue and tries < _POLISH_TRIES:
        supp = queue.pop(0)
        key = supp.tobytes()
        if key in seen or supp.size == 0:
            continue
        seen.add(key)
        tries += 1
        tag, payload = _try_equality_vertex(a, b, supp)
        if tag == "ok":
            return payload
        if tag == "infeas" and supp.size < m:
            queue.append(np.sort(np.append(supp, payload)))
        elif tag == "shrink":
            queue.append(np.setdiff1d(supp, payload))
        elif tag == "box":
            worst_col, drop = payload
            if supp.size < m:
                queue.append(np.sort(np.append(supp, worst_col)))
            queue.append(np.sort(np.append(np.setdiff1d(supp, [drop]), worst_col)))
    return None


def _try_inequality_vertex(c, ct, support, active):
    """Solve the restricted system and certify it.

    Returns ``("ok", (x, gap))`` on a certified vertex, or a tagged hint for
    the repair queue: ``("infeas", (worst_row, drop_row))`` when the
    candidate violates a constraint (``drop_row`` is the active row whose
    unconstrained multiplier is most negative, a dual-simplex style swap
    suggestion), ``("box", (worst_col, near_row))`` when the dual leaves the
    unit sup-norm ball (``near_row`` is the inactive row closest to its
    bound), or ``("fail", None)`` with nothing to suggest.
    """
    c_sub = c[np.ix_(active, support)]
    xs, *_ = np.linalg.lstsq(c_sub, np.ones(active.size), rcond=None)
    x = np.zeros(c.shape[1])
    x[support] = xs
    cx = c @ x
    worst = int(np.argmin(cx))
    if 1.0 - float(cx[worst]) > _POLISH_FEAS:
        drop = None
        if active.size == support.size:
            lam_free, *_ = np.linalg.lstsq(c_sub.T, np.sign(xs), rcond=None)
            if lam_free.size and float(np.min(lam_free)) < 0.0:
                drop = int(active[np.argmin(lam_free)])
        return "infeas", (worst, drop)
    sgn = np.sign(xs)
    if np.any(sgn == 0.0):
        return "fail", None
    lam, resid = scipy.optimize.nnls(c_sub.T, sgn)
    if resid > _POLISH_CERT:
        return "fail", None
    g = ct[:, active] @ lam
    worst_col = int(np.argmax(np.abs(g)))
    if float(np.abs(g[worst_col])) > 1.0 + _POLISH_CERT:
        inactive = np.setdiff1d(np.arange(c.shape[0]), active, assume_unique=False)
        near_row = int(inactive[np.argmin(cx[inactive])]) if inactive.size else None
        return "box", (worst_col, near_row)
    obj = float(np.sum(np.abs(xs)))
    gap = abs(obj - float(np.sum(lam)))
    if gap > _POLISH_CERT * max(1.0, obj):
        return "fail", None
    return "ok", (x, gap)


def _polish_inequality(c, ct, z, w, cx):
    """Certified vertex jump for real ``min ||x||_1 s.t. c x >= 1``.

    Support comes from the exact zeros of ``z``, the active-set guess from
    the rows the slack projection clamped to 1 (widened by rows of ``cx``
    sitting within ``_POLISH_NEAR`` of the bound, which the projection may
    not have caught yet). A candidate is accepted only when
    :func:`_try_inequality_vertex` certifies it; failed certificates feed a
    short queue of pivoted variants. Returns ``(x, gap)`` or ``None``.
    """
    support = np.flatnonzero(z != 0.0)
    clamped = np.flatnonzero(w <= 1.0)
    if support.size == 0 or clamped.size == 0:
        return None
    queue = [(support, clamped)]
    if support.size > clamped.size:
        queue.append((_largest_entries(z, support, clamped.size), clamped))
    near = np.union1d(clamped, np.flatnonzero(cx.real <= 1.0 + _POLISH_NEAR))
    if near.size > clamped.size:
        queue.append((support, near))
    seen = set()
    tries = 0
    while queue and tries < _POLISH_TRIES:
        supp, act = queue.pop(0)
        key = (supp.tobytes(), act.tobytes())
        if key in seen or supp.size == 0 or act.size == 0:
            continue
        seen.add(key)
        tries += 1
        tag, payload = _try_inequality_vertex(c, ct, supp, act)
        if tag == "ok":
            return payload
        if tag == "infeas":
            worst, drop = payload
            queue.append((supp, np.union1d(act, [worst])))
            if drop is not None:
                swapped = np.union1d(np.setdiff1d(act, [drop]), [worst])
                queue.append((supp, swapped))
        elif tag == "box":
            worst_col, near_row = payload
            grown = np.union1d(supp, [worst_col])
            queue.append((grown, act))
            if near_row is not None:
                queue.append((grown, np.union1d(act, [near_row])))
    return None


def solve_equality_l1(a, b, opts: SolverOptions | None = None,
                      keep_history: bool = False) -> SolveReport:
    """Minimize ``||x||_1`` subject to ``a @ x = b``.

    The x-iterate is an exact projection onto the constraint set, so it stays
    feasible throughout and is what gets reported. When ``b`` is not
    (numerically) in the range of ``a`` the solve bails out immediately with
    ``infeasible_detected`` and the least-squares point as best effort.

    Real instances additionally attempt periodic certified vertex polishing;
    a polished exit reports the constraint gap as the primal residual and the
    duality gap as the dual residual. A solve with one residual long
    converged and the other stuck switches residual balancing on by itself;
    the rescue is deterministic, so reruns with identical inputs still
    produce identical output.
    """
    opts = opts or SolverOptions()
    a = check_matrix(a, "a")
    b = check_vector(b, "b", length=a.shape[0])
    m, n = a.shape
    dtype = _work_dtype(a, b)
    a = a.astype(dtype, copy=False)
    b = b.astype(dtype, copy=False)

    x_ls, *_ = np.linalg.lstsq(a, b, rcond=None)
    ls_gap = float(np.linalg.norm(a @ x_ls - b))
    b_scale = 1.0 + float(np.linalg.norm(b))
    if ls_gap > FEAS_TOL * b_scale:
        return SolveReport(solution=x_ls, iterations=0, primal_residual=ls_gap,
                           dual_residual=math.inf, status=SolveStatus.INFEASIBLE_DETECTED,
                           objective=l1_objective(x_ls))

    # projector onto {x : a x = b}:  x = v - proj @ (a v - b)
    factor = _factor_gram(a @ a.conj().T)
    proj = scipy.linalg.cho_solve(factor, a).conj().T

    rho = opts.rho
    x = x_ls
    z = x.copy()
    u = np.zeros(n, dtype=dtype)
    sqrt_d = math.sqrt(_real_dim(n, dtype))
    best_obj = l1_objective(x)
    best_x = x
    history = {"objective": [], "best_objective": [],
               "primal_residual": [], "dual_residual": []} if keep_history else None

    balance = opts.adapt_rho
    r_norm = s_norm = math.inf
    eps_pri = eps_dual = 0.0
    it = 0
    for it in range(1, opts.max_iter + 1):
        v = z - u
        x = v - proj @ (a @ v - b)
        if opts.relax > 1.0:
            x_mix = opts.relax * x + (1.0 - opts.relax) * z
        else:
            x_mix = x
        z_old = z
        z = soft_threshold(x_mix + u, 1.0 / rho)
        u = u + x_mix - z

        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(rho * np.linalg.norm(z - z_old))
        eps_pri = sqrt_d * opts.eps_abs + opts.eps_rel * max(
            float(np.linalg.norm(x)), float(np.linalg.norm(z)))
        eps_dual = sqrt_d * opts.eps_abs + opts.eps_rel * rho * float(np.linalg.norm(u))

        obj = l1_objective(x)
        if obj < best_obj:
            best_obj = obj
            best_x = x
        if history is not None:
            _history_append(history, obj, best_obj, r_norm, s_norm)

        converged = r_norm <= eps_pri and s_norm <= eps_dual
        if dtype == np.float64 and (converged or it % _POLISH_EVERY == 0):
            polished = _polish_equality(a, b, z)
            if polished is not None:
                xp, gap = polished
                return SolveReport(solution=xp, iterations=it,
                                   primal_residual=float(np.linalg.norm(a @ xp - b)),
                                   dual_residual=gap, status=SolveStatus.CONVERGED,
                                   objective=l1_objective(xp), history=history)
        if converged:
            return SolveReport(solution=x, iterations=it, primal_residual=r_norm,
                               dual_residual=s_norm, status=SolveStatus.CONVERGED,
                               objective=obj, history=history)

        if (not balance and it % _STALL_WINDOW == 0 and it >= _RESCUE_AFTER
                and _rescue_due(r_norm, eps_pri, s_norm, eps_dual)):
            balance = True
        if balance:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                u = u / 2.0
            elif s_norm > 10.0 * r_norm:
                rho /= 2.0
                u = u * 2.0

    return SolveReport(solution=best_x, iterations=it, primal_residual=r_norm,
                       dual_residual=s_norm, status=SolveStatus.MAX_ITER_REACHED,
                       objective=best_obj, history=history)


def _inequality_violation(cx, strict: bool) -> float:
    """Worst-case constraint violation of ``Re(cx) >= 1`` (+ ``Im = 0``)."""
    viol = float(np.max(1.0 - cx.real, initial=0.0))
    if strict and np.iscomplexobj(cx):
        viol = max(viol, float(np.max(np.abs(cx.imag), initial=0.0)))
    return max(viol, 0.0)


def _project_onesided(t, strict: bool):
    """Project onto {t : Re(t) >= 1 (and Im(t) = 0 when strict)}."""
    re = np.maximum(t.real, 1.0)
    if not np.iscomplexobj(t):
        return re
    if strict:
        return re.astype(np.complex128)
    return re + 1j * t.imag


def solve_inequality_l1(c, opts: SolverOptions | None = None,
                        keep_history: bool = False) -> SolveReport:
    """Minimize ``||x||_1`` subject to ``Re(c @ x) >= 1`` entrywise.

    With ``opts.strict_imag`` (the default) complex instances additionally
    enforce ``Im(c @ x) = 0``, which the phase-rotated measurement model
    satisfies exactly at the ground truth. The right-hand side is fixed to
    the all-ones vector; callers absorb any scaling into ``c``.

    A converged report guarantees the returned point violates no constraint
    by more than ``FEAS_TOL`` in absolute terms. Real instances additionally
    attempt periodic certified vertex polishing; a polished exit reports the
    constraint gap as the primal residual and the duality gap as the dual
    residual. A solve with one residual long converged and the other stuck
    switches residual balancing on by itself; the rescue is deterministic,
    so reruns with identical inputs still produce identical output.
    """
    opts = opts or SolverOptions()
    c = check_matrix(c, "c")
    m, n = c.shape
    dtype = _work_dtype(c)
    c = c.astype(dtype, copy=False)
    strict = opts.strict_imag and dtype == np.complex128

    ct = np.ascontiguousarray(c.conj().T)
    factor = _factor_gram(np.eye(n, dtype=dtype) + ct @ c)

    ones = np.ones(m, dtype=dtype)
    x, *_ = np.linalg.lstsq(c, ones, rcond=None)
    z = x.copy()
    w = _project_onesided(c @ x, strict)
    u_z = np.zeros(n, dtype=dtype)
    u_w = np.zeros(m, dtype=dtype)

    rho = opts.rho
    sqrt_d_pri = math.sqrt(_real_dim(n + m, dtype))
    sqrt_d_dual = math.sqrt(_real_dim(n, dtype))

    best_feas_obj = math.inf
    best_feas_x = None
    best_viol = math.inf
    best_viol_x = x
    history = {"objective": [], "best_objective": [],
               "primal_residual": [], "dual_residual": []} if keep_history else None

    stall_ref = math.inf
    strikes = 0
    balance = opts.adapt_rho
    r_norm = s_norm = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        rhs = (z - u_z) + ct @ (w - u_w)
        x = scipy.linalg.cho_solve(factor, rhs)
        cx = c @ x
        if opts.relax > 1.0:
            x_mix = opts.relax * x + (1.0 - opts.relax) * z
            cx_mix = opts.relax * cx + (1.0 - opts.relax) * w
        else:
            x_mix, cx_mix = x, cx
        z_old, w_old = z, w
        z = soft_threshold(x_mix + u_z, 1.0 / rho)
        w = _project_onesided(cx_mix + u_w, strict)
        u_z = u_z + x_mix - z
        u_w = u_w + cx_mix - w

        r_norm = math.hypot(float(np.linalg.norm(x - z)), float(np.linalg.norm(cx - w)))
        s_vec = (z - z_old) + ct @ (w - w_old)
        s_norm = float(rho * np.linalg.norm(s_vec))
        ax_scale = math.hypot(float(np.linalg.norm(x)), float(np.linalg.norm(cx)))
        zs_scale = math.hypot(float(np.linalg.norm(z)), float(np.linalg.norm(w)))
        eps_pri = sqrt_d_pri * opts.eps_abs + opts.eps_rel * max(ax_scale, zs_scale)
        eps_dual = sqrt_d_dual * opts.eps_abs + opts.eps_rel * rho * float(
            np.linalg.norm(u_z + ct @ u_w))

        viol = _inequality_violation(cx, strict)
        obj = l1_objective(x)
        if viol <= FEAS_TOL and obj < best_feas_obj:
            best_feas_obj = obj
            best_feas_x = x
        if viol < best_viol:
            best_viol = viol
            best_viol_x = x
        if history is not None:
            _history_append(history, obj,
                            best_feas_obj if best_feas_x is not None else obj,
                            r_norm, s_norm)

        converged = r_norm <= eps_pri and s_norm <= eps_dual and viol <= FEAS_TOL
        if dtype == np.float64 and (converged or it % _POLISH_EVERY == 0):
            polished = _polish_inequality(c, ct, z, w, cx)
            if polished is not None:
                xp, gap = polished
                return SolveReport(solution=xp, iterations=it,
                                   primal_residual=_inequality_violation(c @ xp, strict),
                                   dual_residual=gap, status=SolveStatus.CONVERGED,
                                   objective=l1_objective(xp), history=history)
        if converged:
            return SolveReport(solution=x, iterations=it, primal_residual=r_norm,
                               dual_residual=s_norm, status=SolveStatus.CONVERGED,
                               objective=obj, history=history)

        # primal residual stalling far above threshold signals an empty
        # feasible set (the dual variables then diverge linearly)
        if it % _STALL_WINDOW == 0:
            if (r_norm > _STALL_FLOOR_FACTOR * eps_pri
                    and abs(stall_ref - r_norm) <= _STALL_RTOL * r_norm):
                strikes += 1
                if strikes >= _STALL_STRIKES:
                    sol = best_feas_x if best_feas_x is not None else best_viol_x
                    return SolveReport(solution=sol, iterations=it,
                                       primal_residual=r_norm, dual_residual=s_norm,
                                       status=SolveStatus.INFEASIBLE_DETECTED,
                                       objective=l1_objective(sol), history=history)
            else:
                strikes = 0
            stall_ref = r_norm
            if (not balance and it >= _RESCUE_AFTER
                    and _rescue_due(r_norm, eps_pri, s_norm, eps_dual)):
                balance = True

        if balance:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                u_z = u_z / 2.0
                u_w = u_w / 2.0
            elif s_norm > 10.0 * r_norm:
                rho /= 2.0
                u_z = u_z * 2.0
                u_w = u_w * 2.0

    sol = best_feas_x if best_feas_x is not None else best_viol_x
    return SolveReport(solution=sol, iterations=it, primal_residual=r_norm,
                       dual_residual=s_norm, status=SolveStatus.MAX_ITER_REACHED,
                       objective=l1_objective(sol), history=history)
