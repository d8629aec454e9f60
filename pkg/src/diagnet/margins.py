"""Certified max-margin solvers over the constraint set {w : z_n @ w >= 1}.

Four objectives: the l2 norm (dual QP by Gauss-Seidel coordinate ascent),
the l1 norm (dense two-phase simplex with a lexicographic re-solve to flag
non-unique optima), the depth-mu penalty (log-barrier interior point with
Newton inner loops), and a best-effort stationary point of the l_{2/D}
quasi-norm (projected subgradient plus an active-set Newton polish; local,
no global certificate).  Every solver returns duals and KKT residuals, and
``kkt_check`` recomputes the residuals independently of any solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .data import Dataset, NonSeparableError
from .penalty import PenaltySpec, penalty_gradient, penalty_hessian_diag, \
    penalty_value

_ZERO_COST = 1e-9


class SolverError(RuntimeError):
    """Solver failed to converge; carries the last iterate when available."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class UnboundedError(SolverError):
    """LP reported an unbounded ray (impossible for separable data)."""


@dataclass(frozen=True)
class KKTResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def max(self) -> float:
        return max(self.stationarity, self.primal, self.complementarity)


@dataclass(frozen=True)
class MarginSolution:
    """Primal vector with dual certificate and independently-checkable KKT
    residuals.  ``unique_hint`` is 'unique', 'degenerate', or 'unknown'."""

    w: np.ndarray
    objective: float
    nu: np.ndarray
    kkt: KKTResiduals
    unique_hint: str

    def to_json_dict(self) -> dict:
        return {
            "w": self.w.tolist(),
            "objective": self.objective,
            "nu": self.nu.tolist(),
            "kkt": {
                "stationarity": self.kkt.stationarity,
                "primal": self.kkt.primal,
                "complementarity": self.kkt.complementarity,
            },
            "unique_hint": self.unique_hint,
        }


# ---------------------------------------------------------------------------
# dense two-phase primal simplex (standard form: min c@x, A@x = b, x >= 0)

def _simplex_iterate(A, b, c, basis, tol=1e-11, max_pivots=20000):
    """Run primal simplex from a feasible basis, Bland's rule throughout.

    Returns (x, basis, y) at optimality; raises UnboundedError on a ray.
    """
    m, n = A.shape
    basis = list(basis)
    for _ in range(max_pivots):
        B = A[:, basis]
        xb = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        reduced = c - A.T @ y
        entering = -1
        for j in range(n):
            if j not in basis and reduced[j] < -tol:
                entering = j
                break
        if entering < 0:
            x = np.zeros(n)
            x[basis] = xb
            return x, basis, y
        direction = np.linalg.solve(B, A[:, entering])
        ratios = [
            (xb[i] / direction[i], basis[i], i)
            for i in range(m)
            if direction[i] > tol
        ]
        if not ratios:
            raise UnboundedError("unbounded improving ray in simplex")
        min_ratio = min(r[0] for r in ratios)
        # Bland tie-break: smallest variable index among minimal ratios
        leaving_row = min(
            (r for r in ratios if r[0] <= min_ratio + tol), key=lambda r: r[1]
        )[2]
        basis[leaving_row] = entering
    raise SolverError("simplex pivot limit exceeded")


def _simplex_two_phase(A, b, c):
    """Solve min c@x s.t. A@x = b, x >= 0.  Returns (x, basis, y) or raises
    SolverError('infeasible') / UnboundedError."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    # phase 1: artificial basis
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    x1, basis, _ = _simplex_iterate(A1, b, c1, range(n, n + m))
    if c1 @ x1 > 1e-8:
        raise SolverError("infeasible")
    # drive any zero-level artificial variables out of the basis
    rows_to_drop = []
    for i, bv in enumerate(list(basis)):
        if bv < n:
            continue
        B = A1[:, basis]
        row = np.linalg.solve(B, A)[i]
        pivot = next((j for j in range(n)
                      if j not in basis and abs(row[j]) > 1e-9), None)
        if pivot is None:
            rows_to_drop.append(basis.index(bv))
        else:
            basis[basis.index(bv)] = pivot
    if rows_to_drop:
        keep = [i for i in range(m) if i not in rows_to_drop]
        A = A[keep]
        b = b[keep]
        basis = [bv for i, bv in enumerate(basis) if i not in rows_to_drop]
    x, basis, y = _simplex_iterate(A, b, c, basis)
    return x, basis, y, A, b


# ---------------------------------------------------------------------------
# l2 max margin

def is_separable(data: Dataset) -> bool:
    """Feasibility of {z_n @ w >= 1}, decided by simplex phase 1."""
    z = data.effective
    n, d = z.shape
    A = np.hstack([z, -z, -np.eye(n)])
    try:
        _simplex_two_phase(A, np.ones(n), np.zeros(2 * d + n))
    except SolverError:
        return False
    return True


def l2_max_margin(data: Dataset, tol: float = 1e-12,
                  max_sweeps: int = 500_000) -> MarginSolution:
    """min ||w||_2 s.t. z_n @ w >= 1, as the dual QP
    max nu@1 - 0.5*||Z.T@nu||^2, nu >= 0, by Gauss-Seidel sweeps."""
    if not is_separable(data):
        raise NonSeparableError("l2 max margin requires separable data")
    z = data.effective
    n = z.shape[0]
    gram = z @ z.T
    diag = np.diag(gram).copy()
    nu = np.zeros(n)
    for _ in range(max_sweeps):
        delta = 0.0
        for i in range(n):
            new = max(0.0, nu[i] + (1.0 - gram[i] @ nu) / diag[i])
            delta = max(delta, abs(new - nu[i]))
            nu[i] = new
        if delta < tol:
            break
    else:
        raise SolverError("l2 dual ascent did not converge", last_iterate=nu)
    w = z.T @ nu
    sol = MarginSolution(w, float(np.linalg.norm(w)), nu,
                         KKTResiduals(0.0, 0.0, 0.0), "unique")
    return MarginSolution(w, sol.objective, nu, kkt_check(sol, data, "l2"),
                          "unique")


# ---------------------------------------------------------------------------
# l1 max margin

def _l1_lp_arrays(data: Dataset):
    z = data.effective
    n, d = z.shape
    A = np.hstack([z, -z, -np.eye(n)])
    b = np.ones(n)
    c = np.concatenate([np.ones(2 * d), np.zeros(n)])
    return A, b, c


def _split_to_w(x: np.ndarray, d: int) -> np.ndarray:
    return x[:d] - x[d:2 * d]


def l1_max_margin(data: Dataset) -> MarginSolution:
    """min ||w||_1 s.t. z_n @ w >= 1 via the split w = w+ - w- and a dense
    simplex on the standard form.  Flags a non-unique optimum by minimizing
    and maximizing a generic tie-break functional over the optimal face."""
    d = data.n_features
    A, b, c = _l1_lp_arrays(data)
    try:
        x, basis, y, *_ = _simplex_two_phase(A, b, c)
    except UnboundedError:
        raise
    except SolverError as exc:
        raise NonSeparableError("l1 max margin requires separable data") \
            from exc
    w = _split_to_w(x, d)
    objective = float(c @ x)
    nu = np.asarray(y, dtype=float)

    # second phase: optimize a generic functional over the optimal face
    # {A@x = b, c@x = objective, x >= 0}; two distinct extreme points there
    # mean the l1 optimum is not unique
    A_face = np.vstack([A, c])
    b_face = np.concatenate([b, [objective]])
    probe = np.cos(1.0 + np.arange(A.shape[1]))
    hint = "unique"
    try:
        vertices = []
        for sign in (1.0, -1.0):
            xf, *_ = _simplex_two_phase(A_face, b_face, sign * probe)
            vertices.append(_split_to_w(xf, d))
        if np.max(np.abs(vertices[0] - vertices[1])) > _ZERO_COST:
            hint = "degenerate"
            w = vertices[0]  # report a true vertex of the face
    except SolverError:
        hint = "unknown"

    sol = MarginSolution(w, objective, nu, KKTResiduals(0, 0, 0), hint)
    return MarginSolution(w, objective, nu, kkt_check(sol, data, "l1"), hint)


# ---------------------------------------------------------------------------
# penalty max margin (interior point)

def _barrier_newton(w, z, spec, t, max_iter=300):
    """Minimize t*Q(w) - sum log(z@w - 1) from a strictly feasible w.

    Stops when the gradient is small relative to both the stationarity
    target and its own constituent scale, or when it reaches the floor set
    by float granularity of the slacks (one ulp of w moves 1/slack_n by
    slack_n^-2 * ulp, which bounds how finely the pull term can be tuned).
    """
    best_w, best_gnorm, stall = w, math.inf, 0
    for _ in range(max_iter):
        slack = z @ w - 1.0
        pull = z.T @ (1.0 / slack)
        grad = t * penalty_gradient(w, spec) - pull
        scale = max(1.0, t * np.max(np.abs(penalty_gradient(w, spec))),
                    np.max(np.abs(pull)))
        ulp_w = 1e-16 * max(1.0, float(np.max(np.abs(w))))
        per_sample = np.abs(z).sum(axis=1) * ulp_w / slack**2
        floor = float(np.max(np.abs(z).T @ per_sample))
        threshold = max(min(1e-7 * t, 1e-9 * scale), 4.0 * floor)
        gnorm = np.max(np.abs(grad))
        if gnorm <= threshold:
            return w
        if gnorm < best_gnorm * 0.999:
            best_w, best_gnorm, stall = w, gnorm, 0
        else:
            stall += 1
            if stall > 40:
                return best_w  # float-resolution plateau; certify outside
        hess = t * np.diag(penalty_hessian_diag(w, spec)) \
            + (z / slack[:, None] ** 2).T @ z
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular Newton system", last_iterate=w) \
                from exc
        decrement = -grad @ step
        if decrement <= 0.09:
            # quadratic phase (the decrement is affine-invariant): take full
            # steps, shrinking only to stay strictly feasible; phi changes
            # here are often below float resolution so Armijo cannot apply
            alpha = 1.0
            for _ in range(100):
                w_try = w + alpha * step
                if np.min(z @ w_try - 1.0) > 0.0:
                    break
                alpha *= 0.5
            else:
                return w
            w = w_try
            continue
        phi = t * penalty_value(w, spec) - np.sum(np.log(slack))
        alpha = 1.0
        for _ in range(100):
            w_try = w + alpha * step
            s_try = z @ w_try - 1.0
            if np.min(s_try) > 0.0:
                phi_try = t * penalty_value(w_try, spec) - np.sum(np.log(s_try))
                if phi_try <= phi - 0.25 * alpha * decrement:
                    break
            alpha *= 0.5
        else:
            # progress below the float resolution of phi counts as converged
            if np.max(np.abs(grad)) <= 1e3 * threshold:
                return w
            raise SolverError("Newton line search failed", last_iterate=w)
        w = w_try
    raise SolverError("Newton iteration limit", last_iterate=w)


def q_mu_max_margin(data: Dataset, spec: PenaltySpec,
                    w0: np.ndarray | None = None) -> MarginSolution:
    """argmin Q(w) s.t. z_n @ w >= 1 by a log-barrier interior point.

    The barrier weight applies to Q normalized by its curvature at the
    origin (the argmin is scale-invariant, and Q's natural magnitude spans
    ~16 orders across mu, which would make a raw duality gap meaningless);
    it starts at 1 and grows x10 until the gap estimate N/t drops below
    1e-9.  Duals are recovered from the barrier multipliers.
    """
    z = data.effective
    n = data.n_samples
    w = None
    if w0 is not None:
        w0 = np.asarray(w0, dtype=float)
        m = float(np.min(z @ w0))
        if m > 1e-9:
            w = w0 * (1.001 / m)
    if w is None:
        w = l2_max_margin(data).w * 2.0  # margins >= 2, strictly feasible
    # weight the curvature-normalized objective: Q's natural magnitude spans
    # many orders across mu and a raw N/t gap would be meaningless for flat
    # penalties; boosting (never shrinking) the weight also keeps the
    # complementarity residual 1/t_eff at or below 1/t
    curvature = float(penalty_hessian_diag(np.zeros(1), spec)[0])
    boost = max(1.0, 1.0 / curvature)
    t = 1.0
    while True:
        w = _barrier_newton(w, z, spec, t * boost)
        if n / t < 1e-9:
            break
        t *= 10.0
    slack = z @ w - 1.0
    # barrier multipliers, plus a least-squares recovery on the active set
    # (slack values near their float granularity cannot express exact duals)
    candidates = [1.0 / (t * boost * slack)]
    active = slack <= 1e-4 * (1.0 + float(slack.max()))
    if np.any(active):
        nu_r = np.zeros(n)
        nu_r[active] = nnls(z[active].T, penalty_gradient(w, spec))[0]
        candidates.append(nu_r)
    objective = penalty_value(w, spec)
    best = None
    for nu in candidates:
        sol = MarginSolution(w, objective, nu, KKTResiduals(0, 0, 0),
                             "unique")
        kkt = kkt_check(sol, data, spec)
        if best is None or kkt.max() < best.kkt.max():
            best = MarginSolution(w, objective, nu, kkt, "unique")
    if best.kkt.max() > 1e-6:
        raise SolverError(
            f"interior point stalled (residual {best.kkt.max():g})",
            last_iterate=w)
    return best


def q_path(data: Dataset, depth: int, mu_grid) -> list[MarginSolution]:
    """q_mu_max_margin along a descending mu grid, warm-started in order."""
    mu_grid = [float(m) for m in mu_grid]
    if any(m <= 0 for m in mu_grid):
        raise ValueError("mu grid must be positive")
    if any(a <= b for a, b in zip(mu_grid, mu_grid[1:])):
        raise ValueError("mu grid must be strictly descending")
    out = []
    w_prev = None
    for idx, mu in enumerate(mu_grid):
        try:
            sol = q_mu_max_margin(data, PenaltySpec(depth, mu), w0=w_prev)
        except (SolverError, NonSeparableError) as exc:
            raise SolverError(f"q_path failed at grid index {idx} "
                              f"(mu={mu:g}): {exc}") from exc
        out.append(sol)
        w_prev = sol.w
    return out


# ---------------------------------------------------------------------------
# l_{2/D} quasi-norm stationary point (local)

def _project_to_feasible(z: np.ndarray, w: np.ndarray,
                         tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection onto {v : z @ v >= 1} by dual coordinate ascent."""
    resid = 1.0 - z @ w
    if np.max(resid) <= 0.0:
        return w.copy()
    gram = z @ z.T
    diag = np.diag(gram)
    lam = np.zeros(z.shape[0])
    for _ in range(200_000):
        delta = 0.0
        for i in range(lam.size):
            new = max(0.0, lam[i] + (resid[i] - gram[i] @ lam) / diag[i])
            delta = max(delta, abs(new - lam[i]))
            lam[i] = new
        if delta < tol:
            break
    return w + z.T @ lam


def _smoothed_value(w, depth, delta=1e-8):
    return float(np.sum((w**2 + delta**2) ** (1.0 / depth)))


def _smoothed_grad(w, depth, delta=1e-8):
    return (2.0 / depth) * w * (w**2 + delta**2) ** (1.0 / depth - 1.0)


def _smoothed_hess_diag(w, depth, delta=1e-8):
    s = w**2 + delta**2
    return (2.0 / depth) * s ** (1.0 / depth - 2.0) * (
        s + 2.0 * (1.0 / depth - 1.0) * w**2
    )


def _stationarity_report(w, z, depth, delta=1e-8):
    """Best-fit multipliers on the active set (nonnegative least squares)
    and the resulting KKT residuals of the smoothed problem."""
    margins_w = z @ w
    active = margins_w <= 1.0 + 1e-6
    grad = _smoothed_grad(w, depth, delta)
    nu = np.zeros(z.shape[0])
    if np.any(active):
        nu_a, _ = nnls(z[active].T, grad)
        nu[active] = nu_a
    stat = float(np.max(np.abs(grad - z.T @ nu)))
    primal = float(max(0.0, 1.0 - margins_w.min()))
    comp = float(np.max(np.abs(nu * (margins_w - 1.0))))
    return nu, KKTResiduals(stat, primal, comp)


def _kkt_newton(w, nu, za, depth, delta, max_iter=60):
    """Damped Newton on the stationarity + active-constraint system."""
    d = w.size

    def residual(wv, nuv):
        return np.concatenate([
            _smoothed_grad(wv, depth, delta) - za.T @ nuv,
            za @ wv - 1.0,
        ])

    for _ in range(max_iter):
        f = residual(w, nu)
        norm = np.max(np.abs(f))
        if norm <= 1e-11:
            return w, nu, norm
        jac = np.zeros((d + za.shape[0], d + za.shape[0]))
        jac[:d, :d] = np.diag(_smoothed_hess_diag(w, depth, delta))
        jac[:d, d:] = -za.T
        jac[d:, :d] = za
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return w, nu, norm
        alpha = 1.0
        for _ in range(60):
            w_try = w + alpha * step[:d]
            nu_try = nu + alpha * step[d:]
            if np.max(np.abs(residual(w_try, nu_try))) < norm:
                w, nu = w_try, nu_try
                break
            alpha *= 0.5
        else:
            return w, nu, norm
    return w, nu, float(np.max(np.abs(residual(w, nu))))


def _active_set_polish(w, z, depth, delta=1e-8, active_tol=1e-3):
    """Newton on the KKT system, adjusting the active set until the
    multipliers are nonnegative and no inactive constraint is violated.
    Returns (w, nu_full) or None when no consistent active set is found."""
    active = set(np.flatnonzero(z @ w <= 1.0 + active_tol).tolist())
    w = w.copy()
    for _ in range(2 * z.shape[0] + 4):
        if not active:
            if np.min(z @ w) >= 1.0 - 1e-9:
                return w, np.zeros(z.shape[0])
            return None
        idx = sorted(active)
        za = z[idx]
        nu = np.maximum(nnls(za.T, _smoothed_grad(w, depth, delta))[0], 0.0)
        w_new, nu_new, norm = _kkt_newton(w, nu, za, depth, delta)
        if norm > 1e-9:
            return None
        if np.min(nu_new) < -1e-10:
            active.discard(idx[int(np.argmin(nu_new))])
            w = w_new
            continue
        margins_all = z @ w_new
        violated = np.flatnonzero(margins_all < 1.0 - 1e-9)
        fresh = [v for v in violated if v not in active]
        if fresh:
            active.add(int(margins_all.argmin()))
            continue  # retry from the previous w to stay near-feasible
        nu_full = np.zeros(z.shape[0])
        nu_full[idx] = np.maximum(nu_new, 0.0)
        return w_new, nu_full
    return None


def _tiny_branch_root(c: float, depth: int, delta: float) -> float:
    """The near-zero solution w of (2/D) w (w^2 + delta^2)^(1/D - 1) = c:
    the stable stationary value of a coordinate carrying dual mass c.
    Bisection on [0, w_peak] where the left branch is increasing."""
    if c == 0.0:
        return 0.0
    sign = math.copysign(1.0, c)
    c = abs(c)
    peak = delta / math.sqrt(2.0 * (1.0 - 1.0 / depth) - 1.0) \
        if 2.0 * (1.0 - 1.0 / depth) > 1.0 else delta
    def g(w):
        return (2.0 / depth) * w * (w * w + delta * delta) ** (1.0 / depth - 1.0)
    if c >= g(peak):
        return sign * peak  # saturated: residual is reported downstream
    lo, hi = 0.0, peak
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < c:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-18 * max(1.0, hi):
            break
    return sign * 0.5 * (lo + hi)


def _refine_on_support(w, z, depth, delta, cut_rel=1e-3, max_rounds=12):
    """Re-optimize over the large coordinates only (the smoothed objective
    is stiff near zero, so the full-space step size collapses), polish the
    reduced KKT system, then set each off-support coordinate to its scalar
    stationary value under the recovered duals."""
    w = w.copy()
    support = np.abs(w) > cut_rel * np.max(np.abs(w))
    for _ in range(max_rounds):
        zb = z[:, support]
        wb = w[support]
        val = _smoothed_value(wb, depth, delta)
        alpha = 0.1
        for _ in range(5000):
            g = _smoothed_grad(wb, depth, delta)
            moved = False
            while alpha > 1e-14:
                wb_try = _project_to_feasible(zb, wb - alpha * g)
                val_try = _smoothed_value(wb_try, depth, delta)
                if val_try < val - 1e-15:
                    wb, val = wb_try, val_try
                    moved = True
                    alpha = min(alpha * 2.0, 1.0)
                    break
                alpha *= 0.5
            if not moved:
                break
        shrunk = np.abs(wb) <= cut_rel * np.max(np.abs(wb))
        w = np.zeros_like(w)
        w[np.flatnonzero(support)] = np.where(shrunk, 0.0, wb)
        if not np.any(shrunk):
            break
        support = np.abs(w) > cut_rel * np.max(np.abs(w))
    idx = np.flatnonzero(support)
    polished = _active_set_polish(w[idx], z[:, idx], depth, delta)
    if polished is None:
        return w
    wb, nu = polished
    out = np.zeros_like(w)
    out[idx] = wb
    lift = z.T @ nu
    for i in np.flatnonzero(~support):
        out[i] = _tiny_branch_root(float(lift[i]), depth, delta)
    if np.min(z @ out) < 1.0 - 1e-12:
        out = _project_to_feasible(z, out)
    return out
    return None


def lp_quasi_stationary(data: Dataset, depth: int, w0,
                        max_iters: int = 20_000,
                        step0: float = 0.05) -> MarginSolution:
    """First-order stationary point of min sum |w_i|^(2/D) s.t. z_n @ w >= 1.

    |w_i| is smoothed to sqrt(w_i^2 + delta^2) with delta = 1e-8; descent is
    projected subgradient with diminishing steps from w0, then an active-set
    Newton polish.  The result is LOCAL: no global certificate is claimed,
    and the achieved stationarity residual is reported for judgment.
    """
    if depth <= 2:
        raise ValueError("quasi-norm descent is defined for depth > 2")
    if not is_separable(data):
        raise NonSeparableError("quasi-norm descent requires separable data")
    z = data.effective
    delta = 1e-8
    w = _project_to_feasible(z, np.asarray(w0, dtype=float))
    best_w, best_val = w.copy(), _smoothed_value(w, depth, delta)
    for k in range(max_iters):
        g = _smoothed_grad(w, depth, delta)
        gnorm = np.linalg.norm(g)
        if gnorm == 0.0:
            break
        w = _project_to_feasible(z, w - step0 / np.sqrt(k + 1.0) * g / gnorm)
        val = _smoothed_value(w, depth, delta)
        if val < best_val:
            best_val, best_w = val, w.copy()
    refined = _refine_on_support(best_w, z, depth, delta)
    if _smoothed_value(refined, depth, delta) <= best_val + 1e-9:
        w = refined
    else:
        w = best_w
    nu, kkt = _stationarity_report(w, z, depth, delta)
    objective = float(np.sum(np.abs(w) ** (2.0 / depth)))
    return MarginSolution(w, objective, nu, kkt, "unknown")


# ---------------------------------------------------------------------------
# independent KKT verification

def kkt_check(solution: MarginSolution, data: Dataset,
              objective) -> KKTResiduals:
    """Recompute KKT residuals from scratch for the declared objective:
    "l2", "l1", or a PenaltySpec.  Does not trust any solver state."""
    z = data.effective
    w = np.asarray(solution.w, dtype=float)
    nu = np.asarray(solution.nu, dtype=float)
    margins_w = z @ w
    primal = float(max(0.0, 1.0 - margins_w.min()))
    comp = float(np.max(np.abs(nu * (margins_w - 1.0))))
    g = z.T @ nu
    if isinstance(objective, PenaltySpec):
        stat = float(np.max(np.abs(penalty_gradient(w, objective) - g)))
    elif objective == "l2":
        stat = float(np.max(np.abs(w - g)))
    elif objective == "l1":
        # g must lie in the l1 subdifferential at w: g_i = sign(w_i) on
        # nonzero coordinates, |g_i| <= 1 on zero coordinates
        per_coord = np.where(
            np.abs(w) > 1e-9,
            np.abs(g - np.sign(w)),
            np.maximum(0.0, np.abs(g) - 1.0),
        )
        stat = float(np.max(per_coord))
    else:
        raise ValueError(f"unknown objective {objective!r}")
    return KKTResiduals(stat, primal, comp)
