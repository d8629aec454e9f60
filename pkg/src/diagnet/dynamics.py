"""Training dynamics of depth-D diagonal networks under the exponential loss.

The predictor is w = u_plus^D - u_minus^D with nonnegative parameters
initialized at alpha * 1 (so w(0) = 0).  All loss-dependent quantities are
kept in the log domain: the loss itself is never materialized, only the
smoothed margin gamma_tilde = -log(loss) and the normalized residual
distribution p over samples, which stay representable out to
gamma_tilde ~ 1e6.  Two steppers are provided: plain gradient descent
(usable while exp(-margins) is representable; its accumulated step sizes
are real flow time) and loss-normalized gradient descent (a time
reparametrization of the same flow that reaches extreme accuracies).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, DataStats, NonSeparableError, compute_stats
from .penalty import h_value


class LossUnderflowError(FloatingPointError):
    """exp(-margin) underflowed to zero; use the normalized stepper."""


class StepSizeUnderflowError(RuntimeError):
    """No acceptable step found after the maximum number of retries."""


class BudgetExhaustedError(RuntimeError):
    """max_steps reached before the gamma_tilde target.  Carries the
    trajectory recorded so far in ``.records``."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


class ClosedFormDomainError(ValueError):
    """Accumulated integral left (-1, 1) for D > 2 (step size too large)."""


@dataclass
class NetParams:
    """Nonnegative parameter pair plus depth and initialization scale."""

    u_plus: np.ndarray
    u_minus: np.ndarray
    depth: int
    alpha: float

    def __post_init__(self):
        self.u_plus = np.asarray(self.u_plus, dtype=float)
        self.u_minus = np.asarray(self.u_minus, dtype=float)
        if not isinstance(self.depth, (int, np.integer)) or self.depth < 2:
            raise ValueError(f"depth must be an integer >= 2, got {self.depth}")
        self.depth = int(self.depth)
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if np.any(self.u_plus < 0) or np.any(self.u_minus < 0):
            raise ValueError("parameters must be nonnegative")


def init_params(d: int, depth: int, alpha: float) -> NetParams:
    """Unbiased initialization u = alpha * 1, hence w = 0."""
    return NetParams(np.full(d, float(alpha)), np.full(d, float(alpha)),
                     depth, float(alpha))


@dataclass
class TrajectoryRecord:
    """One snapshot: flow time is stored as log(t) (-inf at t = 0) because
    normalized-mode time increments eta * exp(gamma_tilde) overflow."""

    step: int
    log_flow_time: float
    gamma: float
    gamma_tilde: float
    w: np.ndarray
    s_accum: np.ndarray
    metrics: dict = field(default_factory=dict)


@dataclass
class StepperConfig:
    eta: float
    mode: str = "normalized_gd"
    max_steps: int = 1_000_000
    record_every: int = 1
    gamma_tilde_target: float | None = None
    step_shrink: float = 0.5
    max_rejects: int = 60
    # reject steps growing gamma_tilde by more than this fraction of
    # max(1, gamma_tilde): for D > 2 the normalized rate grows superlinearly
    # with the margin and a fixed eta would blur the late trajectory
    max_dgamma_frac: float = 1.0

    def __post_init__(self):
        if not (self.eta > 0):
            raise ValueError("eta must be positive")
        if self.mode not in ("plain_gd", "normalized_gd"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (0.0 < self.step_shrink < 1.0):
            raise ValueError("step_shrink must be in (0, 1)")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if not (self.max_dgamma_frac > 0):
            raise ValueError("max_dgamma_frac must be positive")


def predictor(params: NetParams) -> np.ndarray:
    """w_i = u_plus_i^D - u_minus_i^D."""
    return params.u_plus**params.depth - params.u_minus**params.depth


def _eval_w(w: np.ndarray, z: np.ndarray):
    """(gamma, gamma_tilde, p) from a predictor via shifted exponentials.

    p_n = exp(-(score_n - gamma)) / sum_k exp(-(score_k - gamma)) is the
    normalized residual direction; its denominator is >= 1 by construction,
    so everything here is finite for arbitrarily large margins.
    """
    scores = z @ w
    gamma = float(scores.min())
    ex = np.exp(gamma - scores)
    total = float(ex.sum())
    gamma_tilde = gamma - math.log(total / scores.size)
    return gamma, gamma_tilde, ex / total


def margins(params: NetParams, data: Dataset):
    """Prediction margin gamma = min_n z_n @ w, smoothed margin
    gamma_tilde = -log(loss), and the residual distribution p."""
    return _eval_w(predictor(params), data.effective)


def loss_gradient(params: NetParams, data: Dataset) -> np.ndarray:
    """Exact gradient of the mean exponential loss w.r.t. (u_plus, u_minus).

    Only usable while exp(-margin) is representable; complete underflow
    raises LossUnderflowError as the signal to switch to normalized mode.
    """
    z = data.effective
    w = predictor(params)
    e = np.exp(-(z @ w))
    if e.max() == 0.0:
        raise LossUnderflowError(
            "all residuals exp(-margin) underflowed to zero"
        )
    xr = z.T @ e / data.n_samples
    d = params.depth
    return np.concatenate([
        -d * params.u_plus ** (d - 1) * xr,
        d * params.u_minus ** (d - 1) * xr,
    ])


def normalized_direction(params: NetParams, data: Dataset) -> np.ndarray:
    """gradient/loss via shifted exponentials; finite at any gamma_tilde."""
    _, _, p = margins(params, data)
    xp = data.effective.T @ p
    d = params.depth
    return np.concatenate([
        -d * params.u_plus ** (d - 1) * xp,
        d * params.u_minus ** (d - 1) * xp,
    ])


def _integral_scale(depth: int, alpha: float) -> float:
    # prefactor turning accumulated residual integrals into the closed-form
    # argument: w = 2 a^2 sinh(s) for D=2, w = a^D h_D(s) for D>2
    if depth == 2:
        return 4.0
    return alpha ** (depth - 2) * depth * (depth - 2)


class _Stepper:
    """Shared engine behind step() and run(): one accepted update at a time,
    with rejection/retry on negative parameters or non-increasing
    gamma_tilde, and stable accumulation of flow time and residual integral.
    """

    def __init__(self, params: NetParams, data: Dataset, cfg: StepperConfig):
        self.cfg = cfg
        self.z = data.effective
        self.n = data.n_samples
        self.depth = params.depth
        self.alpha = params.alpha
        self.c_scale = _integral_scale(params.depth, params.alpha)
        self.u_plus = params.u_plus.copy()
        self.u_minus = params.u_minus.copy()
        self.step_count = 0
        self.log_time = -math.inf
        self.s_accum = np.zeros(data.n_features)
        self.w = self.u_plus**self.depth - self.u_minus**self.depth
        self.gamma, self.gamma_tilde, self.p = _eval_w(self.w, self.z)
        self.eta_working = cfg.eta  # adaptive start; capped at cfg.eta

    def params(self) -> NetParams:
        return NetParams(self.u_plus.copy(), self.u_minus.copy(),
                         self.depth, self.alpha)

    def record(self) -> TrajectoryRecord:
        return TrajectoryRecord(self.step_count, self.log_time, self.gamma,
                                self.gamma_tilde, self.w.copy(),
                                self.s_accum.copy())

    def direction(self):
        """Descent direction and the per-unit-step residual integral."""
        d = self.depth
        if self.cfg.mode == "normalized_gd":
            xp = self.z.T @ self.p
            integ = xp
            log_dt_per_eta = self.gamma_tilde  # dt = d tau / loss
        else:
            e = np.exp(-(self.z @ self.w))
            if e.max() == 0.0:
                raise LossUnderflowError(
                    "plain mode underflowed; switch to normalized_gd"
                )
            xp = self.z.T @ e / self.n
            integ = xp
            log_dt_per_eta = 0.0
        g_plus = -d * self.u_plus ** (d - 1) * xp
        g_minus = d * self.u_minus ** (d - 1) * xp
        return g_plus, g_minus, integ, log_dt_per_eta

    def try_eta(self, g_plus, g_minus, eta, cap_growth=True):
        up = self.u_plus - eta * g_plus
        um = self.u_minus - eta * g_minus
        if up.min() < 0.0 or um.min() < 0.0:
            return None
        w = up**self.depth - um**self.depth
        gamma, gamma_tilde, p = _eval_w(w, self.z)
        if gamma_tilde <= self.gamma_tilde:
            return None
        if cap_growth and gamma_tilde - self.gamma_tilde > \
                self.cfg.max_dgamma_frac * max(1.0, self.gamma_tilde):
            return None
        return up, um, w, gamma, gamma_tilde, p

    def commit(self, trial, integ, log_dt_per_eta, eta):
        self.u_plus, self.u_minus, self.w, self.gamma, self.gamma_tilde, \
            self.p = trial
        self.s_accum = self.s_accum + self.c_scale * eta * integ
        self.log_time = np.logaddexp(self.log_time,
                                     math.log(eta) + log_dt_per_eta)
        self.step_count += 1

    def _start_eta(self) -> float:
        return min(self.eta_working * 2.0, self.cfg.eta)

    def advance(self):
        """One accepted step; shrinks eta on rejection up to max_rejects.
        The accepted size seeds the next attempt (doubled, capped at the
        configured eta) so rejection cascades stay O(1) per step."""
        g_plus, g_minus, integ, log_dt = self.direction()
        eta = self._start_eta()
        for _ in range(self.cfg.max_rejects + 1):
            trial = self.try_eta(g_plus, g_minus, eta)
            if trial is not None:
                self.commit(trial, integ, log_dt, eta)
                self.eta_working = eta
                return
            eta *= self.cfg.step_shrink
        raise StepSizeUnderflowError(
            f"no acceptable step at step {self.step_count} "
            f"(eta shrunk to {eta:g})"
        )

    def land_on_target(self, target, rtol=1e-6):
        """Replay the last pending step with eta bisected so gamma_tilde
        lands within rtol * max(1, target) of the target."""
        g_plus, g_minus, integ, log_dt = self.direction()
        eta_hi = self._start_eta()
        trial_hi = None
        for _ in range(self.cfg.max_rejects + 1):
            trial_hi = self.try_eta(g_plus, g_minus, eta_hi)
            if trial_hi is not None and trial_hi[4] >= target:
                break
            if trial_hi is not None:
                # accepted but undershoots: commit and continue stepping
                self.commit(trial_hi, integ, log_dt, eta_hi)
                self.eta_working = eta_hi
                return False
            eta_hi *= self.cfg.step_shrink
        else:
            raise StepSizeUnderflowError("cannot bracket the target")
        tol = rtol * max(1.0, abs(target))
        lo, hi = 0.0, eta_hi
        best_eta, best_trial = eta_hi, trial_hi
        for _ in range(200):
            if abs(best_trial[4] - target) <= tol:
                break
            mid = 0.5 * (lo + hi)
            candidate = self.try_eta(g_plus, g_minus, mid, cap_growth=False)
            if candidate is None or candidate[4] < target:
                lo = mid
            else:
                hi = mid
                best_eta, best_trial = mid, candidate
        self.commit(best_trial, integ, log_dt, best_eta)
        return True


def step(params: NetParams, data: Dataset, cfg: StepperConfig,
         prev: TrajectoryRecord | None = None):
    """One accepted update.  ``prev`` carries the accumulators (flow time,
    residual integral, step index) between calls; None means a fresh start
    at the given params."""
    eng = _Stepper(params, data, cfg)
    if prev is not None:
        eng.step_count = prev.step
        eng.log_time = prev.log_flow_time
        eng.s_accum = prev.s_accum.copy()
    eng.advance()
    return eng.params(), eng.record()


_METRIC_NAMES = ("kernel_distance", "closed_form_residual", "excess_l1",
                 "excess_l2")


def run(params0: NetParams, data: Dataset, cfg: StepperConfig,
        stats: DataStats | None = None, metrics: tuple = (),
        references: dict | None = None) -> list[TrajectoryRecord]:
    """Iterate the stepper until gamma_tilde reaches the configured target
    (landing on it by bisection of the final step) or max_steps runs out.

    Optional per-record metrics: "kernel_distance" (Frobenius-cosine drift
    of the tangent kernel from initialization), "closed_form_residual", and
    "excess_l1"/"excess_l2" of the margin-rescaled predictor against
    reference solutions supplied as ``references={"l1": w, "l2": w}``
    (computed from the margins module when omitted).
    """
    for name in metrics:
        if name not in _METRIC_NAMES:
            raise ValueError(f"unknown metric {name!r}")
    if stats is None:
        stats = compute_stats(data)
    if not stats.separable:
        raise NonSeparableError("training requires separable data")
    ref_norms = {}
    for name, key, norm in (("excess_l1", "l1", 1), ("excess_l2", "l2", 2)):
        if name in metrics:
            if references is None or key not in references:
                from .margins import l1_max_margin, l2_max_margin
                ref = (l1_max_margin(data).w if key == "l1"
                       else l2_max_margin(data).w)
            else:
                ref = np.asarray(references[key], dtype=float)
            ref_norms[name] = float(np.sum(np.abs(ref)) if norm == 1
                                    else np.linalg.norm(ref))
    eng = _Stepper(params0, data, cfg)
    k0 = tangent_kernel(params0, data) if "kernel_distance" in metrics else None

    def snapshot():
        rec = eng.record()
        if k0 is not None:
            rec.metrics["kernel_distance"] = kernel_distance(
                tangent_kernel(eng.params(), data), k0)
        if "closed_form_residual" in metrics:
            rec.metrics["closed_form_residual"] = closed_form_residual(
                rec, eng.alpha, eng.depth)
        if ref_norms and rec.gamma > 0:
            w_hat = rec.w / rec.gamma
            if "excess_l1" in ref_norms:
                rec.metrics["excess_l1"] = float(
                    np.sum(np.abs(w_hat)) / ref_norms["excess_l1"] - 1.0)
            if "excess_l2" in ref_norms:
                rec.metrics["excess_l2"] = float(
                    np.linalg.norm(w_hat) / ref_norms["excess_l2"] - 1.0)
        return rec

    records = [snapshot()]
    target = cfg.gamma_tilde_target
    if target is not None and eng.gamma_tilde >= target:
        return records
    for _ in range(cfg.max_steps):
        if target is not None:
            # probe a full step; land exactly when it would cross the target
            if eng.land_on_target(target):
                records.append(snapshot())
                return records
        else:
            eng.advance()
        if eng.step_count % cfg.record_every == 0:
            records.append(snapshot())
    if target is None:
        if records[-1].step != eng.step_count:
            records.append(snapshot())
        return records
    raise BudgetExhaustedError(
        f"gamma_tilde target {target:g} not reached in {cfg.max_steps} steps "
        f"(reached {eng.gamma_tilde:g})", records)


def closed_form_residual(record: TrajectoryRecord, alpha: float,
                         depth: int) -> float:
    """Sup-norm gap between the recorded predictor and the closed-form
    solution of the flow driven by the accumulated residual integral:
    2 alpha^2 sinh(s) for D = 2, alpha^D h_D(s) for D > 2."""
    s = record.s_accum
    if depth == 2:
        pred = 2.0 * alpha**2 * np.sinh(s)
    else:
        if np.any(np.abs(s) >= 1.0):
            raise ClosedFormDomainError(
                "accumulated integral left (-1, 1); reduce the step size"
            )
        pred = alpha**depth * h_value(s, depth)
    return float(np.max(np.abs(record.w - pred)))


def tangent_kernel(params: NetParams, data: Dataset) -> np.ndarray:
    """Gram matrix of parameter gradients of the model output:
    K_nm = D^2 sum_i (u_plus_i^(2D-2) + u_minus_i^(2D-2)) x_ni x_mi."""
    d = params.depth
    weights = d * d * (params.u_plus ** (2 * d - 2)
                       + params.u_minus ** (2 * d - 2))
    pts = data.points
    return (pts * weights) @ pts.T


def kernel_distance(k_t: np.ndarray, k_0: np.ndarray) -> float:
    """1 - Frobenius cosine similarity, in [0, 2]."""
    if k_t.shape != k_0.shape:
        raise ValueError("kernel shapes differ")
    nt = np.linalg.norm(k_t)
    n0 = np.linalg.norm(k_0)
    if nt == 0.0 or n0 == 0.0:
        raise ValueError("zero-norm kernel")
    return float(1.0 - np.sum(k_t * k_0) / (nt * n0))


def linearized_flow_step(w_bar: np.ndarray, data: Dataset, alpha: float,
                         depth: int, eta: float,
                         normalized: bool = False) -> np.ndarray:
    """Euler step of the flow of the model linearized at initialization:
    dw/dt = (2/N) D^2 alpha^(2D-2) sum_n exp(-z_n @ w) z_n.  The normalized
    variant divides by the linearized loss via shifted exponentials."""
    z = data.effective
    scale = 2.0 * depth**2 * alpha ** (2 * depth - 2)
    if normalized:
        _, _, p = _eval_w(np.asarray(w_bar, dtype=float), z)
        return w_bar + eta * scale * (z.T @ p)
    e = np.exp(-(z @ w_bar))
    return w_bar + eta * scale * (z.T @ e) / data.n_samples


def run_linearized(data: Dataset, alpha: float, depth: int, eta: float,
                   gamma_tilde_target: float,
                   max_steps: int = 10_000_000) -> tuple[np.ndarray, float]:
    """Follow the linearized flow (normalized variant) from w = 0 until its
    smoothed margin reaches the target.  Returns (w_bar, gamma_tilde)."""
    z = data.effective
    w = np.zeros(data.n_features)
    for _ in range(max_steps):
        _, gt, _ = _eval_w(w, z)
        if gt >= gamma_tilde_target:
            return w, gt
        w = linearized_flow_step(w, data, alpha, depth, eta, normalized=True)
    raise BudgetExhaustedError("linearized flow did not reach the target", [])


def support_vectors(w: np.ndarray, data: Dataset) -> np.ndarray:
    """Boolean mask of samples at the minimum margin, with the tolerance
    score_n <= gamma * (1 + 1e-6) + 1e-9 standing in for exact equality."""
    scores = data.effective @ w
    gamma = scores.min()
    return scores <= gamma * (1.0 + 1e-6) + 1e-9
