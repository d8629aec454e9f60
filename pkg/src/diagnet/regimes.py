"""Experiment orchestration: stopping schedules, regime metrics, support
stability checking, accuracy-vs-initialization fits, and parameter sweeps.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, DataStats, compute_stats
from .dynamics import StepperConfig, TrajectoryRecord, init_params, run
from .margins import l1_max_margin, l2_max_margin, q_mu_max_margin
from .penalty import PenaltySpec


@dataclass(frozen=True)
class StoppingRule:
    """Where on the accuracy axis a run is read out: either a fixed
    gamma_tilde, or the scale-coupled target alpha^D / mu."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed_gamma_tilde", "mu_scaled"):
            raise ValueError(f"unknown stopping rule kind {self.kind!r}")
        if self.kind == "mu_scaled" and not (self.value > 0):
            raise ValueError("mu must be positive")
        if self.kind == "fixed_gamma_tilde" and self.value < 0:
            raise ValueError("gamma_tilde target must be nonnegative")


def schedule_target(alpha: float, depth: int, rule: StoppingRule) -> float:
    """fixed_gamma_tilde -> value; mu_scaled -> alpha^D / mu."""
    if not (alpha > 0):
        raise ValueError("alpha must be positive")
    if rule.kind == "fixed_gamma_tilde":
        return rule.value
    return alpha**depth / rule.value


def margin_rescale(w: np.ndarray, data: Dataset) -> np.ndarray:
    """w / gamma: the unit-margin representative used for all comparisons."""
    gamma = float(np.min(data.effective @ w))
    if gamma <= 0:
        raise ValueError("cannot rescale: prediction margin is not positive")
    return np.asarray(w, dtype=float) / gamma


def excess_norms(w_hat, w_l1, w_l2) -> tuple[float, float]:
    """(excess l1, excess l2) of a margin-rescaled predictor against the
    reference minimum-norm solutions."""
    n1 = float(np.sum(np.abs(w_l1)))
    n2 = float(np.linalg.norm(w_l2))
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("zero-norm reference solution")
    return (
        float(np.sum(np.abs(w_hat)) / n1 - 1.0),
        float(np.linalg.norm(w_hat) / n2 - 1.0),
    )


def angle_degrees(u, v) -> float:
    """arccos of the normalized inner product: the closeness-of-directions
    metric used by the regime checks."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("zero vector has no direction")
    return float(np.degrees(np.arccos(np.clip(u @ v / (nu * nv), -1.0, 1.0))))


def sphere_coords(w) -> tuple[float, float]:
    """(azimuth, pitch) in radians for d = 3: azimuth = atan2(w2, w1),
    pitch = asin(w3 / |w|); azimuth is 0 at the poles by convention."""
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise ValueError("sphere coordinates require exactly 3 dimensions")
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise ValueError("zero vector has no direction")
    if w[0] == 0.0 and w[1] == 0.0:
        return 0.0, math.copysign(math.pi / 2, w[2])
    return float(math.atan2(w[1], w[0])), float(math.asin(w[2] / norm))


_NONSUPPORT_MARGIN = 1.0 + 1e-6


@dataclass(frozen=True)
class ConditionReport:
    """Support-stability evidence over a gamma_tilde window: for each sample
    that is NOT a support vector of the candidate limit direction, the
    minimum over the window of its margin ratio z_k @ w / gamma.  The
    condition holds iff every such minimum stays >= rho0 > 1."""

    rho0: float
    gamma_tilde_star: float
    window: tuple[float, float]
    per_nonsupport_sample: list
    holds: bool


def condition1_check(records: list[TrajectoryRecord], data: Dataset,
                     w_hat: np.ndarray, rho0: float,
                     gamma_tilde_star: float,
                     gamma_tilde_hi: float | None = None) -> ConditionReport:
    """Evaluate the support-stability condition on a recorded trajectory.

    ``w_hat`` is the candidate limit direction at unit margin (the final
    rescaled iterate, or a reference max-margin solution).
    """
    if rho0 <= 1.0:
        raise ValueError("rho0 must exceed 1")
    z = data.effective
    if gamma_tilde_hi is None:
        gamma_tilde_hi = records[-1].gamma_tilde
    gts = np.array([r.gamma_tilde for r in records])
    if gts.min() > gamma_tilde_star or gts.max() < gamma_tilde_hi:
        raise ValueError(
            f"trajectory spans [{gts.min():g}, {gts.max():g}], which does "
            f"not cover the window [{gamma_tilde_star:g}, {gamma_tilde_hi:g}]"
        )
    in_window = [r for r in records
                 if gamma_tilde_star <= r.gamma_tilde <= gamma_tilde_hi]
    if not in_window:
        raise ValueError("no recorded steps inside the window")
    nonsupport = np.flatnonzero(z @ w_hat > _NONSUPPORT_MARGIN)
    per_sample = []
    holds = True
    for k in nonsupport:
        ratios = []
        for rec in in_window:
            scores = z @ rec.w
            gamma = scores.min()
            if gamma <= 0:
                ratios.append(-math.inf)
            else:
                ratios.append(float(scores[k] / gamma))
        worst = float(min(ratios))
        per_sample.append((int(k), worst))
        holds = holds and worst >= rho0
    return ConditionReport(rho0, gamma_tilde_star,
                           (gamma_tilde_star, float(gamma_tilde_hi)),
                           per_sample, holds)


def default_condition_window(alpha: float, depth: int,
                             target: float) -> tuple[float, float]:
    """[alpha^(D/2), target]: a concrete sub-alpha^D growth for the window
    floor; callers may substitute any other bound."""
    return alpha ** (depth / 2.0), target


def accuracy_vs_init_fit(points) -> tuple[float, float, float]:
    """Least squares of log(gamma_tilde) against log(alpha^D).

    ``points`` is a list of (alpha, depth, gamma_tilde) triples; returns
    (slope, intercept, rms residual).
    """
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least two points to fit")
    x = np.array([d * math.log(a) for a, d, _ in pts])
    y = np.array([math.log(g) for _, _, g in pts])
    design = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((design @ (slope, intercept) - y) ** 2)))
    return float(slope), float(intercept), resid


def threshold_gamma_tilde(records, data: Dataset, w_l1,
                          threshold: float = 0.05) -> float:
    """Smallest recorded gamma_tilde whose margin-rescaled excess l1 norm is
    at or below the threshold."""
    n1 = float(np.sum(np.abs(w_l1)))
    for rec in records:
        gamma = float(np.min(data.effective @ rec.w))
        if gamma <= 0:
            continue
        if np.sum(np.abs(rec.w)) / gamma / n1 - 1.0 <= threshold:
            return rec.gamma_tilde
    raise ValueError(f"no recorded step reaches excess l1 <= {threshold}")


def first_metric_exceed(records, metric: str, threshold: float) -> float:
    """Smallest recorded gamma_tilde where a per-record metric exceeds the
    threshold (e.g. kernel_distance crossing 0.1 marks leaving the kernel
    regime)."""
    for rec in records:
        if rec.metrics.get(metric, -math.inf) > threshold:
            return rec.gamma_tilde
    raise ValueError(f"metric {metric!r} never exceeds {threshold}")


def suggest_eta(data: Dataset, depth: int, alpha: float,
                dgamma_per_step: float = 0.25) -> float:
    """Step size giving roughly ``dgamma_per_step`` of gamma_tilde per early
    normalized step (early rate is 2 D^2 alpha^(2D-2) |mean z|^2), capped at
    1e-3 for flow fidelity."""
    mean_z = data.effective.mean(axis=0)
    rate = 2.0 * depth**2 * alpha ** (2 * depth - 2) * float(mean_z @ mean_z)
    if rate <= 0.0:
        return 1e-3  # degenerate geometry; the run will reject the data
    return min(1e-3, dgamma_per_step / rate)


@dataclass
class SweepSpec:
    """Cartesian grid over (depth, alpha, stopping rule) for one dataset."""

    dataset: Dataset
    depths: list
    alphas: list
    rules: list
    eta: float | None = None  # None: suggest_eta per cell
    mode: str = "normalized_gd"
    max_steps: int = 5_000_000
    record_every: int = 1000
    metrics: tuple = ()
    workers: int = 1


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def to_json_rows(self):
        return self.rows


def _rule_key(rule: StoppingRule):
    return (rule.kind, rule.value)


def _sweep_cell(dataset, stats, depth, alpha, rule, spec_fields, references):
    eta = spec_fields["eta"] or suggest_eta(dataset, depth, alpha)
    target = schedule_target(alpha, depth, rule)
    row = {
        "depth": depth,
        "alpha": alpha,
        "rule_kind": rule.kind,
        "rule_value": rule.value,
        "gamma_tilde_target": target,
        "eta": eta,
    }
    try:
        cfg = StepperConfig(
            eta=eta,
            mode=spec_fields["mode"],
            max_steps=spec_fields["max_steps"],
            record_every=spec_fields["record_every"],
            gamma_tilde_target=target,
        )
        records = run(init_params(dataset.n_features, depth, alpha), dataset,
                      cfg, stats=stats, metrics=spec_fields["metrics"])
        final = records[-1]
        w_hat = margin_rescale(final.w, dataset)
        ex1, ex2 = excess_norms(w_hat, references["l1"], references["l2"])
        row.update({
            "steps": final.step,
            "gamma": final.gamma,
            "gamma_tilde": final.gamma_tilde,
            "log_flow_time": final.log_flow_time,
            "w": final.w.tolist(),
            "direction": (final.w / np.linalg.norm(final.w)).tolist(),
            "excess_l1": ex1,
            "excess_l2": ex2,
            "angle_to_l1_deg": angle_degrees(final.w, references["l1"]),
            "angle_to_l2_deg": angle_degrees(final.w, references["l2"]),
        })
        if rule.kind == "mu_scaled":
            q_ref = references["q"].get((depth, rule.value))
            if q_ref is not None:
                row["angle_to_qmu_deg"] = angle_degrees(final.w, q_ref)
        for name in spec_fields["metrics"]:
            row[name] = final.metrics.get(name)
        row["error"] = None
    except Exception as exc:  # cell errors recorded, sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(spec: SweepSpec,
              stats: DataStats | None = None) -> SweepResult:
    """One trajectory per (depth, alpha, rule) cell, with endpoint metrics
    against cached reference solutions.  Deterministic given the spec; cell
    errors are recorded in the row rather than aborting the sweep."""
    data = spec.dataset
    if stats is None:
        stats = compute_stats(data)
    references = {
        "l1": l1_max_margin(data).w,
        "l2": l2_max_margin(data).w,
        "q": {},
    }
    for rule in spec.rules:
        if rule.kind == "mu_scaled":
            for depth in spec.depths:
                key = (int(depth), rule.value)
                if key not in references["q"]:
                    references["q"][key] = q_mu_max_margin(
                        data, PenaltySpec(int(depth), rule.value)).w
    spec_fields = {
        "eta": spec.eta,
        "mode": spec.mode,
        "max_steps": spec.max_steps,
        "record_every": spec.record_every,
        "metrics": tuple(spec.metrics),
    }
    cells = [
        (int(depth), float(alpha), rule)
        for depth in spec.depths
        for alpha in spec.alphas
        for rule in spec.rules
    ]
    if spec.workers > 1:
        args = [(data, stats, d, a, r, spec_fields, references)
                for d, a, r in cells]
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_sweep_cell_star, args))
    else:
        rows = [_sweep_cell(data, stats, d, a, r, spec_fields, references)
                for d, a, r in cells]
    # assemble in key order so output is deterministic regardless of the
    # execution order
    order = sorted(range(len(cells)),
                   key=lambda i: (cells[i][0], cells[i][1],
                                  _rule_key(cells[i][2])))
    return SweepResult(rows=[rows[i] for i in order])


def _sweep_cell_star(args):
    return _sweep_cell(*args)
