"""Dataset ingestion, validation, label absorption, and cached statistics.

Labels are absorbed at load time: every downstream computation sees the
effective points ``z_n = y_n * x_n`` only, so a dataset is linearly
separable with positive margin iff some ``w`` has ``z_n @ w >= 1`` for all n.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed dataset file or invalid sample values."""


class NonSeparableError(ValueError):
    """Operation requires linearly separable data (positive margin)."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """N labeled points in R^d with labels pre-absorbed into the points.

    points:    (N, d) raw inputs
    labels:    (N,) values in {-1, +1}
    effective: (N, d) rows z_n = labels[n] * points[n]
    """

    points: np.ndarray
    labels: np.ndarray
    effective: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def n_features(self) -> int:
        return self.points.shape[1]

    def to_json_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "labels": [int(v) for v in self.labels],
        }


def make_dataset(points, labels=None) -> Dataset:
    """Validate raw arrays and absorb labels. Labels default to all +1."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.ndim != 2 or points.size == 0:
        raise DataError("points must be a non-empty N x d array")
    if labels is None:
        labels = np.ones(points.shape[0])
    labels = np.asarray(labels, dtype=float).ravel()
    if labels.shape[0] != points.shape[0]:
        raise DataError(
            f"{points.shape[0]} points but {labels.shape[0]} labels"
        )
    if not np.all(np.isfinite(points)):
        raise DataError("points contain NaN or Inf")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        bad = labels[~np.isin(labels, (-1.0, 1.0))][0]
        raise DataError(f"labels must be -1 or +1, got {bad}")
    effective = labels[:, None] * points
    return Dataset(_freeze(points), _freeze(labels), _freeze(effective))


def load_dataset(path, fmt: str | None = None) -> Dataset:
    """Load a dataset from JSON ({"points": [[...]], "labels": [...]})
    or CSV (one row per sample, last column is the label).

    ``fmt`` is inferred from the file extension when not given.
    """
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt == "json":
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(payload, dict) or "points" not in payload:
            raise DataError(f"{path}: expected an object with a 'points' key")
        rows = payload["points"]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise DataError(f"{path}: rows have inconsistent dimension")
        return make_dataset(rows, payload.get("labels"))
    if fmt == "csv":
        rows, labels = [], []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    values = [float(v) for v in row]
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
                rows.append(values[:-1])
                labels.append(values[-1])
        if not rows:
            raise DataError(f"{path}: no data rows")
        if any(len(r) != len(rows[0]) for r in rows):
            raise DataError(f"{path}: rows have inconsistent dimension")
        return make_dataset(rows, labels)
    raise DataError(f"unknown dataset format {fmt!r} (expected json or csv)")


@dataclass(frozen=True)
class DataStats:
    """Fixed per-dataset quantities used throughout.

    gamma2:         max l2 margin (0 when not separable)
    xbar_per_coord: column sums of |z_{n,i}|
    xbar:           max of xbar_per_coord
    xmax:           max_n ||z_n||_2
    separable:      whether a positive-margin separator exists
    witness:        unit vector achieving margin gamma2 (None otherwise)
    """

    gamma2: float
    xbar_per_coord: np.ndarray
    xbar: float
    xmax: float
    separable: bool
    witness: np.ndarray | None


def compute_stats(data: Dataset) -> DataStats:
    """Exact sums/maxima plus the certified l2 margin (margins module)."""
    from .margins import l2_max_margin

    z = data.effective
    xbar_per_coord = np.abs(z).sum(axis=0)
    xbar = float(xbar_per_coord.max())
    xmax = float(np.linalg.norm(z, axis=1).max())
    try:
        sol = l2_max_margin(data)
    except NonSeparableError:
        return DataStats(0.0, _freeze(xbar_per_coord), xbar, xmax, False, None)
    norm = float(np.linalg.norm(sol.w))
    witness = sol.w / norm
    return DataStats(1.0 / norm, _freeze(xbar_per_coord), xbar, xmax, True,
                     _freeze(witness))


# Small d=3, N=3 demonstration datasets (all labels +1).  Keys name the
# phenomenon each one exhibits at depth 2 (or 3 for the depth3_* pair).
BUNDLED_POINTS = {
    # unique l1 optimum; l1 and l2 share support vectors
    "unique_l1": [[0.3, 1.5, 1.0], [1.5, 3.0, 1.0], [1.0, 2.5, 1.0]],
    # a face of l1 optima; endpoint depends on initialization scale
    "degenerate_l1": [[0.5, 1.0, 1.0], [1.0, 1.5, 1.0], [1.5, 2.0, 0.5]],
    # support vectors switch between the l2 and l1 phases
    "support_switch": [[3.0, 1.0, 1.0], [2.7, 2.0, 1.5], [4.5, 2.6, 0.5]],
    # depth-3 runs that leave the q-path toward an l_{2/3} point
    "depth3_a": [[0.6, 0.7, 0.8], [0.7, 0.6, 0.6], [1.0, 0.5, 0.5]],
    "depth3_b": [[0.6, 0.7, 0.1], [0.4, 0.6, 0.6], [1.0, 0.5, 0.5]],
}


def bundled_dataset(name: str) -> Dataset:
    try:
        pts = BUNDLED_POINTS[name]
    except KeyError:
        raise DataError(
            f"unknown bundled dataset {name!r}; "
            f"choose from {sorted(BUNDLED_POINTS)}"
        ) from None
    return make_dataset(pts)


def random_uniform_dataset(n: int, d: int, seed: int) -> Dataset:
    """n points with coordinates ~ U(0, 1), labels all +1 (separable a.s.)."""
    rng = np.random.default_rng(seed)
    return make_dataset(rng.uniform(0.0, 1.0, size=(n, d)))


def sparse_random_dataset(n: int = 4, d: int = 10, seed: int = 0) -> Dataset:
    """First coordinate fixed at 1, remaining d-1 coordinates ~ U(0, 0.5).

    The l1 and l_{2/D} max-margin solutions coincide on this family, which
    makes it suitable for depth comparisons at a shared rich-limit target.
    """
    rng = np.random.default_rng(seed)
    pts = np.concatenate(
        [np.ones((n, 1)), rng.uniform(0.0, 0.5, size=(n, d - 1))], axis=1
    )
    return make_dataset(pts)
