"""Independent brute-force oracles the solver tests compare against.

These deliberately share no code with the production solvers: the l2 margin
is maximized over a dense grid of unit directions, and the l1 problem is
solved by enumerating every basic feasible vertex of its standard-form LP.
"""

import itertools

import numpy as np


def sphere_grid_directions(d: int, step_deg: float = 0.5) -> np.ndarray:
    """All unit vectors on a step_deg grid (d <= 3)."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        theta = np.deg2rad(np.arange(0.0, 360.0, step_deg))
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if d == 3:
        az = np.deg2rad(np.arange(0.0, 360.0, step_deg))
        el = np.deg2rad(np.arange(-90.0, 90.0 + step_deg, step_deg))
        a, e = np.meshgrid(az, el, indexing="ij")
        return np.stack([
            (np.cos(e) * np.cos(a)).ravel(),
            (np.cos(e) * np.sin(a)).ravel(),
            np.sin(e).ravel(),
        ], axis=1)
    raise ValueError("grid oracle supports d <= 3 only")


def sphere_grid_max_margin(z: np.ndarray, step_deg: float = 0.5):
    """(margin, direction) maximizing min_n z_n @ u over grid unit vectors."""
    dirs = sphere_grid_directions(z.shape[1], step_deg)
    margins = (dirs @ z.T).min(axis=1)
    best = int(np.argmax(margins))
    return float(margins[best]), dirs[best]


def l1_vertex_enumeration(z: np.ndarray):
    """Exact optimum of min ||w||_1 s.t. z @ w >= 1 by enumerating all basic
    feasible solutions of the split standard form.  Returns (objective,
    list of optimal vertex w's), or (None, []) when infeasible."""
    n, d = z.shape
    a = np.hstack([z, -z, -np.eye(n)])
    c = np.concatenate([np.ones(2 * d), np.zeros(n)])
    b = np.ones(n)
    best_obj, best_ws = None, []
    for cols in itertools.combinations(range(2 * d + n), n):
        basis = a[:, cols]
        if abs(np.linalg.det(basis)) < 1e-12:
            continue
        xb = np.linalg.solve(basis, b)
        if xb.min() < -1e-9:
            continue
        x = np.zeros(2 * d + n)
        x[list(cols)] = xb
        obj = float(c @ x)
        w = x[:d] - x[d:2 * d]
        if best_obj is None or obj < best_obj - 1e-12:
            best_obj, best_ws = obj, [w]
        elif abs(obj - best_obj) <= 1e-9:
            if all(np.max(np.abs(w - u)) > 1e-9 for u in best_ws):
                best_ws.append(w)
    return best_obj, best_ws


def central_difference_gradient(fn, x: np.ndarray, h: float = 1e-5):
    """Central finite differences of a scalar function."""
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g
