"""The depth-indexed penalty family interpolating between l1 and l2.

For depth D > 2 the building block is the odd increasing map

    h_D(z) = (1 - z)^(-D/(D-2)) - (1 + z)^(-D/(D-2)),   z in (-1, 1),

whose inverse is the derivative of the per-coordinate penalty q_D.  For
D = 2 everything is available in closed form through arcsinh.  The full
penalty is Q(w) = sum_i q_D(w_i / mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# h_D overflows as |z| -> 1; inputs beyond this are rejected, not extrapolated
_H_DOMAIN_EDGE = 1.0 - 1e-12
_SIMPSON_TOL = 1e-10
_INV_TOL = 1e-12


class PenaltyDomainError(ValueError):
    """Argument outside the open interval (-1, 1) where h_D is defined."""


def _check_depth(depth: int, minimum: int = 2) -> int:
    if not isinstance(depth, (int, np.integer)) or isinstance(depth, bool):
        raise ValueError(f"depth must be an integer >= {minimum}, got {depth!r}")
    if depth < minimum:
        raise ValueError(f"depth must be >= {minimum}, got {depth}")
    return int(depth)


@dataclass(frozen=True)
class PenaltySpec:
    """Depth D >= 2 and scale mu > 0 selecting one member of the family."""

    depth: int
    mu: float

    def __post_init__(self):
        _check_depth(self.depth)
        if not (self.mu > 0):
            raise ValueError(f"mu must be positive, got {self.mu}")


def h_value(z, depth: int):
    """h_D(z) for |z| < 1 and D > 2.  Odd, increasing, h_D(0) = 0."""
    depth = _check_depth(depth, minimum=3)
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > _H_DOMAIN_EDGE):
        raise PenaltyDomainError(f"|z| must be < {_H_DOMAIN_EDGE}")
    p = depth / (depth - 2)
    out = (1.0 - z) ** (-p) - (1.0 + z) ** (-p)
    return float(out) if out.ndim == 0 else out


def h_derivative(z, depth: int):
    """dh_D/dz; bounded below by 2D/(D-2) on (-1, 1)."""
    depth = _check_depth(depth, minimum=3)
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > _H_DOMAIN_EDGE):
        raise PenaltyDomainError(f"|z| must be < {_H_DOMAIN_EDGE}")
    p = depth / (depth - 2)
    out = p * ((1.0 - z) ** (-p - 1) + (1.0 + z) ** (-p - 1))
    return float(out) if out.ndim == 0 else out


def _h_inverse_scalar(s: float, depth: int) -> float:
    if s == 0.0:
        return 0.0
    if s < 0.0:
        return -_h_inverse_scalar(-s, depth)
    p = depth / (depth - 2.0)
    lo, hi = 0.0, _H_DOMAIN_EDGE
    # initial guess: small-s slope 2p, large-s tail h(z) ~ (1-z)^(-p)
    z = s / (2.0 * p) if s <= 2.0 * p else 1.0 - s ** (-1.0 / p)
    z = min(max(z, lo), hi)
    for _ in range(200):
        f = (1.0 - z) ** (-p) - (1.0 + z) ** (-p) - s
        if f > 0.0:
            hi = z
        else:
            lo = z
        if abs(f) <= _INV_TOL * max(1.0, abs(s)):
            return z
        deriv = p * ((1.0 - z) ** (-p - 1.0) + (1.0 + z) ** (-p - 1.0))
        z_new = z - f / deriv
        if not (lo < z_new < hi):
            z_new = 0.5 * (lo + hi)  # Newton left the bracket: bisect
        if z_new == z:
            break
        z = z_new
    return z


def h_inverse(s, depth: int):
    """Inverse of h_D: the unique z in (-1, 1) with h_D(z) = s.

    Accurate to |h_D(z) - s| <= 1e-12 * max(1, |s|).
    """
    depth = _check_depth(depth, minimum=3)
    s = np.asarray(s, dtype=float)
    if s.ndim == 0:
        return _h_inverse_scalar(float(s), depth)
    out = np.empty_like(s)
    flat, oflat = s.ravel(), out.ravel()
    for i in range(flat.size):
        oflat[i] = _h_inverse_scalar(flat[i], depth)
    return out


def _adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, depth_left):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol or depth_left <= 0:
        return left + right + err / 15.0
    return (
        _adaptive_simpson(f, a, fa, m, fm, lm, flm, left, tol / 2.0,
                          depth_left - 1)
        + _adaptive_simpson(f, m, fm, b, fb, rm, frm, right, tol / 2.0,
                            depth_left - 1)
    )


def _integrate(f, a: float, b: float, tol: float) -> float:
    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, 48)


def _antiderivative_gap(a: float, q: float) -> float:
    """(1-a)^(-q) + (1+a)^(-q) - 2, evaluated without cancellation.

    This is the integral of h with exponent parameter q = 2/(D-2); the
    naive form loses all relative precision for small a, which matters
    because barrier solvers multiply penalty values by weights up to 1e18.
    """
    if abs(a) <= 1e-4:
        return q * (q + 1.0) * a * a * (
            1.0 + (q + 2.0) * (q + 3.0) * a * a / 12.0
        )
    return math.expm1(-q * math.log1p(-a)) + math.expm1(-q * math.log1p(a))


def _q_scalar(zi: float, depth: int) -> float:
    # integral of h^{-1} from 0 to z by parts: z*a - int_0^a h(u) du with
    # a = h^{-1}(z); the remaining integral is elementary
    a = _h_inverse_scalar(zi, depth)
    q = 2.0 / (depth - 2.0)
    return zi * a - _antiderivative_gap(a, q) / q


def q_value(z, depth: int):
    """Per-coordinate penalty q_D.  Even, convex, q_D(0) = 0.

    D = 2 uses the arcsinh closed form; D > 2 evaluates the integral of
    h_D^{-1} in closed form through integration by parts (cross-checked
    against q_value_quadrature in the test suite).
    """
    depth = _check_depth(depth)
    z_arr = np.asarray(z, dtype=float)
    if depth == 2:
        # 2 - sqrt(4 + z^2) rewritten as -z^2/(2 + sqrt(4 + z^2)) to avoid
        # cancellation at small z (the difference is O(z^2) near 0)
        out = z_arr * np.arcsinh(z_arr / 2.0) \
            - z_arr**2 / (2.0 + np.sqrt(4.0 + z_arr**2))
        return float(out) if out.ndim == 0 else out
    if z_arr.ndim == 0:
        return _q_scalar(float(z_arr), depth)
    out = np.empty_like(z_arr)
    flat, oflat = z_arr.ravel(), out.ravel()
    for i in range(flat.size):
        oflat[i] = _q_scalar(flat[i], depth)
    return out


def q_value_quadrature(z: float, depth: int) -> float:
    """Adaptive-Simpson integral of h_D^{-1} over [0, z], abs tol 1e-10.

    The direct route to q_D for D > 2; q_value's closed form must agree.
    """
    depth = _check_depth(depth, minimum=3)
    return _integrate(lambda s: _h_inverse_scalar(s, depth), 0.0, float(z),
                      _SIMPSON_TOL)


def q_derivative(z, depth: int):
    """dq_D/dz: arcsinh(z/2) for D = 2, h_D^{-1}(z) for D > 2."""
    depth = _check_depth(depth)
    if depth == 2:
        z = np.asarray(z, dtype=float)
        out = np.arcsinh(z / 2.0)
        return float(out) if out.ndim == 0 else out
    return h_inverse(z, depth)


def q_second_derivative(z, depth: int):
    """d^2 q_D / dz^2; strictly positive, so q_D is strictly convex."""
    depth = _check_depth(depth)
    z = np.asarray(z, dtype=float)
    if depth == 2:
        out = 1.0 / np.sqrt(4.0 + z**2)
        return float(out) if out.ndim == 0 else out
    inv = h_inverse(z, depth)
    return 1.0 / h_derivative(inv, depth)


def penalty_value(w, spec: PenaltySpec) -> float:
    """Q(w) = sum_i q_D(w_i / mu)."""
    w = np.asarray(w, dtype=float)
    return float(np.sum(q_value(w / spec.mu, spec.depth)))


def penalty_gradient(w, spec: PenaltySpec) -> np.ndarray:
    """Coordinate-wise (1/mu) * q_D'(w_i / mu)."""
    w = np.asarray(w, dtype=float)
    return np.asarray(q_derivative(w / spec.mu, spec.depth)) / spec.mu


def penalty_hessian_diag(w, spec: PenaltySpec) -> np.ndarray:
    """Diagonal of the (separable) Hessian of Q at w."""
    w = np.asarray(w, dtype=float)
    return np.asarray(q_second_derivative(w / spec.mu, spec.depth)) / spec.mu**2
