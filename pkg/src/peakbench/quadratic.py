"""Exact algebra on convex-quadratic functions.

A :class:`QuadraticForm` represents ``f(x) = 0.5 (x - x*)^T H (x - x*) + y*``
with ``H`` symmetric positive definite. Everything here is a pure function of
immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from peakbench.errors import NotPositiveDefiniteError

SYMMETRY_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """One convex-quadratic component ``(H, x*, y*)``."""

    hessian: np.ndarray
    optimum_x: np.ndarray
    optimum_value: float = 0.0

    def __post_init__(self) -> None:
        H = np.array(self.hessian, dtype=float)
        x = np.array(self.optimum_x, dtype=float).reshape(-1)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError(f"hessian must be square, got shape {H.shape}")
        d = H.shape[0]
        if d < 1:
            raise ValueError("dimension must be at least 1")
        if x.shape != (d,):
            raise ValueError(f"optimum_x has length {x.size}, expected {d}")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(x))):
            raise ValueError("non-finite entries in quadratic form")
        y = float(self.optimum_value)
        if not np.isfinite(y):
            raise ValueError("optimum_value must be finite")
        scale = np.max(np.abs(H))
        if np.max(np.abs(H - H.T)) > SYMMETRY_RTOL * scale:
            raise ValueError("hessian not symmetric")
        H = 0.5 * (H + H.T)
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("hessian not positive definite") from exc
        object.__setattr__(self, "hessian", _frozen(H))
        object.__setattr__(self, "optimum_x", _frozen(x))
        object.__setattr__(self, "optimum_value", y)

    @property
    def dim(self) -> int:
        return self.optimum_x.shape[0]

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def same_as(self, other: "QuadraticForm") -> bool:
        """Bitwise equality of all three fields."""
        return (
            np.array_equal(self.hessian, other.hessian)
            and np.array_equal(self.optimum_x, other.optimum_x)
            and self.optimum_value == other.optimum_value
        )


def _as_point(q: QuadraticForm, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != q.dim:
        raise ValueError(f"point has length {x.shape[0]}, expected {q.dim}")
    return x


def _check_same_dim(q1: QuadraticForm, q2: QuadraticForm) -> None:
    if q1.dim != q2.dim:
        raise ValueError(f"dimension mismatch: {q1.dim} vs {q2.dim}")


def half_form(diff: np.ndarray, H: np.ndarray) -> np.ndarray:
    """``0.5 * diff^T H diff`` over the last axes, with broadcasting.

    ``diff`` has shape ``(..., d)`` and ``H`` shape ``(..., d, d)``. The sum
    runs in a fixed elementwise order, so a given (diff, H) pair yields the
    same bits whatever the batch shape. Every evaluation path goes through
    here for that reason.
    """
    d = diff.shape[-1]
    row = H[..., :, 0] * diff[..., None, 0]
    for b in range(1, d):
        row = row + H[..., :, b] * diff[..., None, b]
    term = row * diff
    acc = term[..., 0]
    for a in range(1, d):
        acc = acc + term[..., a]
    return 0.5 * acc


def evaluate(q: QuadraticForm, x) -> float:
    diff = _as_point(q, x) - q.optimum_x
    return float(half_form(diff, q.hessian) + q.optimum_value)


def gradient(q: QuadraticForm, x) -> np.ndarray:
    return q.hessian @ (_as_point(q, x) - q.optimum_x)


def _spd_solve(H: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        factor = cho_factor(H, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix not positive definite") from exc
    return cho_solve(factor, b, check_finite=False)


def interpolate_optimum(q1: QuadraticForm, q2: QuadraticForm, t: float) -> np.ndarray:
    """Minimizer of ``(1-t) f1 + t f2``.

    Solves ``[(1-t)H1 + tH2] x = (1-t)H1 x1* + t H2 x2*`` by Cholesky.
    """
    _check_same_dim(q1, q2)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if t == 0.0:
        return q1.optimum_x.copy()
    if t == 1.0:
        return q2.optimum_x.copy()
    H = (1.0 - t) * q1.hessian + t * q2.hessian
    b = (1.0 - t) * (q1.hessian @ q1.optimum_x) + t * (q2.hessian @ q2.optimum_x)
    return _spd_solve(H, b)


def interpolate(q1: QuadraticForm, q2: QuadraticForm, t: float) -> QuadraticForm:
    """Canonical form of ``(1-t) f1 + t f2``."""
    if t == 0.0:
        _check_same_dim(q1, q2)
        return q1
    if t == 1.0:
        _check_same_dim(q1, q2)
        return q2
    x = interpolate_optimum(q1, q2, t)
    H = (1.0 - t) * q1.hessian + t * q2.hessian
    y = (1.0 - t) * evaluate(q1, x) + t * evaluate(q2, x)
    return QuadraticForm(H, x, y)


def add(q1: QuadraticForm, q2: QuadraticForm) -> QuadraticForm:
    """Canonical form of ``f1 + f2``."""
    _check_same_dim(q1, q2)
    if q1.same_as(q2):
        # exact: doubling keeps the optimum
        return QuadraticForm(2.0 * q1.hessian, q1.optimum_x, 2.0 * q1.optimum_value)
    H = q1.hessian + q2.hessian
    b = q1.hessian @ q1.optimum_x + q2.hessian @ q2.optimum_x
    x = _spd_solve(H, b)
    y = evaluate(q1, x) + evaluate(q2, x)
    return QuadraticForm(H, x, y)


def condition_number(H) -> float:
    H = np.asarray(H, dtype=float)
    eig = np.linalg.eigvalsh(0.5 * (H + H.T))
    if eig[0] <= 0.0:
        raise NotPositiveDefiniteError("condition number requires a positive definite matrix")
    return float(eig[-1] / eig[0])
