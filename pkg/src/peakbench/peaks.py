"""Peak objectives: a min over quadratic components under a monotone transform.

A peak objective evaluates

    v(x)  = min_j [0.5 (x - x_j)^T H_j (x - x_j) + y_j]
    f(x)  = floor_h(s * v(x) ** (p / 2)) + offset

where ``floor_h(y) = h * floor(y / h)`` and ``h = 0`` disables rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from peakbench.errors import DegenerateInstanceError, InvariantError
from peakbench.quadratic import QuadraticForm, half_form

DEFAULT_LOWER = -5.0
DEFAULT_UPPER = 5.0
NEGATIVE_TOL = 1e-12
# max elements of the (n, J, d) difference tensor per chunk
_CHUNK_ELEMENTS = 1 << 21
# below this many components a direct evaluation beats screening
_SCREEN_MIN_COMPONENTS = 2


def discretize(y, h: float):
    """Round ``y`` down to a multiple of ``h`` (identity for ``h == 0``)."""
    if h < 0:
        raise ValueError("step must be non-negative")
    if h == 0:
        return y
    return h * np.floor(y / h)


@dataclass(frozen=True)
class PeakTransform:
    scale: float = 1.0
    exponent: float = 2.0
    offset: float = 0.0
    step: float = 0.0

    def __post_init__(self) -> None:
        for name in ("scale", "exponent", "offset", "step"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")
        if self.step < 0:
            raise ValueError("step must be non-negative")

    def without_step(self) -> "PeakTransform":
        return PeakTransform(self.scale, self.exponent, self.offset, 0.0)

    def apply(self, v):
        """Map inner values ``v >= 0`` to objective values (vectorized)."""
        v = np.asarray(v, dtype=float)
        if np.any(v < -NEGATIVE_TOL):
            raise InvariantError(f"negative inner value {v.min()!r}")
        v = np.maximum(v, 0.0)
        if self.exponent == 2.0:
            u = self.scale * v
        else:
            u = self.scale * np.power(v, 0.5 * self.exponent)
        if self.step > 0:
            u = self.step * np.floor(u / self.step)
        out = u + self.offset
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class PeakObjective:
    components: tuple[QuadraticForm, ...]
    transform: PeakTransform = field(default_factory=PeakTransform)

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a peak objective needs at least one component")
        d = comps[0].dim
        if any(c.dim != d for c in comps):
            raise ValueError("all components must share one dimension")
        if min(c.optimum_value for c in comps) < 0:
            raise InvariantError("component optimum values must be non-negative")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def n_components(self) -> int:
        return len(self.components)

    @cached_property
    def hessians(self) -> np.ndarray:
        return np.stack([c.hessian for c in self.components])

    @cached_property
    def optima(self) -> np.ndarray:
        return np.stack([c.optimum_x for c in self.components])

    @cached_property
    def optimum_values(self) -> np.ndarray:
        return np.array([c.optimum_value for c in self.components])

    def component_values(self, X) -> np.ndarray:
        """Inner quadratic values, shape ``(n, J)`` for ``X`` of shape ``(n, d)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"points have dimension {X.shape[1]}, expected {self.dim}")
        n, J, d = X.shape[0], self.n_components, self.dim
        out = np.empty((n, J))
        rows = max(1, _CHUNK_ELEMENTS // (J * d))
        for lo in range(0, n, rows):
            diff = X[lo:lo + rows, None, :] - self.optima[None, :, :]
            out[lo:lo + rows] = half_form(diff, self.hessians)
        out += self.optimum_values
        return out

    @cached_property
    def _screen(self):
        """Monomial coefficients for screening and a per-feature error scale.

        With features ``phi(x) = (x_a x_b for a <= b, x_a, 1)`` the component
        values are ``phi(x) @ W``. The same expansion with absolute values
        bounds every term entering either this product or the exact
        evaluation, so ``|phi(x)| @ e`` bounds the rounding error of both.
        """
        H, C, y = self.hessians, self.optima, self.optimum_values
        d = self.dim
        A = np.abs(H)
        iu, ju = np.triu_indices(d)
        factor = np.where(iu == ju, 0.5, 1.0)
        HC = np.einsum("jab,jb->ja", H, C)
        AC = np.einsum("jab,jb->ja", A, np.abs(C))
        W = np.concatenate([(H[:, iu, ju] * factor).T, -HC.T,
                            (0.5 * np.einsum("ja,ja->j", C, HC) + y)[None]])
        W_abs = np.concatenate([(A[:, iu, ju] * factor).T, AC.T,
                                (0.5 * np.einsum("ja,ja->j", np.abs(C), AC) + np.abs(y))[None]])
        # generous multiple of the unit roundoff covering both computations,
        # taken over the worst component so one bound serves a whole row
        k = 2.0 * (W.shape[0] + 4 * d + 8) * np.finfo(float).eps
        return iu, ju, W, W_abs.max(axis=1) * k

    def _inner_screened(self, X: np.ndarray) -> np.ndarray:
        iu, ju, W, e_coef = self._screen
        J = W.shape[1]
        phi = np.concatenate([X[:, iu] * X[:, ju], X, np.ones((X.shape[0], 1))], axis=1)
        approx = phi @ W
        err = np.abs(phi) @ e_coef
        # the exact minimum lies below min(approx) + err, so only components
        # whose lower estimate approx - err reaches that level can attain it
        level = approx.min(axis=1) + 2.0 * err
        rows, cols = np.divmod(np.flatnonzero(approx <= level[:, None]), J)
        diff = X[rows] - self.optima[cols]
        vals = half_form(diff, self.hessians[cols]) + self.optimum_values[cols]
        out = np.full(X.shape[0], np.inf)
        np.minimum.at(out, rows, vals)
        bad = ~np.isfinite(out)
        if bad.any():
            out[bad] = self.component_values(X[bad]).min(axis=1)
        return out

    def inner(self, X) -> np.ndarray:
        """Inner minimum ``v(x)`` for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"points have dimension {X.shape[1]}, expected {self.dim}")
        n, J, d = X.shape[0], self.n_components, self.dim
        if J == 1:
            return self.component_values(X)[:, 0]
        out = np.empty(n)
        if J < _SCREEN_MIN_COMPONENTS:
            rows = max(1, _CHUNK_ELEMENTS // (J * d))
            for lo in range(0, n, rows):
                out[lo:lo + rows] = self.component_values(X[lo:lo + rows]).min(axis=1)
            return out
        rows = max(1, _CHUNK_ELEMENTS // (J * 4))
        for lo in range(0, n, rows):
            out[lo:lo + rows] = self._inner_screened(X[lo:lo + rows])
        return out

    def evaluate_many(self, X) -> np.ndarray:
        return self.transform.apply(self.inner(X))

    def __call__(self, x) -> float:
        return evaluate_peak(self, x)


def evaluate_peak(obj: PeakObjective, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != obj.dim:
        raise ValueError(f"point has length {x.shape[0]}, expected {obj.dim}")
    return float(obj.evaluate_many(x[None, :])[0])


def active_component(obj: PeakObjective, x) -> int:
    """Smallest index attaining the inner minimum at ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != obj.dim:
        raise ValueError(f"point has length {x.shape[0]}, expected {obj.dim}")
    return int(np.argmin(obj.component_values(x[None, :])[0]))


@dataclass(frozen=True, eq=False)
class BiObjectiveProblem:
    f1: PeakObjective
    f2: PeakObjective
    global_optimum_x1: np.ndarray
    global_optimum_x2: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    ideal: np.ndarray | None = None
    nadir: np.ndarray | None = None

    def __post_init__(self) -> None:
        d = self.f1.dim
        if self.f2.dim != d:
            raise ValueError("objectives must share one dimension")
        for name in ("global_optimum_x1", "global_optimum_x2"):
            v = np.array(getattr(self, name), dtype=float).reshape(-1)
            if v.shape != (d,):
                raise ValueError(f"{name} must have length {d}")
            v.flags.writeable = False
            object.__setattr__(self, name, v)
        lower = np.full(d, DEFAULT_LOWER) if self.lower is None else np.array(self.lower, float)
        upper = np.full(d, DEFAULT_UPPER) if self.upper is None else np.array(self.upper, float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.ideal is None or self.nadir is None:
            ideal, nadir = ideal_nadir(self)
        else:
            ideal = np.array(self.ideal, dtype=float)
            nadir = np.array(self.nadir, dtype=float)
            if np.any(ideal > nadir):
                raise ValueError("ideal must not exceed nadir")
        object.__setattr__(self, "ideal", ideal)
        object.__setattr__(self, "nadir", nadir)

    @property
    def dim(self) -> int:
        return self.f1.dim

    def evaluate_many(self, X) -> np.ndarray:
        """Objective vectors, shape ``(n, 2)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([self.f1.evaluate_many(X), self.f2.evaluate_many(X)])

    def __call__(self, x) -> tuple[float, float]:
        return evaluate(self, x)


def evaluate(problem: BiObjectiveProblem, x) -> tuple[float, float]:
    """Both objectives at ``x``; points outside the box are evaluated as well."""
    return evaluate_peak(problem.f1, x), evaluate_peak(problem.f2, x)


def ideal_nadir(problem: BiObjectiveProblem, *, discretized: bool = False):
    """Ideal and nadir from cross-evaluation of the two global optima.

    By default the rounding step is ignored, so the nadir is the smooth one.
    """
    f1, f2 = problem.f1, problem.f2
    if not discretized:
        f1 = PeakObjective(f1.components, f1.transform.without_step())
        f2 = PeakObjective(f2.components, f2.transform.without_step())
    x1, x2 = problem.global_optimum_x1, problem.global_optimum_x2
    ideal = np.array([evaluate_peak(f1, x1), evaluate_peak(f2, x2)])
    nadir = np.array([evaluate_peak(f1, x2), evaluate_peak(f2, x1)])
    if np.any(nadir <= ideal):
        raise DegenerateInstanceError(f"degenerate ideal {ideal} / nadir {nadir}")
    return ideal, nadir


def evaluate_grid(problem: BiObjectiveProblem, n: int = 101, dims: Sequence[int] = (0, 1)):
    """Evaluate a regular ``n x n`` grid over two coordinates of the box.

    Remaining coordinates are held at the box centre. Returns ``(X, Y)`` with
    ``X`` of shape ``(n*n, d)`` and ``Y`` of shape ``(n*n, 2)``.
    """
    d = problem.dim
    i, j = dims
    axes_i = np.linspace(problem.lower[i], problem.upper[i], n)
    axes_j = np.linspace(problem.lower[j], problem.upper[j], n)
    gi, gj = np.meshgrid(axes_i, axes_j, indexing="ij")
    X = np.tile(0.5 * (problem.lower + problem.upper), (n * n, 1))
    X[:, i] = gi.ravel()
    X[:, j] = gj.ravel()
    return X, problem.evaluate_many(X)
