"""Bi-objective quality indicators on normalized objective vectors.

Both indicators are written as a sum of per-point terms that depend only on a
point and its neighbours in the sorted front, which gives exact closed forms
and cheap incremental updates.

R2 uses the scalar weight ``w`` in ``[0, 1]`` with weight vector ``(w, 1-w)``,
the Chebyshev utility ``max(w a1, (1-w) a2)`` with ``a = y - z`` and uniform
measure on ``w``. Lower is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from peakbench.archive import InsertResult, NondominatedArchive2D, nondominated_indices

CLAMP_TOL = 1e-12


class Indicator(str, Enum):
    HYPERVOLUME = "hv"
    EXACT_R2 = "r2"


@dataclass(frozen=True)
class IndicatorKind:
    kind: Indicator
    reference: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Indicator(self.kind))
        ref = (float(self.reference[0]), float(self.reference[1]))
        if not all(math.isfinite(r) for r in ref):
            raise ValueError("reference must be finite")
        object.__setattr__(self, "reference", ref)

    @classmethod
    def hypervolume(cls, reference=(1.0, 1.0)) -> "IndicatorKind":
        return cls(Indicator.HYPERVOLUME, tuple(reference))

    @classmethod
    def exact_r2(cls, ideal=(0.0, 0.0)) -> "IndicatorKind":
        return cls(Indicator.EXACT_R2, tuple(ideal))

    @classmethod
    def parse(cls, name: str) -> "IndicatorKind":
        kind = Indicator(name.lower())
        return cls.hypervolume() if kind is Indicator.HYPERVOLUME else cls.exact_r2()

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def higher_is_better(self) -> bool:
        return self.kind is Indicator.HYPERVOLUME

    def value(self, front) -> float:
        if self.kind is Indicator.HYPERVOLUME:
            return hypervolume2d(front, self.reference)
        return exact_r2(front, self.reference)

    def epsilon(self, y_l, y_r) -> float:
        return segment_epsilon(self, y_l, y_r)

    def tracker(self) -> "IndicatorTracker":
        if self.kind is Indicator.HYPERVOLUME:
            return HypervolumeTracker(self.reference)
        return R2Tracker(self.reference)


HV = IndicatorKind.hypervolume()
R2 = IndicatorKind.exact_r2()


def normalize(y, ideal, nadir):
    """Affine map sending ``ideal`` to ``(0, 0)`` and ``nadir`` to ``(1, 1)``."""
    ideal = np.asarray(ideal, dtype=float)
    nadir = np.asarray(nadir, dtype=float)
    extent = nadir - ideal
    if np.any(extent <= 0):
        raise ValueError("nadir must exceed ideal in every objective")
    return (np.asarray(y, dtype=float) - ideal) / extent


def ideal_of(y_l, y_r) -> tuple[float, float]:
    return min(y_l[0], y_r[0]), min(y_l[1], y_r[1])


def nadir_of(y_l, y_r) -> tuple[float, float]:
    return max(y_l[0], y_r[0]), max(y_l[1], y_r[1])


def _sorted_front(front) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(front, NondominatedArchive2D):
        return np.asarray(front.y1, dtype=float), np.asarray(front.y2, dtype=float)
    pts = np.asarray(front, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("front points must be finite")
    keep = nondominated_indices(pts)
    return pts[keep, 0], pts[keep, 1]


# ---------------------------------------------------------------- hypervolume

def _hv_term(p, nxt, ref) -> float:
    right = ref[0] if nxt is None else min(nxt[0], ref[0])
    return max(0.0, right - p[0]) * max(0.0, ref[1] - p[1])


def hypervolume2d(front, reference=(1.0, 1.0)) -> float:
    """Area dominated by ``front`` and dominating ``reference`` (single sweep)."""
    y1, y2 = _sorted_front(front)
    if y1.size == 0:
        return 0.0
    r1, r2 = float(reference[0]), float(reference[1])
    right = np.minimum(np.append(y1[1:], r1), r1)
    width = np.maximum(right - y1, 0.0)
    height = np.maximum(r2 - y2, 0.0)
    return math.fsum(width * height)


# ---------------------------------------------------------------- exact R2

def _int_w(lo: float, hi: float) -> float:
    """Integral of ``w`` over ``[lo, hi]``."""
    return (hi - lo) * (hi + lo) * 0.5 if hi > lo else 0.0


def _int_1mw(lo: float, hi: float) -> float:
    """Integral of ``1 - w`` over ``[lo, hi]``."""
    return (hi - lo) * (1.0 - 0.5 * (hi + lo)) if hi > lo else 0.0


def _switch(a1: float, a2: float) -> float:
    s = a1 + a2
    return a2 / s if s > 0 else 0.5


def _r2_term(prev, p, nxt) -> float:
    """Contribution of ``p`` to the R2 integral (coordinates relative to the ideal).

    Point ``p`` is the best one for weights between the corner it forms with
    ``nxt`` and the corner it forms with ``prev``.
    """
    a1, a2 = p
    if a1 == 0.0 and a2 == 0.0:
        return 0.0
    wp = _switch(a1, a2)
    upper = 1.0 if prev is None else _switch(a1, prev[1])
    lower = 0.0 if nxt is None else _switch(nxt[0], a2)
    return a1 * _int_w(wp, upper) + a2 * _int_1mw(lower, wp)


def _shift_to_ideal(y1: np.ndarray, y2: np.ndarray, ideal) -> tuple[np.ndarray, np.ndarray]:
    a1 = y1 - float(ideal[0])
    a2 = y2 - float(ideal[1])
    if a1.size and (a1.min() < -CLAMP_TOL or a2.min() < -CLAMP_TOL):
        raise ValueError("front point lies beyond the ideal reference point")
    return np.maximum(a1, 0.0), np.maximum(a2, 0.0)


def exact_r2(front, ideal=(0.0, 0.0)) -> float:
    """Exact R2 of ``front`` with respect to ``ideal`` (closed form)."""
    y1, y2 = _sorted_front(front)
    if y1.size == 0:
        raise ValueError("R2 of an empty front is undefined")
    a1, a2 = _shift_to_ideal(y1, y2, ideal)
    if np.any((a1 == 0.0) & (a2 == 0.0)):
        return 0.0
    # clamping can merge points; re-filter
    if np.any(np.diff(a1) <= 0) or np.any(np.diff(a2) >= 0):
        keep = nondominated_indices(np.column_stack([a1, a2]))
        a1, a2 = a1[keep], a2[keep]
    wp = a2 / (a1 + a2)
    upper = np.ones_like(wp)
    lower = np.zeros_like(wp)
    if a1.size > 1:
        upper[1:] = a2[:-1] / (a1[1:] + a2[:-1])
        lower[:-1] = a2[:-1] / (a1[1:] + a2[:-1])
    top = np.maximum(upper - wp, 0.0) * (upper + wp) * 0.5 * a1
    bottom = np.maximum(wp - lower, 0.0) * (1.0 - 0.5 * (wp + lower)) * a2
    return math.fsum(top) + math.fsum(bottom)


def r2_utility(front, w: float, ideal=(0.0, 0.0)) -> float:
    """Best Chebyshev utility of ``front`` for the single weight ``w``."""
    pts = np.asarray(front, dtype=float).reshape(-1, 2) - np.asarray(ideal, dtype=float)
    return float(np.min(np.maximum(w * pts[:, 0], (1.0 - w) * pts[:, 1])))


# ---------------------------------------------------------------- segment bound

def segment_epsilon(kind: IndicatorKind, y_l, y_r) -> float:
    """Upper bound on the indicator gain from points inside the box spanned by ``y_l, y_r``."""
    l1, l2 = float(y_l[0]), float(y_l[1])
    r1, r2 = float(y_r[0]), float(y_r[1])
    if l1 > r1 or l2 < r2:
        raise ValueError("need y_l better in the first and y_r better in the second objective")
    if l1 == r1 or l2 == r2:
        return 0.0
    if kind.kind is Indicator.HYPERVOLUME:
        ref1, ref2 = kind.reference
        return max(0.0, min(r1, ref1) - l1) * max(0.0, min(l2, ref2) - r2)
    z1, z2 = kind.reference
    return _r2_box_gap(max(l1 - z1, 0.0), max(l2 - z2, 0.0), max(r1 - z1, 0.0), max(r2 - z2, 0.0))


def _r2_box_gap(a1: float, a2: float, b1: float, b2: float) -> float:
    # a = left point, b = right point, corner (b1, a2), local ideal (a1, b2);
    # the box only matters for weights between the two points' switch weights
    wa = _switch(a1, a2)
    wb = _switch(b1, b2)
    wc = _switch(b1, a2)
    two_point = a2 * _int_1mw(wc, wa) + b1 * _int_w(wb, wc)
    if a1 == 0.0 and b2 == 0.0:
        return two_point
    wl = _switch(a1, b2)
    with_ideal = a1 * _int_w(wl, wa) + b2 * _int_1mw(wb, wl)
    return max(two_point - with_ideal, 0.0)


# ---------------------------------------------------------------- incremental trackers

class IndicatorTracker:
    """Indicator value of an archive kept in sync with inserts via neighbour terms."""

    def __init__(self, reference) -> None:
        self.reference = (float(reference[0]), float(reference[1]))
        self.value = self.empty_value

    empty_value = 0.0

    def _term(self, prev, p, nxt) -> float:
        raise NotImplementedError

    def _transform(self, p):
        return p

    def recompute(self, archive: NondominatedArchive2D) -> float:
        raise NotImplementedError

    def _window(self, seq) -> float:
        # terms of the interior elements of ``seq`` (ends are context only)
        total = 0.0
        for i in range(1, len(seq) - 1):
            if seq[i] is not None:
                total += self._term(seq[i - 1], seq[i], seq[i + 1])
        return total

    def update(self, archive: NondominatedArchive2D, result: InsertResult) -> float:
        """Apply the change described by ``result`` (already applied to ``archive``)."""
        if not result.inserted:
            return self.value
        k = result.index
        n = len(archive)
        pt = self._transform
        prev = pt(archive.point(k - 1)) if k > 0 else None
        prevprev = pt(archive.point(k - 2)) if k > 1 else None
        nxt = pt(archive.point(k + 1)) if k + 1 < n else None
        nxtnxt = pt(archive.point(k + 2)) if k + 2 < n else None
        new = pt(archive.point(k))
        before = [prevprev, prev, *(pt(r) for r in result.removed), nxt, nxtnxt]
        after = [prevprev, prev, new, nxt, nxtnxt]
        delta = self._window(after) - self._window(before)
        if n == 1:
            self.value = self._term(None, new, None)
        else:
            self.value += delta
        return self.value


class HypervolumeTracker(IndicatorTracker):
    empty_value = 0.0

    def _term(self, prev, p, nxt) -> float:
        return _hv_term(p, nxt, self.reference)

    def recompute(self, archive: NondominatedArchive2D) -> float:
        self.value = hypervolume2d(archive, self.reference)
        return self.value


class R2Tracker(IndicatorTracker):
    # R2 of the empty set is taken as +inf (worst possible)
    empty_value = math.inf

    def _transform(self, p):
        return (max(p[0] - self.reference[0], 0.0), max(p[1] - self.reference[1], 0.0))

    def _term(self, prev, p, nxt) -> float:
        return _r2_term(prev, p, nxt)

    def recompute(self, archive: NondominatedArchive2D) -> float:
        if not len(archive):
            self.value = math.inf
            return self.value
        shifted = np.maximum(archive.as_array() - np.asarray(self.reference), 0.0)
        self.value = exact_r2(shifted, (0.0, 0.0))
        return self.value
