"""Dominance relations and a sorted bi-objective nondominated archive."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator

import numpy as np
from sortedcontainers import SortedList

_INF = math.inf


class Dominance(Enum):
    STRICT = "strict"
    WEAK = "weak"
    NONE = "none"


def dominates(a, b) -> Dominance:
    """Relation of ``a`` to ``b`` under minimization.

    ``WEAK`` means no worse everywhere and better somewhere but not everywhere;
    equal vectors give ``NONE``.
    """
    a1, a2 = float(a[0]), float(a[1])
    b1, b2 = float(b[0]), float(b[1])
    if a1 < b1 and a2 < b2:
        return Dominance.STRICT
    if a1 <= b1 and a2 <= b2 and (a1 < b1 or a2 < b2):
        return Dominance.WEAK
    return Dominance.NONE


@dataclass
class InsertResult:
    inserted: bool
    index: int = -1
    removed: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.inserted


class NondominatedArchive2D:
    """Mutually nondominated points, ``y1`` strictly increasing and ``y2`` strictly decreasing.

    Backed by a blocked sorted list, so locate, insert and delete are
    logarithmic. An optional payload travels with every point.
    """

    __slots__ = ("_points", "_payloads")

    def __init__(self, points=None) -> None:
        self._points = SortedList()
        # y1 values are unique within the archive
        self._payloads: dict[float, Any] = {}
        if points is not None:
            for p in points:
                self.insert(p)

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self._points)

    def __contains__(self, y) -> bool:
        return (float(y[0]), float(y[1])) in self._points

    @property
    def y1(self) -> list[float]:
        return [p[0] for p in self._points]

    @property
    def y2(self) -> list[float]:
        return [p[1] for p in self._points]

    @property
    def payloads(self) -> list[Any]:
        return [self._payloads.get(p[0]) for p in self._points]

    def payload(self, i: int) -> Any:
        return self._payloads.get(self._points[i][0])

    def point(self, i: int) -> tuple[float, float]:
        return self._points[i]

    def as_array(self) -> np.ndarray:
        return np.array(list(self._points), dtype=float).reshape(-1, 2)

    def weakly_dominated(self, y) -> bool:
        """True iff some archived point is ``<=`` ``y`` in both objectives."""
        return self._dominated(float(y[0]), float(y[1]))

    def _dominated(self, y1: float, y2: float) -> bool:
        # rightmost point with y1' <= y1 has the smallest y2' among candidates
        pts = self._points
        j = pts.bisect_right((y1, _INF)) - 1
        return j >= 0 and pts[j][1] <= y2

    def insert(self, y, payload: Any = None) -> bool:
        return self.insert_detailed(y, payload).inserted

    def insert_detailed(self, y, payload: Any = None) -> InsertResult:
        """Insert ``y`` unless weakly dominated; reports position and evicted points."""
        y1, y2 = float(y[0]), float(y[1])
        if not (math.isfinite(y1) and math.isfinite(y2)):
            raise ValueError(f"objective vector must be finite, got {(y1, y2)}")
        if self._dominated(y1, y2):
            return InsertResult(False)
        pts = self._points
        lo = pts.bisect_left((y1, -_INF))
        removed = []
        while lo < len(pts) and pts[lo][1] >= y2:
            old = pts.pop(lo)
            self._payloads.pop(old[0], None)
            removed.append(old)
        pts.add((y1, y2))
        if payload is not None:
            self._payloads[y1] = payload
        return InsertResult(True, lo, removed)

    def copy(self) -> "NondominatedArchive2D":
        other = NondominatedArchive2D()
        other._points = self._points.copy()
        other._payloads = dict(self._payloads)
        return other


def nondominated_filter(points) -> list[tuple[float, float]]:
    """Quadratic-time reference filter: unique points not weakly dominated by another."""
    pts = sorted({(float(a), float(b)) for a, b in points})
    out = []
    for p in pts:
        if not any(q != p and q[0] <= p[0] and q[1] <= p[1] for q in pts):
            out.append(p)
    return out


def nondominated_indices(points) -> np.ndarray:
    """Indices of the nondominated rows of ``points``, sorted by the first objective.

    Among exact duplicates the earliest row is kept.
    """
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    if P.shape[0] == 0:
        return np.empty(0, dtype=np.intp)
    order = np.lexsort((np.arange(P.shape[0]), P[:, 1], P[:, 0]))
    y2 = P[order, 1]
    best_before = np.concatenate(([np.inf], np.minimum.accumulate(y2)[:-1]))
    return order[y2 < best_before]
