"""Certified Pareto-front approximation by bisection over all peak pairs.

Every pair ``(j, k)`` of one component per objective has a local Pareto set
``x_t`` (minimizers of ``(1-t) q_j + t q_k``) whose image is a monotone curve.
Each curve piece between parameters ``t_l < t_r`` lies inside the box spanned
by its end images, so the indicator gain still available from that piece is
at most ``segment_epsilon`` of the box. The sum ``eps_total`` over the queued
pieces is therefore a bound on ``|I(true front) - I(archive)|``; the largest
piece is split until the bound drops below ``delta``.

Pieces are scored with the pair's own transformed components. At any ``x``
the full objectives are no worse than those values, and on the true front
they coincide with the values of the active pair, so the bound carries over.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from peakbench.archive import NondominatedArchive2D, nondominated_indices
from peakbench.errors import InvariantError, ResourceLimitError, SchemaError
from peakbench.indicators import Indicator, IndicatorKind
from peakbench.instance import ProblemInstance
from peakbench.peaks import BiObjectiveProblem, PeakObjective
from peakbench.quadratic import QuadraticForm, interpolate_optimum

DEFAULT_MAX_ITERATIONS = 10_000_000
DEFAULT_PAIR_CAP = 1_000_000
DEFAULT_BATCH = 64
EPS_FLOOR = 1e-16
FRONT_SCHEMA_VERSION = 1
_MAX_OOB_RECORDS = 100


def pareto_set_point(p1: QuadraticForm, p2: QuadraticForm, t: float) -> np.ndarray:
    """Point of the pair's Pareto set at parameter ``t``."""
    return interpolate_optimum(p1, p2, t)


@dataclass
class FrontPoint:
    t: float
    peak1: int
    peak2: int
    x: np.ndarray
    y: tuple[float, float]
    y_raw: tuple[float, float]


@dataclass
class FrontApproximation:
    """Archived front points (sorted by ``y1``) plus the certificate.

    Point data is kept column-wise: ``t``, ``peaks`` (pair indices), ``x``
    (decision vectors), ``y`` (normalized) and ``y_raw``.
    """

    t: np.ndarray
    peaks: np.ndarray
    x: np.ndarray
    y: np.ndarray
    y_raw: np.ndarray
    epsilon_total_final: float
    indicator_kind: IndicatorKind
    indicator_value: float
    contributing_pairs: int
    iterations: int
    early_stopped: bool
    delta: float
    ideal: np.ndarray | None = None
    nadir: np.ndarray | None = None
    instance_id: str | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)
    trace: list[tuple[int, float, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.y.shape[0])

    @property
    def points(self) -> list[FrontPoint]:
        return [
            FrontPoint(float(self.t[i]), int(self.peaks[i, 0]), int(self.peaks[i, 1]),
                       self.x[i].copy(), (float(self.y[i, 0]), float(self.y[i, 1])),
                       (float(self.y_raw[i, 0]), float(self.y_raw[i, 1])))
            for i in range(len(self))
        ]

    def objective_array(self) -> np.ndarray:
        return self.y.copy()

    def archive(self) -> NondominatedArchive2D:
        return NondominatedArchive2D(self.y)

    def to_document(self) -> dict:
        return {
            "schema_version": FRONT_SCHEMA_VERSION,
            "instance_id": self.instance_id,
            "indicator": self.indicator_kind.name,
            "reference": list(self.indicator_kind.reference),
            "delta": self.delta,
            "indicator_value": self.indicator_value,
            "epsilon_total_final": self.epsilon_total_final,
            "contributing_pairs": self.contributing_pairs,
            "iterations": self.iterations,
            "early_stopped": self.early_stopped,
            "ideal": None if self.ideal is None else self.ideal.tolist(),
            "nadir": None if self.nadir is None else self.nadir.tolist(),
            "diagnostics": self.diagnostics,
            "points": {
                "t": self.t.tolist(),
                "peak1": self.peaks[:, 0].tolist(),
                "peak2": self.peaks[:, 1].tolist(),
                "x": self.x.tolist(),
                "y": self.y.tolist(),
                "y_raw": self.y_raw.tolist(),
            },
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_document(), indent=indent, allow_nan=False)

    @classmethod
    def from_document(cls, doc: dict) -> "FrontApproximation":
        if doc.get("schema_version") != FRONT_SCHEMA_VERSION:
            raise SchemaError(f"unsupported front schema_version {doc.get('schema_version')!r}")
        try:
            kind = IndicatorKind(Indicator(doc["indicator"]), tuple(doc["reference"]))
            pts = doc["points"]
            n = len(pts["t"])
            y = np.asarray(pts["y"], dtype=float).reshape(n, 2)
            x = np.asarray(pts["x"], dtype=float).reshape(n, -1)
            return cls(
                t=np.asarray(pts["t"], dtype=float),
                peaks=np.column_stack([np.asarray(pts["peak1"], dtype=np.int64),
                                       np.asarray(pts["peak2"], dtype=np.int64)]).reshape(n, 2),
                x=x,
                y=y,
                y_raw=np.asarray(pts["y_raw"], dtype=float).reshape(n, 2),
                epsilon_total_final=float(doc["epsilon_total_final"]),
                indicator_kind=kind,
                indicator_value=float(doc["indicator_value"]),
                contributing_pairs=int(doc["contributing_pairs"]),
                iterations=int(doc["iterations"]),
                early_stopped=bool(doc["early_stopped"]),
                delta=float(doc["delta"]),
                ideal=None if doc.get("ideal") is None else np.asarray(doc["ideal"], float),
                nadir=None if doc.get("nadir") is None else np.asarray(doc["nadir"], float),
                instance_id=doc.get("instance_id"),
                diagnostics=dict(doc.get("diagnostics") or {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"front document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "FrontApproximation":
        return cls.from_document(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "FrontApproximation":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def contributing_pairs(approx: FrontApproximation) -> int:
    """Number of distinct peak pairs that own at least one archived point."""
    if len(approx) == 0:
        return 0
    return int(np.unique(approx.peaks, axis=0).shape[0])


class _Side:
    """Vectorized view of one objective: components, transform and normalization."""

    def __init__(self, obj: PeakObjective, ideal: float, nadir: float) -> None:
        self.H = obj.hessians
        self.xs = obj.optima
        self.ys = obj.optimum_values
        self.g = np.einsum("jde,je->jd", self.H, self.xs)
        self.transform = obj.transform
        self.ideal = float(ideal)
        self.extent = float(nadir - ideal)

    def raw(self, v) -> np.ndarray:
        return np.asarray(self.transform.apply(np.asarray(v, dtype=float)), dtype=float)

    def norm(self, raw) -> np.ndarray:
        return (raw - self.ideal) / self.extent

    def values_at(self, idx: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Inner value of component ``idx[i]`` at ``X[i]``."""
        diff = X - self.xs[idx]
        return 0.5 * np.einsum("nd,nde,ne->n", diff, self.H[idx], diff) + self.ys[idx]

    def cross(self, X: np.ndarray) -> np.ndarray:
        """Inner values of every component at every row of ``X``: shape ``(len(X), J)``."""
        n, d = X.shape
        J = self.H.shape[0]
        out = np.empty((n, J))
        rows = max(1, (1 << 21) // max(1, J * d))
        for lo in range(0, n, rows):
            diff = X[lo:lo + rows, None, :] - self.xs[None, :, :]          # (c, J, d)
            Hd = np.matmul(diff.transpose(1, 0, 2), self.H)                  # (J, c, d)
            out[lo:lo + rows] = 0.5 * np.einsum("jcd,cjd->cj", Hd, diff)
        out += self.ys[None, :]
        return out


def _eps_vec(kind: IndicatorKind, l1, l2, r1, r2) -> np.ndarray:
    """Vectorized segment_epsilon for boxes with corners ``(l1, l2)`` and ``(r1, r2)``."""
    degenerate = (l1 >= r1) | (l2 <= r2)
    if kind.kind is Indicator.HYPERVOLUME:
        ref1, ref2 = kind.reference
        w = np.maximum(np.minimum(r1, ref1) - l1, 0.0)
        h = np.maximum(np.minimum(l2, ref2) - r2, 0.0)
        out = w * h
    else:
        z1, z2 = kind.reference
        a1 = np.maximum(l1 - z1, 0.0)
        a2 = np.maximum(l2 - z2, 0.0)
        b1 = np.maximum(r1 - z1, 0.0)
        b2 = np.maximum(r2 - z2, 0.0)
        wa, wb, wc, wl = _sw(a1, a2), _sw(b1, b2), _sw(b1, a2), _sw(a1, b2)
        two = a2 * _i1mw(wc, wa) + b1 * _iw(wb, wc)
        ideal_at_z = (a1 == 0.0) & (b2 == 0.0)
        with_ideal = np.where(ideal_at_z, 0.0, a1 * _iw(wl, wa) + b2 * _i1mw(wb, wl))
        out = np.maximum(two - with_ideal, 0.0)
    return np.where(degenerate, 0.0, out)


def _sw(a1, a2):
    s = a1 + a2
    return np.divide(a2, s, out=np.full_like(s, 0.5), where=s > 0)


def _iw(lo, hi):
    return np.where(hi > lo, (hi - lo) * (hi + lo) * 0.5, 0.0)


def _i1mw(lo, hi):
    return np.where(hi > lo, (hi - lo) * (1.0 - 0.5 * (hi + lo)), 0.0)


def _resolve(instance) -> tuple[BiObjectiveProblem, str | None]:
    if isinstance(instance, ProblemInstance):
        return instance.problem, instance.instance_id
    if isinstance(instance, BiObjectiveProblem):
        return instance, None
    raise TypeError("expected a ProblemInstance or BiObjectiveProblem")


class _Run:
    """Mutable state of one approximation run."""

    def __init__(self, problem: BiObjectiveProblem, kind: IndicatorKind, delta: float,
                 max_iterations: int, batch_size: int, trace_every, debug: bool) -> None:
        self.problem = problem
        self.kind = kind
        self.delta = float(delta)
        self.max_iterations = int(max_iterations)
        self.batch_size = int(batch_size)
        self.trace_every = trace_every
        self.debug = debug
        self.s1 = _Side(problem.f1, problem.ideal[0], problem.nadir[0])
        self.s2 = _Side(problem.f2, problem.ideal[1], problem.nadir[1])
        self.archive = NondominatedArchive2D()
        self.iterations = 0
        self.pruned = 0
        self.trace: list[tuple[int, float, float]] = []
        self.oob_count = 0
        self.oob_examples: list[dict] = []
        # column chunks (t, peaks, x, y, y_raw) recorded outside the archive
        self.chunks: list[tuple] = []

    # -- helpers -----------------------------------------------------------
    def note_oob(self, X: np.ndarray, where: str) -> None:
        p = self.problem
        bad = np.any((X < p.lower) | (X > p.upper), axis=1)
        if bad.any():
            self.oob_count += int(bad.sum())
            room = _MAX_OOB_RECORDS - len(self.oob_examples)
            for i in np.flatnonzero(bad)[:max(room, 0)]:
                self.oob_examples.append({"where": where, "x": [float(v) for v in X[i]]})

    def midpoints(self, jj, kk, tm):
        """Pareto-set points, raw and normalized images for a batch of pair parameters."""
        s1, s2 = self.s1, self.s2
        t = tm[:, None]
        A = (1.0 - t)[:, :, None] * s1.H[jj] + t[:, :, None] * s2.H[kk]
        b = (1.0 - t) * s1.g[jj] + t * s2.g[kk]
        X = np.linalg.solve(A, b[:, :, None])[:, :, 0]
        raw1 = s1.raw(s1.values_at(jj, X))
        raw2 = s2.raw(s2.values_at(kk, X))
        return X, raw1, raw2, s1.norm(raw1), s2.norm(raw2)

    def children_eps(self, l1, l2, r1, r2, m1, m2):
        # rounding can put the midpoint image a hair outside its box
        c1 = np.clip(m1, l1, r1)
        c2 = np.clip(m2, r2, l2)
        return _eps_vec(self.kind, l1, l2, c1, c2), _eps_vec(self.kind, c1, c2, r1, r2)

    # -- phase 1 -----------------------------------------------------------
    def initialize(self) -> list[tuple]:
        """Endpoints of every pair in literal ``(j, k)`` order; returns queued segments."""
        s1, s2, kind = self.s1, self.s2, self.kind
        raw1_own = s1.raw(s1.ys)
        raw2_own = s2.raw(s2.ys)
        raw2_at_x1 = s2.raw(s2.cross(s1.xs))         # (J1, J2): q2_k(x1_j)
        raw1_at_x2 = s1.raw(s1.cross(s2.xs)).T       # (J1, J2): q1_j(x2_k)
        n1_own, n2_own = s1.norm(raw1_own), s2.norm(raw2_own)
        n2_at_x1, n1_at_x2 = s2.norm(raw2_at_x1), s1.norm(raw1_at_x2)
        eps_init = _eps_vec(kind, n1_own[:, None], n2_at_x1, n1_at_x2, n2_own[None, :])
        self.note_oob(s1.xs, "optimum f1")
        self.note_oob(s2.xs, "optimum f2")
        archive = self.archive
        dominated = archive._dominated
        segments = []
        l1_all, r2_all = n1_own.tolist(), n2_own.tolist()
        J1, J2 = eps_init.shape
        for j in range(J1):
            l1 = l1_all[j]
            row_l2 = n2_at_x1[j].tolist()
            row_r1 = n1_at_x2[j].tolist()
            row_eps = eps_init[j].tolist()
            for k in range(J2):
                r2 = r2_all[k]
                if dominated(l1, r2):
                    continue
                l2, r1 = row_l2[k], row_r1[k]
                archive.insert((l1, l2), (0.0, j, k, None, float(raw1_own[j]),
                                          float(raw2_at_x1[j, k])))
                archive.insert((r1, r2), (1.0, j, k, None, float(raw1_at_x2[j, k]),
                                          float(raw2_own[k])))
                eps = row_eps[k]
                if eps >= EPS_FLOOR:
                    segments.append((-eps, j, k, 0.0, 1.0, l1, l2, r1, r2))
        return segments

    def record_trace(self, eps_total: float) -> None:
        self.trace.append((self.iterations, eps_total, self.kind.value(self.columns()[3])))

    # -- phase 2, general --------------------------------------------------
    def bisect_heap(self, segments: list[tuple]) -> float:
        """Largest-first bisection over a priority queue with dominance guards.

        A popped segment whose local ideal is already weakly dominated is
        dropped without evaluation: nothing inside its box can change the
        indicator any more.
        """
        heap = list(segments)
        heapq.heapify(heap)
        heappush, heappop = heapq.heappush, heapq.heappop
        archive, delta, debug = self.archive, self.delta, self.debug
        dominated = archive._dominated
        insert = archive.insert
        eps_total = math.fsum(-e[0] for e in heap)
        every = self.trace_every
        next_trace = every if every else None
        if every:
            self.record_trace(eps_total)

        while heap and self.iterations < self.max_iterations:
            if eps_total <= delta:
                eps_total = math.fsum(-e[0] for e in heap)
                if eps_total <= delta:
                    break
            K = min(self.batch_size, len(heap), self.max_iterations - self.iterations)
            batch = [heappop(heap) for _ in range(K)]
            arr = np.array(batch)
            jj = arr[:, 1].astype(np.intp)
            kk = arr[:, 2].astype(np.intp)
            tm = 0.5 * (arr[:, 3] + arr[:, 4])
            X, raw1, raw2, m1, m2 = self.midpoints(jj, kk, tm)
            eps_l, eps_r = self.children_eps(arr[:, 5], arr[:, 6], arr[:, 7], arr[:, 8], m1, m2)
            eps_l, eps_r = eps_l.tolist(), eps_r.tolist()
            m1l, m2l, tml = m1.tolist(), m2.tolist(), tm.tolist()
            raw1l, raw2l = raw1.tolist(), raw2.tolist()

            used = len(batch)
            for i, e in enumerate(batch):
                if eps_total <= delta:
                    eps_total = math.fsum(-x[0] for x in heap) + math.fsum(-x[0] for x in batch[i:])
                    if eps_total <= delta:
                        used = i
                        break
                self.iterations += 1
                neg, j, k, tl, tr, l1, l2, r1, r2 = e
                before = eps_total
                eps_total += neg
                if dominated(l1, r2):
                    self.pruned += 1
                    continue
                y1, y2, t_mid = m1l[i], m2l[i], tml[i]
                insert((y1, y2), (t_mid, j, k, X[i], raw1l[i], raw2l[i]))
                el, er = eps_l[i], eps_r[i]
                if el >= EPS_FLOOR and not dominated(l1, y2):
                    heappush(heap, (-el, j, k, tl, t_mid, l1, l2, y1, y2))
                    eps_total += el
                if er >= EPS_FLOOR and not dominated(y1, r2):
                    heappush(heap, (-er, j, k, t_mid, tr, y1, y2, r1, r2))
                    eps_total += er
                if debug and eps_total > before + 1e-12 * abs(before):
                    raise InvariantError(f"eps_total increased from {before!r} to "
                                         f"{eps_total!r} at iteration {self.iterations}")
                if next_trace is not None and self.iterations >= next_trace:
                    self.record_trace(math.fsum(-x[0] for x in heap)
                                      + math.fsum(-x[0] for x in batch[i + 1:]))
                    next_trace += every
            for e in batch[used:]:
                heappush(heap, e)
            self.note_oob(X[:used], "pareto set")
        return math.fsum(-e[0] for e in heap)

    # -- phase 2, single pair ----------------------------------------------
    def bisect_single_pair(self, segments: list[tuple]) -> float:
        """Vectorized bisection for instances with one peak pair.

        All images lie on one monotone curve, so the dominance guards can only
        reject zero-width boxes, which the ``EPS_FLOOR`` filter already drops.
        Each round splits the largest segments in descending order (ties by
        ``t_l``) and stops at the first split that brings the bound to
        ``delta``; the archive is filtered once at the end.
        """
        delta = self.delta
        seg = np.array([e[3:] for e in segments], dtype=float).reshape(-1, 6)
        eps = np.array([-e[0] for e in segments], dtype=float)
        j0, k0 = (segments[0][1], segments[0][2]) if segments else (0, 0)
        every = self.trace_every
        next_trace = every if every else None
        if every:
            self.record_trace(math.fsum(eps))

        while eps.size and self.iterations < self.max_iterations:
            total = math.fsum(eps)
            if total <= delta:
                break
            n = eps.size
            K = min(n, max(self.batch_size, -(-n // 4)), self.max_iterations - self.iterations)
            order = np.lexsort((seg[:, 0], -eps))[:K]
            tl, tr = seg[order, 0], seg[order, 1]
            l1, l2, r1, r2 = seg[order, 2], seg[order, 3], seg[order, 4], seg[order, 5]
            tm = 0.5 * (tl + tr)
            idx = np.full(K, j0, dtype=np.intp), np.full(K, k0, dtype=np.intp)
            X, raw1, raw2, m1, m2 = self.midpoints(idx[0], idx[1], tm)
            el, er = self.children_eps(l1, l2, r1, r2, m1, m2)
            el = np.where(el >= EPS_FLOOR, el, 0.0)
            er = np.where(er >= EPS_FLOOR, er, 0.0)
            gain = eps[order] - el - er
            if self.debug and np.any(gain < -1e-12 * eps[order]):
                raise InvariantError("segment bound increased under bisection")
            remaining = total - np.cumsum(gain)
            hit = np.flatnonzero(remaining <= delta)
            m = int(hit[0]) + 1 if hit.size else K
            sel = slice(0, m)
            self.iterations += m
            self.chunks.append((tm[sel], np.tile((j0, k0), (m, 1)), X[sel],
                                np.column_stack([m1[sel], m2[sel]]),
                                np.column_stack([raw1[sel], raw2[sel]])))
            self.note_oob(X[sel], "pareto set")
            keep = np.ones(n, dtype=bool)
            keep[order[sel]] = False
            left = np.column_stack([tl[sel], tm[sel], l1[sel], l2[sel], m1[sel], m2[sel]])
            right = np.column_stack([tm[sel], tr[sel], m1[sel], m2[sel], r1[sel], r2[sel]])
            new_seg = np.concatenate([seg[keep], left, right])
            new_eps = np.concatenate([eps[keep], el[sel], er[sel]])
            live = new_eps >= EPS_FLOOR
            seg, eps = new_seg[live], new_eps[live]
            if next_trace is not None and self.iterations >= next_trace:
                self.trace.append((self.iterations, math.fsum(eps),
                                   self.kind.value(self.columns()[3])))
                while next_trace <= self.iterations:
                    next_trace += every
        return math.fsum(eps)

    # -- result ------------------------------------------------------------
    def _archive_columns(self):
        s1, s2 = self.s1, self.s2
        n, d = len(self.archive), self.problem.dim
        t = np.empty(n)
        peaks = np.empty((n, 2), dtype=np.int64)
        X = np.empty((n, d))
        Y = np.empty((n, 2))
        R = np.empty((n, 2))
        for i, ((y1, y2), payload) in enumerate(zip(self.archive, self.archive.payloads)):
            t_, j, k, x, raw_1, raw_2 = payload
            if x is None:
                x = s1.xs[j] if t_ == 0.0 else s2.xs[k]
            t[i], peaks[i], X[i], Y[i], R[i] = t_, (j, k), x, (y1, y2), (raw_1, raw_2)
        return t, peaks, X, Y, R

    def columns(self):
        """Final nondominated points as arrays sorted by ``y1``."""
        base = self._archive_columns()
        if not self.chunks:
            return base
        parts = [base, *self.chunks]
        cols = [np.concatenate([p[c] for p in parts]) for c in range(5)]
        keep = nondominated_indices(cols[3])
        return tuple(c[keep] for c in cols)

    def result(self, eps_final: float, instance_id) -> FrontApproximation:
        t, peaks, X, Y, R = self.columns()
        value = self.kind.value(Y) if Y.shape[0] else float("nan")
        approx = FrontApproximation(
            t=t, peaks=peaks, x=X, y=Y, y_raw=R,
            epsilon_total_final=eps_final,
            indicator_kind=self.kind,
            indicator_value=value,
            contributing_pairs=0,
            iterations=self.iterations,
            early_stopped=eps_final > self.delta,
            delta=self.delta,
            ideal=np.array(self.problem.ideal, dtype=float),
            nadir=np.array(self.problem.nadir, dtype=float),
            instance_id=instance_id,
            diagnostics={
                "out_of_bounds_count": self.oob_count,
                "out_of_bounds_examples": self.oob_examples,
                "pruned_segments": self.pruned,
                "peak_pairs": self.problem.f1.n_components * self.problem.f2.n_components,
                "batch_size": self.batch_size,
            },
            trace=self.trace,
        )
        approx.contributing_pairs = contributing_pairs(approx)
        return approx


def approximate_front(
    instance,
    kind: IndicatorKind,
    delta: float,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    *,
    pair_cap: int = DEFAULT_PAIR_CAP,
    batch_size: int = DEFAULT_BATCH,
    trace_every: int | None = None,
    debug: bool = False,
) -> FrontApproximation:
    """Approximate the Pareto front until the indicator bound is at most ``delta``.

    Args:
        instance: a ProblemInstance or BiObjectiveProblem.
        kind: indicator with its normalized reference point.
        delta: target bound on the indicator error (normalized scale).
        max_iterations: cap on processed segments; hitting it sets ``early_stopped``.
        pair_cap: refuse instances with more peak pairs than this.
        batch_size: segments taken from the queue per step. Midpoints of a
            batch are solved together; ``1`` follows the strict largest-first
            order one segment at a time.
        trace_every: record ``(iteration, eps_total, indicator)`` at this period.
        debug: assert that ``eps_total`` never increases across an iteration.

    Returns:
        The archive contents with the certificate ``epsilon_total_final``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if max_iterations < 0:
        raise ValueError("max_iterations must be non-negative")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    problem, instance_id = _resolve(instance)
    J1, J2 = problem.f1.n_components, problem.f2.n_components
    if J1 * J2 > pair_cap:
        raise ResourceLimitError(
            f"{J1}x{J2} = {J1 * J2} peak pairs exceed pair_cap={pair_cap}; "
            "raise pair_cap if enough memory and time are available"
        )
    run = _Run(problem, kind, delta, max_iterations, batch_size, trace_every, debug)
    segments = run.initialize()
    if J1 * J2 == 1 and batch_size > 1:
        eps_final = run.bisect_single_pair(segments)
    else:
        eps_final = run.bisect_heap(segments)
    return run.result(eps_final, instance_id)
