"""Runtime profiles: ECDFs of target hitting times, the virtual best solver, CSV and SVG output."""

from __future__ import annotations

import csv
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from peakbench.errors import SchemaError
from peakbench.harness import RunRecord

PROFILE_SCHEMA = "# peakbench-profile v1"
PROFILE_COLUMNS = ("group", "algorithm", "evals_per_d", "fraction_solved")
VBS_NAME = "VBS"
GROUP_FIELDS = ("indicator", "dim", "class")

DEFAULT_STYLE = {
    "width": "720",
    "height": "440",
    "margin_left": "70",
    "margin_right": "180",
    "margin_top": "30",
    "margin_bottom": "50",
    "font_family": "sans-serif",
    "font_size": "12",
    "stroke_width": "1.8",
    "palette": "#1f77b4,#d62728,#2ca02c,#ff7f0e,#9467bd,#8c564b,#e377c2,#7f7f7f",
    "vbs_color": "#000000",
    "title": "",
}


@dataclass(frozen=True)
class ProfileCurve:
    algorithm: str
    group: str
    support: np.ndarray
    fraction_solved: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.support, dtype=float)
        f = np.asarray(self.fraction_solved, dtype=float)
        if s.shape != f.shape:
            raise ValueError("support and fraction_solved must have equal length")
        if s.size > 1 and np.any(np.diff(s) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(np.diff(f) < 0) or (f.size and (f[0] < 0 or f[-1] > 1)):
            raise ValueError("fraction_solved must be non-decreasing within [0, 1]")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "fraction_solved", f)

    def at(self, evals_per_d: float) -> float:
        """Fraction of targets solved within ``evals_per_d`` evaluations per dimension."""
        i = np.searchsorted(self.support, evals_per_d, side="right")
        return 0.0 if i == 0 else float(self.fraction_solved[i - 1])

    def same_as(self, other: "ProfileCurve") -> bool:
        return (self.algorithm == other.algorithm and self.group == other.group
                and np.array_equal(self.support, other.support)
                and np.array_equal(self.fraction_solved, other.fraction_solved))


def group_key(record: RunRecord, group_by: Sequence[str]) -> str:
    fields = {"indicator": record.indicator, "dim": record.dim, "class": record.class_id}
    parts = []
    for name in group_by:
        if name not in fields:
            raise ValueError(f"unknown grouping field {name!r}; choose from {GROUP_FIELDS}")
        parts.append(f"{name}={fields[name]}")
    return "|".join(parts)


def _normalized_group_by(group_by: Sequence[str]) -> tuple[str, ...]:
    # indicators are never mixed inside one curve
    gb = tuple(group_by)
    return gb if "indicator" in gb else ("indicator", *gb)


def ecdf(records: Sequence[RunRecord], *, per_dim: bool = True):
    """Support and cumulative fraction over all (run, target) hitting times."""
    times = []
    total = 0
    for rec in records:
        total += len(rec.hits)
        scale = rec.dim if per_dim else 1
        times.extend(h / scale for h in rec.hits if h is not None)
    if total == 0:
        return np.empty(0), np.empty(0)
    values, counts = np.unique(np.asarray(times, dtype=float), return_counts=True)
    return values, np.cumsum(counts) / total


def aggregate(records: Iterable[RunRecord], group_by: Sequence[str] = ("indicator", "dim"),
              *, per_dim: bool = True) -> list[ProfileCurve]:
    """One runtime-profile curve per (group, algorithm).

    Unsolved targets count in the denominator only, so curves plateau below 1.
    """
    records = list(records)
    if not records:
        warnings.warn("no run records to aggregate", stacklevel=2)
        return []
    gb = _normalized_group_by(group_by)
    buckets: dict[tuple[str, str], list[RunRecord]] = defaultdict(list)
    for rec in records:
        buckets[(group_key(rec, gb), rec.algorithm)].append(rec)
    curves = []
    for (group, alg) in sorted(buckets):
        support, frac = ecdf(buckets[(group, alg)], per_dim=per_dim)
        curves.append(ProfileCurve(alg, group, support, frac))
    return curves


def virtual_best(records: Iterable[RunRecord], name: str = VBS_NAME) -> list[RunRecord]:
    """Per (instance, indicator, target) minimum hitting time over all algorithms."""
    records = [r for r in records if r.algorithm != name]
    cells: dict[tuple, dict[str, RunRecord]] = defaultdict(dict)
    algorithms = sorted({r.algorithm for r in records})
    for rec in records:
        key = (rec.class_id, rec.dim, rec.seed, rec.indicator)
        if rec.algorithm in cells[key]:
            raise ValueError(f"duplicate record for {rec.algorithm} on {key}")
        cells[key][rec.algorithm] = rec
    missing = [(alg, key) for key, by_alg in sorted(cells.items())
               for alg in algorithms if alg not in by_alg]
    if missing:
        listing = ", ".join(f"{alg}@{c}/d{d}/s{s}/{i}" for alg, (c, d, s, i) in missing[:20])
        raise ValueError(f"instance coverage differs between algorithms; missing: {listing}")
    out = []
    for key, by_alg in sorted(cells.items()):
        recs = list(by_alg.values())
        targets = recs[0].targets
        if any(not np.array_equal(r.targets, targets) for r in recs):
            raise ValueError(f"target grids differ on {key}")
        hits = []
        for i in range(len(targets)):
            got = [r.hits[i] for r in recs if r.hits[i] is not None]
            hits.append(min(got) if got else None)
        c, d, s, ind = key
        out.append(RunRecord(name, c, d, s, ind, targets.copy(), hits,
                             max(r.budget for r in recs),
                             budget_used=max(r.budget_used for r in recs),
                             final_regret=min(r.final_regret for r in recs)))
    return out


# ---------------------------------------------------------------- CSV

def emit_csv(curves: Sequence[ProfileCurve], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(PROFILE_SCHEMA + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROFILE_COLUMNS)
        for c in curves:
            for x, f in zip(c.support.tolist(), c.fraction_solved.tolist()):
                writer.writerow([c.group, c.algorithm, repr(x), repr(f)])


def read_csv(path) -> list[ProfileCurve]:
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != PROFILE_SCHEMA:
            raise SchemaError(f"not a profile CSV (first line {first!r})")
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != PROFILE_COLUMNS:
            raise SchemaError(f"unexpected profile header {reader.fieldnames}")
        data: dict[tuple[str, str], list] = {}
        for row in reader:
            data.setdefault((row["group"], row["algorithm"]), []).append(
                (float(row["evals_per_d"]), float(row["fraction_solved"])))
    return [ProfileCurve(alg, group, np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))
            for (group, alg), pts in data.items()]


# ---------------------------------------------------------------- SVG

def load_style(path) -> dict[str, str]:
    """Read ``key = value`` lines over the defaults; lines starting with ``#`` are comments."""
    style = dict(DEFAULT_STYLE)
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in DEFAULT_STYLE:
                raise ValueError(f"{path}:{n}: unknown style key {key!r}")
            style[key] = value
    return style


def _label(curve: ProfileCurve, multi_group: bool) -> str:
    return f"{curve.algorithm} ({curve.group})" if multi_group else curve.algorithm


def emit_svg(curves: Sequence[ProfileCurve], path, style: dict | None = None) -> None:
    """Self-contained SVG: log-scaled x axis, one step polyline per curve, legend."""
    if not curves:
        raise ValueError("nothing to plot")
    st = dict(DEFAULT_STYLE)
    st.update(style or {})
    W, H = float(st["width"]), float(st["height"])
    ml, mr = float(st["margin_left"]), float(st["margin_right"])
    mt, mb = float(st["margin_top"]), float(st["margin_bottom"])
    fs = st["font_size"]
    palette = [c.strip() for c in st["palette"].split(",") if c.strip()]

    xs = np.concatenate([c.support for c in curves if c.support.size] or [np.array([1.0])])
    xs = xs[xs > 0]
    lo = math.floor(math.log10(xs.min())) if xs.size else 0
    hi = math.ceil(math.log10(xs.max())) if xs.size else 1
    if hi <= lo:
        hi = lo + 1
    pw, ph = W - ml - mr, H - mt - mb

    def px(x: float) -> float:
        x = max(x, 10.0 ** lo)
        return ml + (math.log10(x) - lo) / (hi - lo) * pw

    def py(f: float) -> float:
        return mt + (1.0 - f) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W:g}" height="{H:g}" '
        f'viewBox="0 0 {W:g} {H:g}" font-family="{escape(st["font_family"])}" font-size="{fs}">',
        f'<rect x="0" y="0" width="{W:g}" height="{H:g}" fill="white"/>',
        f'<g class="axes" stroke="#444" fill="none">'
        f'<line x1="{ml:g}" y1="{mt + ph:g}" x2="{ml + pw:g}" y2="{mt + ph:g}"/>'
        f'<line x1="{ml:g}" y1="{mt:g}" x2="{ml:g}" y2="{mt + ph:g}"/></g>',
    ]
    ticks = ['<g class="xticks">']
    for e in range(lo, hi + 1):
        x = px(10.0 ** e)
        ticks.append(
            f'<g class="xtick" data-value="{10.0 ** e:g}">'
            f'<line x1="{x:.2f}" y1="{mt + ph:g}" x2="{x:.2f}" y2="{mt + ph + 5:g}" stroke="#444"/>'
            f'<text x="{x:.2f}" y="{mt + ph + 20:g}" text-anchor="middle">10'
            f'<tspan dy="-6" font-size="0.75em">{e}</tspan></text></g>'
        )
    ticks.append("</g>")
    out.extend(ticks)
    yt = ['<g class="yticks">']
    for f in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = py(f)
        yt.append(f'<line x1="{ml - 5:g}" y1="{y:.2f}" x2="{ml:g}" y2="{y:.2f}" stroke="#444"/>'
                  f'<text x="{ml - 8:g}" y="{y + 4:.2f}" text-anchor="end">{f:g}</text>')
    yt.append("</g>")
    out.extend(yt)
    out.append(f'<text x="{ml + pw / 2:g}" y="{H - 10:g}" text-anchor="middle">'
               f'evaluations / dimension</text>')
    out.append(f'<text transform="translate(16 {mt + ph / 2:g}) rotate(-90)" '
               f'text-anchor="middle">fraction of targets solved</text>')
    if st["title"]:
        out.append(f'<text x="{ml + pw / 2:g}" y="{mt - 10:g}" text-anchor="middle">'
                   f'{escape(st["title"])}</text>')

    multi = len({c.group for c in curves}) > 1
    xmax = 10.0 ** hi
    legend = ['<g class="legend">']
    colour_i = 0
    for n, c in enumerate(curves):
        if c.algorithm == VBS_NAME:
            colour = st["vbs_color"]
        else:
            colour = palette[colour_i % len(palette)]
            colour_i += 1
        pts = [(px(10.0 ** lo), py(0.0))]
        prev = 0.0
        for x, f in zip(c.support.tolist(), c.fraction_solved.tolist()):
            pts.append((px(x), py(prev)))
            pts.append((px(x), py(f)))
            prev = f
        pts.append((px(xmax), py(prev)))
        coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
        dash = ' stroke-dasharray="6 3"' if c.algorithm == VBS_NAME else ""
        out.append(f'<polyline class="curve" data-algorithm="{escape(c.algorithm)}" '
                   f'fill="none" stroke="{colour}" stroke-width="{st["stroke_width"]}"{dash} '
                   f'points="{coords}"/>')
        ly = mt + 14 + 18 * n
        lx = ml + pw + 12
        legend.append(f'<line x1="{lx:g}" y1="{ly - 4:g}" x2="{lx + 20:g}" y2="{ly - 4:g}" '
                      f'stroke="{colour}" stroke-width="{st["stroke_width"]}"{dash}/>'
                      f'<text x="{lx + 26:g}" y="{ly:g}">{escape(_label(c, multi))}</text>')
    legend.append("</g>")
    out.extend(legend)
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
