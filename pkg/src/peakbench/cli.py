"""``peakbench`` command line: generate, approximate, targets, run, profile, pipeline.

Exit codes: 0 success, 2 usage or input error, 3 finished with warnings
(front approximation stopped at its iteration cap).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import glob
import json
import logging
import os
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from peakbench import instance as instance_io
from peakbench import profiles
from peakbench.errors import GenerationError, ResourceLimitError, SchemaError
from peakbench.frontapprox import DEFAULT_MAX_ITERATIONS, FrontApproximation, approximate_front
from peakbench.generator import generate
from peakbench.harness import (
    BUDGET_PER_DIM,
    DEFAULT_DELTA,
    TargetSet,
    read_records,
    run,
    targets_from_front,
    write_records,
)
from peakbench.indicators import IndicatorKind
from peakbench.solvers import BUILTIN_SOLVERS, external_solver, make_solver

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_WARN = 3
SEED_ENV = "BONO_SEED_OVERRIDE"
MANIFEST_SCHEMA_VERSION = 1

log = logging.getLogger("peakbench")


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


# ---------------------------------------------------------------- parsing helpers

def parse_int_list(text: str) -> list[int]:
    """``"0..14"``, ``"2,3,5"`` or a mix like ``"0..2,7"``; ranges are inclusive."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                a, b = part.split("..", 1)
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise InputError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise InputError(f"cannot parse integer list {text!r}") from exc
    if not out:
        raise InputError(f"empty integer list {text!r}")
    return out


def parse_name_list(values) -> list[str]:
    names: list[str] = []
    for v in values if isinstance(values, (list, tuple)) else [values]:
        names.extend(s.strip() for s in v.split(",") if s.strip())
    return names


def resolve_seeds(text: str) -> list[int]:
    override = os.environ.get(SEED_ENV)
    return parse_int_list(override if override else text)


def indicator_kind(name: str) -> IndicatorKind:
    try:
        return IndicatorKind.parse(name)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _timestamp(deterministic: bool) -> dict:
    if deterministic:
        return {}
    return {"created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def _load_instance(path):
    if not Path(path).is_file():
        raise InputError(f"instance file not found: {path}")
    return instance_io.load(path)


# ---------------------------------------------------------------- stage functions

def generate_files(classes, dims, seeds, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for c in classes:
        for d in dims:
            for s in seeds:
                try:
                    inst = generate(c, d, s)
                except KeyError as exc:
                    raise InputError(f"unknown class {c!r}") from exc
                path = out_dir / f"{inst.instance_id}.json"
                instance_io.save(inst, path)
                paths.append(path)
    return paths


def approximate_file(instance_path, kind_name: str, delta, max_iter: int, out: Path,
                     deterministic: bool) -> FrontApproximation:
    inst = _load_instance(instance_path)
    kind = indicator_kind(kind_name)
    if delta is None:
        delta = DEFAULT_DELTA[kind.kind]
    approx = approximate_front(inst, kind, delta, max_iter)
    doc = approx.to_document()
    doc.update(_timestamp(deterministic))
    _write_json(out, doc)
    return approx


def targets_file(front_path, out: Path) -> TargetSet:
    if not Path(front_path).is_file():
        raise InputError(f"front file not found: {front_path}")
    ts = targets_from_front(FrontApproximation.load(front_path))
    out.parent.mkdir(parents=True, exist_ok=True)
    ts.save(out)
    return ts


@dataclass(frozen=True)
class RunCell:
    instance_path: str
    target_paths: tuple[str, ...]
    algorithm: str
    solver_cmd: str | None
    budget_mult: float
    seed: int


def _build_solver(cell: RunCell):
    if cell.solver_cmd:
        return external_solver(shlex.split(cell.solver_cmd), name=cell.algorithm)
    return make_solver(cell.algorithm)


def execute_cell(cell: RunCell):
    inst = instance_io.load(cell.instance_path)
    target_sets = [TargetSet.load(p) for p in cell.target_paths]
    for ts in target_sets:
        if ts.instance_id is not None and ts.instance_id != inst.instance_id:
            raise InputError(f"targets {ts.instance_id} do not belong to {inst.instance_id}")
    budget = int(round(cell.budget_mult * inst.dimension))
    return run(_build_solver(cell), inst, target_sets, budget,
               algorithm_name=cell.algorithm, seed=cell.seed)


def execute_cells(cells: list[RunCell], jobs: int) -> list:
    if jobs <= 1 or len(cells) <= 1:
        results = [execute_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(execute_cell, cells))
    return [rec for recs in results for rec in recs]


def profile_files(run_paths, group_by, csv_path, svg_path, style_path, per_dim: bool = True):
    records = []
    for p in run_paths:
        records.extend(read_records(p))
    if not records:
        raise InputError("no run records found")
    by_indicator: dict[str, list] = {}
    for r in records:
        by_indicator.setdefault(r.indicator, []).append(r)
    curves = profiles.aggregate(records, group_by, per_dim=per_dim)
    for recs in by_indicator.values():
        vbs = profiles.virtual_best(recs)
        curves.extend(profiles.aggregate(vbs, group_by, per_dim=per_dim))
    curves.sort(key=lambda c: (c.group, c.algorithm == profiles.VBS_NAME, c.algorithm))
    if csv_path:
        Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
        profiles.emit_csv(curves, csv_path)
    if svg_path:
        style = profiles.load_style(style_path) if style_path else None
        Path(svg_path).parent.mkdir(parents=True, exist_ok=True)
        profiles.emit_svg(curves, svg_path, style)
    return curves


# ---------------------------------------------------------------- subcommands

def cmd_generate(args) -> int:
    classes = parse_name_list(args.class_ids)
    paths = generate_files(classes, parse_int_list(args.dim), resolve_seeds(args.seed),
                           Path(args.out))
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_approximate(args) -> int:
    approx = approximate_file(args.instance, args.indicator, args.delta, args.max_iter,
                              Path(args.out), args.deterministic)
    print(f"{args.indicator} value={approx.indicator_value!r} "
          f"epsilon_total={approx.epsilon_total_final!r} points={len(approx)} "
          f"iterations={approx.iterations}")
    if approx.early_stopped:
        print("warning: iteration cap reached before the bound met delta", file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


def cmd_targets(args) -> int:
    ts = targets_file(args.front, Path(args.out))
    print(f"{ts.indicator_kind.name} optimum={ts.optimum_value!r} -> {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    if args.solver_cmd and args.algorithm:
        raise InputError("use either --algorithm or --solver-cmd")
    algorithms = parse_name_list(args.algorithm or []) if not args.solver_cmd else [args.name]
    if not algorithms:
        raise InputError("no algorithm given")
    for a in algorithms:
        if not args.solver_cmd and a not in BUILTIN_SOLVERS:
            raise InputError(f"unknown algorithm {a!r}; built-ins are {', '.join(BUILTIN_SOLVERS)}")
    for p in [args.instance, *args.targets]:
        if not Path(p).is_file():
            raise InputError(f"file not found: {p}")
    cells = [RunCell(args.instance, tuple(args.targets), a, args.solver_cmd,
                     args.budget_mult, s)
             for a in algorithms for s in resolve_seeds(args.seed)]
    records = execute_cells(cells, args.jobs)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_records(args.out, records)
    code = EXIT_OK
    for r in records:
        if r.failed:
            code = EXIT_WARN
            print(f"warning: {r.algorithm} {r.indicator} seed={r.solver_seed} failed: {r.error}",
                  file=sys.stderr)
        print(f"{r.algorithm} {r.indicator} seed={r.solver_seed} solved={r.n_solved}/{len(r.targets)}")
    return code


def cmd_profile(args) -> int:
    paths = sorted({p for pattern in args.runs for p in glob.glob(pattern)})
    if not paths:
        raise InputError(f"no run files match {args.runs}")
    curves = profile_files(paths, parse_name_list(args.group_by), args.csv, args.svg,
                           args.style, per_dim=not args.raw_evals)
    print(f"{len(curves)} curves from {len(paths)} run files")
    return EXIT_OK


@dataclass
class ManifestEntry:
    class_id: str
    dimension: int
    seed: int
    instance: str
    fronts: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    runs: list = field(default_factory=list)


def cmd_pipeline(args) -> int:
    """generate -> approximate -> targets -> run -> profile, tied together by a manifest."""
    work = Path(args.workdir)
    classes = parse_name_list(args.class_ids)
    dims = parse_int_list(args.dim)
    seeds = resolve_seeds(args.seed)
    indicators = parse_name_list(args.indicator)
    algorithms = parse_name_list(args.algorithm)
    for a in algorithms:
        if a not in BUILTIN_SOLVERS:
            raise InputError(f"unknown algorithm {a!r}")
    status = EXIT_OK
    entries = []
    for path in generate_files(classes, dims, seeds, work / "instances"):
        inst = instance_io.load(path)
        e = ManifestEntry(inst.class_id, inst.dimension, inst.seed, str(path.relative_to(work)))
        for ind in indicators:
            front = work / "fronts" / f"{inst.instance_id}_{ind}.json"
            approx = approximate_file(path, ind, None, args.max_iter, front, args.deterministic)
            if approx.early_stopped:
                status = EXIT_WARN
            tpath = work / "targets" / f"{inst.instance_id}_{ind}.json"
            targets_file(front, tpath)
            e.fronts[ind] = str(front.relative_to(work))
            e.targets[ind] = str(tpath.relative_to(work))
        entries.append(e)
    cells = []
    for e in entries:
        for a in algorithms:
            cells.append(RunCell(str(work / e.instance),
                                 tuple(str(work / e.targets[i]) for i in indicators),
                                 a, None, args.budget_mult, args.solver_seed))
    records = execute_cells(cells, args.jobs)
    (work / "runs").mkdir(parents=True, exist_ok=True)
    run_paths = []
    for e in entries:
        for a in algorithms:
            recs = [r for r in records
                    if r.algorithm == a and r.instance_key == (e.class_id, e.dimension, e.seed)]
            p = work / "runs" / f"{e.class_id}_d{e.dimension}_s{e.seed}_{a}.csv"
            write_records(p, recs)
            e.runs.append(str(p.relative_to(work)))
            run_paths.append(p)
    profile_files(run_paths, parse_name_list(args.group_by), work / "profile.csv",
                  work / "profile.svg", args.style)
    manifest = {"schema_version": MANIFEST_SCHEMA_VERSION, **_timestamp(args.deterministic),
                "budget_mult": args.budget_mult, "algorithms": algorithms,
                "indicators": indicators, "profile_csv": "profile.csv",
                "profile_svg": "profile.svg", "entries": [asdict(e) for e in entries]}
    _write_json(work / "manifest.json", manifest)
    print(work / "manifest.json")
    return status


# ---------------------------------------------------------------- argparse

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="peakbench", description="Bi-objective peak benchmark toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write instance JSON files")
    g.add_argument("--class", dest="class_ids", required=True, action="append",
                   help="class id(s), comma separated or repeated")
    g.add_argument("--dim", default="2", help="dimension list, e.g. 2,3,5,10,20")
    g.add_argument("--seed", default="0", help="seed list or range, e.g. 0..14")
    g.add_argument("--out", default=".", help="output directory")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("approximate", help="certified front approximation")
    a.add_argument("--instance", required=True)
    a.add_argument("--indicator", choices=("hv", "r2"), default="hv")
    a.add_argument("--delta", type=float, default=None,
                   help="bound target (default 1e-5 for hv, 1e-6 for r2)")
    a.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITERATIONS)
    a.add_argument("--out", required=True)
    a.add_argument("--deterministic", action="store_true", help="omit the timestamp field")
    a.set_defaults(func=cmd_approximate)

    t = sub.add_parser("targets", help="target grid from a front approximation")
    t.add_argument("--front", required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_targets)

    r = sub.add_parser("run", help="run solvers against targets")
    r.add_argument("--instance", required=True)
    r.add_argument("--targets", required=True, nargs="+")
    r.add_argument("--algorithm", action="append", help=f"one of {', '.join(BUILTIN_SOLVERS)}")
    r.add_argument("--solver-cmd", help="external solver command speaking the line protocol")
    r.add_argument("--name", default="external", help="algorithm name for --solver-cmd")
    r.add_argument("--budget-mult", type=float, default=float(BUDGET_PER_DIM),
                   help="evaluations per dimension")
    r.add_argument("--seed", default="0", help="solver seed list or range")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    pr = sub.add_parser("profile", help="runtime profiles with a virtual best solver")
    pr.add_argument("--runs", required=True, nargs="+", help="glob(s) of run CSV files")
    pr.add_argument("--group-by", default="indicator,dim")
    pr.add_argument("--csv")
    pr.add_argument("--svg")
    pr.add_argument("--style", help="key = value SVG style file")
    pr.add_argument("--raw-evals", action="store_true", help="do not divide by dimension")
    pr.set_defaults(func=cmd_profile)

    pl = sub.add_parser("pipeline", help="all stages with a manifest")
    pl.add_argument("--class", dest="class_ids", required=True, action="append")
    pl.add_argument("--dim", default="2")
    pl.add_argument("--seed", default="0")
    pl.add_argument("--indicator", default="hv,r2")
    pl.add_argument("--algorithm", default="random,nsga2")
    pl.add_argument("--budget-mult", type=float, default=float(BUDGET_PER_DIM))
    pl.add_argument("--solver-seed", type=int, default=0)
    pl.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITERATIONS)
    pl.add_argument("--group-by", default="indicator,dim")
    pl.add_argument("--style")
    pl.add_argument("--jobs", type=int, default=1)
    pl.add_argument("--workdir", required=True)
    pl.add_argument("--deterministic", action="store_true")
    pl.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, SchemaError, GenerationError, ResourceLimitError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
