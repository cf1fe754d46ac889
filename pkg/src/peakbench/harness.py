"""Targets, evaluation counting and hitting-time records.

A run feeds every evaluated point into an unbounded nondominated archive in
normalized objective space and checks the indicator regret after each
evaluation, so a target's hitting time is the exact evaluation index at which
the archive first reached it.
"""

from __future__ import annotations

import csv
import json
import math
import traceback
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from peakbench.archive import NondominatedArchive2D
from peakbench.errors import BudgetExhausted, SchemaError
from peakbench.indicators import HV, R2, Indicator, IndicatorKind
from peakbench.instance import ProblemInstance
from peakbench.peaks import BiObjectiveProblem

N_TARGETS = 101
REGRET_BOUNDS = {Indicator.HYPERVOLUME: (1e-4, 1.0), Indicator.EXACT_R2: (1e-5, 1.0)}
DEFAULT_DELTA = {Indicator.HYPERVOLUME: 1e-5, Indicator.EXACT_R2: 1e-6}
RECOMPUTE_EVERY = 10_000
BUDGET_PER_DIM = 100_000
TARGETS_SCHEMA_VERSION = 1
RUNS_SCHEMA = "# peakbench-runs v1"
CSV_COLUMNS = ("algorithm", "class", "dim", "seed", "indicator", "target_index",
               "target_value", "evals_to_hit", "budget")


def target_grid(lo: float, hi: float, n: int = N_TARGETS) -> np.ndarray:
    """``n`` log-uniformly spaced values with exact endpoints."""
    r = np.logspace(math.log10(lo), math.log10(hi), n)
    r[0], r[-1] = lo, hi
    return r


@dataclass
class TargetSet:
    indicator_kind: IndicatorKind
    optimum_value: float
    targets: np.ndarray
    regret_bounds: tuple[float, float]
    epsilon_total: float | None = None
    instance_id: str | None = None

    def __post_init__(self) -> None:
        self.targets = np.asarray(self.targets, dtype=float)
        if self.targets.shape != (N_TARGETS,):
            raise ValueError(f"expected {N_TARGETS} targets, got {self.targets.shape}")

    def regret(self, value: float) -> float:
        return abs(self.optimum_value - value)

    def solved(self, value: float) -> np.ndarray:
        return self.targets >= self.regret(value)

    def to_document(self) -> dict:
        return {
            "schema_version": TARGETS_SCHEMA_VERSION,
            "instance_id": self.instance_id,
            "indicator": self.indicator_kind.name,
            "reference": list(self.indicator_kind.reference),
            "optimum_value": self.optimum_value,
            "epsilon_total": self.epsilon_total,
            "regret_bounds": list(self.regret_bounds),
            "targets": self.targets.tolist(),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "TargetSet":
        if doc.get("schema_version") != TARGETS_SCHEMA_VERSION:
            raise SchemaError(f"unsupported targets schema_version {doc.get('schema_version')!r}")
        try:
            return cls(
                indicator_kind=IndicatorKind(Indicator(doc["indicator"]), tuple(doc["reference"])),
                optimum_value=float(doc["optimum_value"]),
                targets=np.asarray(doc["targets"], dtype=float),
                regret_bounds=tuple(doc["regret_bounds"]),
                epsilon_total=doc.get("epsilon_total"),
                instance_id=doc.get("instance_id"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"targets document: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_document(), fh, allow_nan=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TargetSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))


def make_targets(optimum_value: float, kind: IndicatorKind, *,
                 epsilon_total: float | None = None,
                 instance_id: str | None = None) -> TargetSet:
    """101 regret thresholds around a converged indicator optimum.

    Warns when ``epsilon_total`` is not at least ten times smaller than the
    hardest target.
    """
    lo, hi = REGRET_BOUNDS[kind.kind]
    if epsilon_total is not None and epsilon_total > lo / 10:
        warnings.warn(
            f"approximation bound {epsilon_total:.3g} exceeds a tenth of the smallest "
            f"target {lo:g}; hard targets may be unreliable",
            stacklevel=2,
        )
    return TargetSet(kind, float(optimum_value), target_grid(lo, hi), (lo, hi),
                     epsilon_total, instance_id)


def targets_from_front(approx) -> TargetSet:
    return make_targets(approx.indicator_value, approx.indicator_kind,
                        epsilon_total=approx.epsilon_total_final, instance_id=approx.instance_id)


class _TargetTracker:
    def __init__(self, target_set: TargetSet) -> None:
        self.target_set = target_set
        self.tracker = target_set.indicator_kind.tracker()
        self.hits: list[int | None] = [None] * N_TARGETS
        # targets with index >= boundary are solved
        self.boundary = N_TARGETS
        self.targets = target_set.targets.tolist()

    @property
    def regret(self) -> float:
        return self.target_set.regret(self.tracker.value)

    def check(self, count: int) -> None:
        regret = self.regret
        b = self.boundary
        targets = self.targets
        while b > 0 and targets[b - 1] >= regret:
            b -= 1
            self.hits[b] = count
        self.boundary = b


class CountingEvaluator:
    """Budgeted, counting wrapper around a problem.

    Every evaluation is normalized, offered to an unbounded archive, and the
    indicator regrets are checked against all target sets.
    """

    def __init__(self, problem, target_sets: Sequence[TargetSet] = (), budget: int = 1,
                 *, recompute_every: int = RECOMPUTE_EVERY) -> None:
        if isinstance(problem, ProblemInstance):
            problem = problem.problem
        if not isinstance(problem, BiObjectiveProblem):
            raise TypeError("expected a BiObjectiveProblem or ProblemInstance")
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.problem = problem
        self.budget = int(budget)
        self.count = 0
        self.archive = NondominatedArchive2D()
        self.trackers = [_TargetTracker(ts) for ts in target_sets]
        self.recompute_every = int(recompute_every)
        self._inserts = 0
        self._ideal = np.asarray(problem.ideal, dtype=float)
        self._extent = np.asarray(problem.nadir, dtype=float) - self._ideal

    @property
    def dim(self) -> int:
        return self.problem.dim

    @property
    def lower(self) -> np.ndarray:
        return self.problem.lower

    @property
    def upper(self) -> np.ndarray:
        return self.problem.upper

    @property
    def remaining(self) -> int:
        return self.budget - self.count

    def regrets(self) -> list[float]:
        return [t.regret for t in self.trackers]

    def indicator_values(self) -> list[float]:
        return [t.tracker.value for t in self.trackers]

    def __call__(self, x) -> tuple[float, float]:
        y = self.evaluate_many(np.asarray(x, dtype=float).reshape(1, -1))
        return float(y[0, 0]), float(y[0, 1])

    def evaluate_many(self, X) -> np.ndarray:
        """Evaluate rows of ``X`` in order, up to the remaining budget.

        Returns raw objective values for the rows that were evaluated (fewer
        than requested when the budget runs out mid-batch). Raises
        BudgetExhausted if no budget is left at call time.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"points have dimension {X.shape[1]}, expected {self.dim}")
        if not np.all(np.isfinite(X)):
            raise ValueError("decision vectors must be finite")
        if self.remaining <= 0:
            raise BudgetExhausted(f"budget of {self.budget} evaluations exhausted")
        X = X[: self.remaining]
        Y = self.problem.evaluate_many(X)
        N = (Y - self._ideal) / self._extent
        for y1, y2 in N.tolist():
            self.count += 1
            self._offer(y1, y2)
        return Y

    def offer_normalized(self, y) -> None:
        """Feed an already normalized objective vector without spending budget."""
        self._offer(float(y[0]), float(y[1]))

    def _offer(self, y1: float, y2: float) -> None:
        result = self.archive.insert_detailed((y1, y2))
        if not result.inserted:
            return
        self._inserts += 1
        full = self._inserts % self.recompute_every == 0
        for t in self.trackers:
            if full:
                t.tracker.recompute(self.archive)
            else:
                t.tracker.update(self.archive, result)
            t.check(self.count)


@dataclass
class RunRecord:
    algorithm: str
    class_id: str
    dim: int
    seed: int
    indicator: str
    targets: np.ndarray
    hits: list
    budget: int
    budget_used: int = 0
    final_regret: float = math.nan
    failed: bool = False
    error: str | None = None
    solver_seed: int | None = None

    @property
    def instance_key(self) -> tuple[str, int, int]:
        return self.class_id, self.dim, self.seed

    @property
    def n_solved(self) -> int:
        return sum(h is not None for h in self.hits)

    def check_invariants(self) -> None:
        """Hits lie within budget; an easier target is never hit later than a harder one."""
        for i, h in enumerate(self.hits):
            if h is None:
                continue
            if not 1 <= h <= self.budget:
                raise AssertionError(f"hit {h} outside [1, {self.budget}]")
            if i + 1 < len(self.hits):
                easier = self.hits[i + 1]
                if easier is None or easier > h:
                    raise AssertionError(f"target {i + 1} hit after harder target {i}")


Solver = Callable[[CountingEvaluator, np.ndarray], None]


def _instance_fields(instance) -> tuple[BiObjectiveProblem, str, int, int]:
    if isinstance(instance, ProblemInstance):
        return instance.problem, instance.class_id, instance.dimension, instance.seed
    return instance, "CUSTOM", instance.dim, -1


def run(algorithm: Callable, instance, target_sets: Sequence[TargetSet], budget: int, *,
        algorithm_name: str | None = None, seed: int = 0) -> list[RunRecord]:
    """Run ``algorithm(evaluator, rng)`` until it returns or the budget is spent.

    Errors raised by the algorithm are caught and recorded on the returned
    RunRecords (``failed=True``); hits recorded before the failure are kept.
    """
    problem, class_id, dim, inst_seed = _instance_fields(instance)
    evaluator = CountingEvaluator(problem, target_sets, budget)
    rng = np.random.default_rng(seed)
    failed, error = False, None
    try:
        algorithm(evaluator, rng)
    except BudgetExhausted:
        pass
    except Exception as exc:  # noqa: BLE001 - a broken solver must not crash a batch
        failed = True
        error = "".join(traceback.format_exception_only(type(exc), exc)).strip()
    name = algorithm_name or getattr(algorithm, "__name__", "algorithm")
    return [
        RunRecord(
            algorithm=name,
            class_id=class_id,
            dim=dim,
            seed=inst_seed,
            indicator=t.target_set.indicator_kind.name,
            targets=t.target_set.targets.copy(),
            hits=list(t.hits),
            budget=int(budget),
            budget_used=evaluator.count,
            final_regret=t.regret,
            failed=failed,
            error=error,
            solver_seed=seed,
        )
        for t in evaluator.trackers
    ]


def default_budget(dim: int, multiplier: int = BUDGET_PER_DIM) -> int:
    return int(multiplier) * int(dim)


# ---------------------------------------------------------------- CSV

def write_records(path_or_file, records: Sequence[RunRecord]) -> None:
    """Write records as CSV rows, one per target, after a schema line and a header."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        fh.write(RUNS_SCHEMA + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            for i, (target, hit) in enumerate(zip(rec.targets.tolist(), rec.hits)):
                writer.writerow([rec.algorithm, rec.class_id, rec.dim, rec.seed, rec.indicator,
                                 i, repr(target), "NA" if hit is None else hit, rec.budget])
    finally:
        if own:
            fh.close()


def read_records(path_or_file) -> list[RunRecord]:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, newline="", encoding="utf-8") if own else path_or_file
    try:
        first = fh.readline().rstrip("\r\n")
        if first != RUNS_SCHEMA:
            raise SchemaError(f"expected {RUNS_SCHEMA!r} as first line, got {first[:60]!r}")
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise SchemaError(f"unexpected run CSV header {reader.fieldnames}")
        groups: dict[tuple, dict] = {}
        for row in reader:
            key = (row["algorithm"], row["class"], int(row["dim"]), int(row["seed"]),
                   row["indicator"])
            g = groups.setdefault(key, {"targets": {}, "hits": {}, "budget": int(row["budget"])})
            i = int(row["target_index"])
            g["targets"][i] = float(row["target_value"])
            g["hits"][i] = None if row["evals_to_hit"] == "NA" else int(row["evals_to_hit"])
    finally:
        if own:
            fh.close()
    records = []
    for (alg, cls, dim, seed, ind), g in groups.items():
        idx = sorted(g["targets"])
        if idx != list(range(N_TARGETS)):
            raise SchemaError(f"{alg}/{cls}/d{dim}/s{seed}/{ind}: incomplete target rows")
        records.append(RunRecord(alg, cls, dim, seed, ind,
                                 np.array([g["targets"][i] for i in idx]),
                                 [g["hits"][i] for i in idx], g["budget"]))
    return records


def default_target_kinds() -> tuple[IndicatorKind, IndicatorKind]:
    return HV, R2


__all__ = [
    "CSV_COLUMNS",
    "CountingEvaluator",
    "DEFAULT_DELTA",
    "RUNS_SCHEMA",
    "RunRecord",
    "TargetSet",
    "default_budget",
    "make_targets",
    "read_records",
    "run",
    "target_grid",
    "targets_from_front",
    "write_records",
]
