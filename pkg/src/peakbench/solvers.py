"""Reference optimizers and the external-solver line protocol.

A solver is any callable ``solver(evaluator, rng)`` that keeps calling
``evaluator.evaluate_many`` (or ``evaluator(x)``) until it raises
BudgetExhausted. Search bounds are ``evaluator.lower`` / ``evaluator.upper``.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from peakbench.errors import BudgetExhausted


class SolverKind(str, Enum):
    RANDOM_SEARCH = "random"
    NSGA2_LITE = "nsga2"


@dataclass(frozen=True)
class SolverConfig:
    kind: SolverKind = SolverKind.NSGA2_LITE
    population_size: int = 100
    crossover_eta: float = 15.0
    mutation_eta: float = 20.0
    crossover_prob: float = 0.9
    # per-variable mutation probability; None means 1/d
    mutation_rate: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SolverKind(self.kind))
        if self.kind is SolverKind.NSGA2_LITE and self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.crossover_eta < 0 or self.mutation_eta < 0:
            raise ValueError("distribution indices must be non-negative")
        if not 0 <= self.crossover_prob <= 1:
            raise ValueError("crossover_prob must lie in [0, 1]")


def random_search(evaluator, rng: np.random.Generator, batch: int = 100) -> None:
    """Uniform sampling in the box until the budget is exhausted."""
    lo, hi = evaluator.lower, evaluator.upper
    try:
        while True:
            evaluator.evaluate_many(rng.uniform(lo, hi, (batch, lo.shape[0])))
    except BudgetExhausted:
        return


# ---------------------------------------------------------------- NSGA-II parts

def nondominated_ranks(F: np.ndarray) -> np.ndarray:
    """Front index of every row (0 = nondominated) by fast nondominated sorting."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt                                  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=np.int64)
    current = np.flatnonzero(count == 0)
    r = 0
    while current.size:
        ranks[current] = r
        count = count - dom[current].sum(axis=0)
        count[ranks >= 0] = -1
        current = np.flatnonzero(count == 0)
        r += 1
    return ranks


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """Crowding distance within one front; boundary points get ``inf``."""
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        f = F[order, k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = f[-1] - f[0]
        if span > 0:
            dist[order[1:-1]] += (f[2:] - f[:-2]) / span
    return dist


def _rank_and_crowd(F: np.ndarray):
    ranks = nondominated_ranks(F)
    crowd = np.empty(F.shape[0])
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        crowd[idx] = crowding_distance(F[idx])
    return ranks, crowd


def _survivors(F: np.ndarray, size: int) -> np.ndarray:
    ranks, crowd = _rank_and_crowd(F)
    order = np.lexsort((-crowd, ranks))
    return order[:size]


def _tournament(ranks, crowd, n, rng) -> np.ndarray:
    a = rng.integers(len(ranks), size=n)
    b = rng.integers(len(ranks), size=n)
    a_wins = (ranks[a] < ranks[b]) | ((ranks[a] == ranks[b]) & (crowd[a] >= crowd[b]))
    return np.where(a_wins, a, b)


def sbx(p1: np.ndarray, p2: np.ndarray, eta: float, prob: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover on paired rows of ``p1`` and ``p2``."""
    n, d = p1.shape
    u = rng.random((n, d))
    beta = np.where(u <= 0.5, (2 * u) ** (1 / (eta + 1)), (1 / (2 * (1 - u))) ** (1 / (eta + 1)))
    # each variable swaps with probability 1/2; whole pairs cross with ``prob``
    active = (rng.random((n, 1)) < prob) & (rng.random((n, d)) < 0.5)
    beta = np.where(active, beta, 1.0)
    c1 = 0.5 * ((1 + beta) * p1 + (1 - beta) * p2)
    c2 = 0.5 * ((1 - beta) * p1 + (1 + beta) * p2)
    return c1, c2


def polynomial_mutation(X: np.ndarray, lo, hi, eta: float, rate: float, rng) -> np.ndarray:
    n, d = X.shape
    u = rng.random((n, d))
    delta = np.where(u < 0.5, (2 * u) ** (1 / (eta + 1)) - 1, 1 - (2 * (1 - u)) ** (1 / (eta + 1)))
    mask = rng.random((n, d)) < rate
    return np.where(mask, X + delta * (hi - lo), X)


def nsga2_lite(evaluator, rng: np.random.Generator, config: SolverConfig | None = None) -> None:
    """Generational NSGA-II with SBX, polynomial mutation and clipping."""
    config = config or SolverConfig()
    lo, hi = evaluator.lower, evaluator.upper
    d = lo.shape[0]
    N = config.population_size
    rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / d
    try:
        X = rng.uniform(lo, hi, (N, d))
        F = evaluator.evaluate_many(X)
        X = X[: F.shape[0]]
        while True:
            ranks, crowd = _rank_and_crowd(F)
            parents = _tournament(ranks, crowd, 2 * ((N + 1) // 2), rng)
            a, b = X[parents[0::2]], X[parents[1::2]]
            c1, c2 = sbx(a, b, config.crossover_eta, config.crossover_prob, rng)
            kids = np.concatenate([c1, c2])[:N]
            kids = polynomial_mutation(kids, lo, hi, config.mutation_eta, rate, rng)
            kids = np.clip(kids, lo, hi)
            Fk = evaluator.evaluate_many(kids)
            kids = kids[: Fk.shape[0]]
            X = np.concatenate([X, kids])
            F = np.concatenate([F, Fk])
            keep = _survivors(F, N)
            X, F = X[keep], F[keep]
    except BudgetExhausted:
        return


# ---------------------------------------------------------------- registry

def make_solver(name: str, **options) -> Callable:
    """Built-in solver by name (``random`` or ``nsga2``)."""
    kind = SolverKind(name)
    if kind is SolverKind.RANDOM_SEARCH:
        def solver(evaluator, rng):
            return random_search(evaluator, rng, **options)
    else:
        config = SolverConfig(**options)

        def solver(evaluator, rng):
            return nsga2_lite(evaluator, rng, config)
    solver.__name__ = kind.value
    return solver


BUILTIN_SOLVERS = tuple(k.value for k in SolverKind)


# ---------------------------------------------------------------- external protocol

class ProtocolError(RuntimeError):
    """The external solver sent something the harness cannot accept."""


def _fmt(v: float) -> str:
    return repr(float(v))


def external_solver(command, *, name: str = "external", timeout: float | None = None) -> Callable:
    """Wrap a subprocess speaking the line protocol as a solver.

    Harness to solver, once at start::

        INIT <d> <budget> <seed>
        LOWER <l_1> ... <l_d>
        UPPER <u_1> ... <u_d>

    Then the solver sends ``EVAL <x_1> ... <x_d>`` and the harness answers
    ``F <y1> <y2>`` with raw objective values, or ``DONE`` once the budget is
    spent (the solver should then exit). The solver may send ``QUIT`` to stop
    early; closing stdout has the same effect. Floats are decimal strings that
    round-trip binary64 (``repr``).
    """

    def solver(evaluator, rng):
        seed = int(rng.integers(2**31 - 1))
        proc = subprocess.Popen(command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                text=True, bufsize=1, shell=isinstance(command, str))
        d = evaluator.dim

        def send(line: str) -> None:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()

        try:
            send(f"INIT {d} {evaluator.budget} {seed}")
            send("LOWER " + " ".join(_fmt(v) for v in evaluator.lower))
            send("UPPER " + " ".join(_fmt(v) for v in evaluator.upper))
            while True:
                line = proc.stdout.readline()
                if not line:
                    return
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "QUIT":
                    return
                if parts[0] != "EVAL" or len(parts) != d + 1:
                    raise ProtocolError(f"unexpected line from solver: {line.strip()!r}")
                try:
                    x = np.array([float(p) for p in parts[1:]])
                except ValueError as exc:
                    raise ProtocolError(f"malformed number in {line.strip()!r}") from exc
                if not np.all(np.isfinite(x)):
                    raise ProtocolError("non-finite decision vector")
                try:
                    y1, y2 = evaluator(x)
                except BudgetExhausted:
                    send("DONE")
                    raise
                send(f"F {_fmt(y1)} {_fmt(y2)}")
                if evaluator.remaining <= 0:
                    send("DONE")
                    raise BudgetExhausted("budget exhausted")
        except BrokenPipeError as exc:
            raise ProtocolError("solver closed its input") from exc
        finally:
            for stream in (proc.stdin, proc.stdout):
                try:
                    stream.close()
                except OSError:
                    pass
            try:
                proc.wait(timeout=timeout if timeout is not None else 10)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    solver.__name__ = name
    return solver
