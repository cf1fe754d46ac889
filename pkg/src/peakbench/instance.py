"""Materialized problem instances and their JSON document format.

Floats are written with ``repr`` (shortest round-tripping decimal), so a
document reproduces every binary64 value exactly. Matrices are row-major
nested lists.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from peakbench.config import GeneratorConfig
from peakbench.errors import SchemaError
from peakbench.peaks import BiObjectiveProblem, PeakObjective, PeakTransform
from peakbench.quadratic import QuadraticForm

SCHEMA_VERSION = 1
RNG_DESCRIPTION = (
    "numpy.random.PCG64 seeded by numpy.random.SeedSequence("
    "entropy=seed, spawn_key=(stream, attempt[, objective]))"
)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    config: GeneratorConfig
    dimension: int
    seed: int
    problem: BiObjectiveProblem
    params: dict[str, Any] = field(default_factory=dict)
    # base quadratic pair of perturbed classes (shared with the paired unimodal class)
    base_components: tuple[QuadraticForm, QuadraticForm] | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def class_id(self) -> str:
        return self.config.class_id

    @property
    def instance_id(self) -> str:
        return f"{self.class_id}_d{self.dimension}_s{self.seed}"

    @property
    def ideal(self) -> np.ndarray:
        return self.problem.ideal

    @property
    def nadir(self) -> np.ndarray:
        return self.problem.nadir


def _quad_to_dict(q: QuadraticForm) -> dict:
    return {
        "hessian": q.hessian.tolist(),
        "optimum_x": q.optimum_x.tolist(),
        "optimum_value": q.optimum_value,
    }


def _objective_to_dict(obj: PeakObjective) -> dict:
    t = obj.transform
    return {
        "transform": {"scale": t.scale, "exponent": t.exponent, "offset": t.offset, "step": t.step},
        "components": [_quad_to_dict(c) for c in obj.components],
    }


def to_document(instance: ProblemInstance) -> dict:
    p = instance.problem
    return {
        "schema_version": instance.schema_version,
        "rng": RNG_DESCRIPTION,
        "class_id": instance.class_id,
        "dimension": instance.dimension,
        "seed": instance.seed,
        "config": instance.config.to_dict(),
        "params": instance.params,
        "bounds": {"lower": p.lower.tolist(), "upper": p.upper.tolist()},
        "ideal": p.ideal.tolist(),
        "nadir": p.nadir.tolist(),
        "global_optima": [p.global_optimum_x1.tolist(), p.global_optimum_x2.tolist()],
        "objectives": [_objective_to_dict(p.f1), _objective_to_dict(p.f2)],
        "base_components": (
            None if instance.base_components is None
            else [_quad_to_dict(q) for q in instance.base_components]
        ),
    }


def serialize(instance: ProblemInstance, indent: int | None = None) -> str:
    return json.dumps(to_document(instance), indent=indent, allow_nan=False)


def _reject_constant(name: str):
    raise SchemaError(f"non-finite value {name} in document")


def _require(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(f"{where}: missing field {key!r}")
    return data[key]


def _finite_array(value, where: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: not a numeric array") from exc
    if arr.ndim != ndim:
        raise SchemaError(f"{where}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{where}: non-finite values")
    return arr


def _finite_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _quad_from_dict(data: dict, where: str) -> QuadraticForm:
    H = _finite_array(_require(data, "hessian", where), f"{where}.hessian", 2)
    x = _finite_array(_require(data, "optimum_x", where), f"{where}.optimum_x", 1)
    y = _finite_float(_require(data, "optimum_value", where), f"{where}.optimum_value")
    try:
        return QuadraticForm(H, x, y)
    except ValueError as exc:
        raise SchemaError(f"{where}.hessian: {exc}") from exc


def _objective_from_dict(data: dict, where: str) -> PeakObjective:
    t = _require(data, "transform", where)
    try:
        transform = PeakTransform(
            *(_finite_float(_require(t, k, f"{where}.transform"), f"{where}.transform.{k}")
              for k in ("scale", "exponent", "offset", "step"))
        )
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{where}.transform: {exc}") from exc
    comps = _require(data, "components", where)
    if not isinstance(comps, list) or not comps:
        raise SchemaError(f"{where}.components: expected a non-empty list")
    quads = [_quad_from_dict(c, f"{where}.components[{i}]") for i, c in enumerate(comps)]
    try:
        return PeakObjective(tuple(quads), transform)
    except (ValueError, AssertionError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def from_document(doc: dict) -> ProblemInstance:
    version = _require(doc, "schema_version", "document")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    try:
        config = GeneratorConfig.from_dict(_require(doc, "config", "document"))
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"config: {exc}") from exc
    dimension = _require(doc, "dimension", "document")
    seed = _require(doc, "seed", "document")
    if not isinstance(dimension, int) or dimension < 1:
        raise SchemaError("dimension: expected a positive integer")
    if not isinstance(seed, int):
        raise SchemaError("seed: expected an integer")
    objectives = _require(doc, "objectives", "document")
    if not isinstance(objectives, list) or len(objectives) != 2:
        raise SchemaError("objectives: expected exactly two objectives")
    f1 = _objective_from_dict(objectives[0], "objectives[0]")
    f2 = _objective_from_dict(objectives[1], "objectives[1]")
    bounds = _require(doc, "bounds", "document")
    optima = _require(doc, "global_optima", "document")
    if not isinstance(optima, list) or len(optima) != 2:
        raise SchemaError("global_optima: expected two vectors")
    try:
        problem = BiObjectiveProblem(
            f1, f2,
            _finite_array(optima[0], "global_optima[0]", 1),
            _finite_array(optima[1], "global_optima[1]", 1),
            lower=_finite_array(_require(bounds, "lower", "bounds"), "bounds.lower", 1),
            upper=_finite_array(_require(bounds, "upper", "bounds"), "bounds.upper", 1),
            ideal=_finite_array(_require(doc, "ideal", "document"), "ideal", 1),
            nadir=_finite_array(_require(doc, "nadir", "document"), "nadir", 1),
        )
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"problem: {exc}") from exc
    if problem.dim != dimension:
        raise SchemaError(f"dimension: document says {dimension}, components have {problem.dim}")
    base = doc.get("base_components")
    if base is not None:
        if not isinstance(base, list) or len(base) != 2:
            raise SchemaError("base_components: expected two quadratic forms")
        base = tuple(_quad_from_dict(b, f"base_components[{i}]") for i, b in enumerate(base))
    return ProblemInstance(
        config=config,
        dimension=dimension,
        seed=seed,
        problem=problem,
        params=dict(doc.get("params") or {}),
        base_components=base,
        schema_version=version,
    )


def deserialize(text: str) -> ProblemInstance:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc
    return from_document(doc)


def save(instance: ProblemInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(instance))
        fh.write("\n")


def load(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())
