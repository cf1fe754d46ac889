"""Generator configuration and the registry of the 20 BONO problem classes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from enum import Enum


class Structure(str, Enum):
    UNIMODAL = "unimodal"
    PERTURBED = "perturbed"
    RANDOM = "random"


class HessianMode(str, Enum):
    IDENTITY = "identity"
    PERMUTATION_DIAGONAL = "permutation-diagonal"
    ROTATED = "rotated"
    INDEPENDENT_ROTATED = "independent-rotated"


@dataclass(frozen=True)
class Dist:
    """A scalar distribution driven by one uniform draw.

    ``kind`` is ``"const"``, ``"loguniform"`` or ``"floor-loguniform"``.
    Mapping a shared uniform ``u`` through different distributions keeps
    paired classes comparable (same quantile, different range).
    """

    kind: str
    lo: float
    hi: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("const", "loguniform", "floor-loguniform"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "const":
            object.__setattr__(self, "hi", self.lo)
        elif self.hi is None or not 0 < self.lo <= self.hi:
            raise ValueError(f"need 0 < lo <= hi for {self.kind}, got ({self.lo}, {self.hi})")

    def from_uniform(self, u: float) -> float:
        if self.kind == "const":
            return float(self.lo)
        lo, hi = math.log(self.lo), math.log(self.hi)
        value = math.exp(lo + u * (hi - lo))
        if self.kind == "floor-loguniform":
            return float(math.floor(value))
        return value

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, data: dict) -> "Dist":
        return cls(data["kind"], data["lo"], data.get("hi"))


def const(v: float) -> Dist:
    return Dist("const", v)


def loguniform(lo: float, hi: float) -> Dist:
    return Dist("loguniform", lo, hi)


def floor_loguniform(lo: float, hi: float) -> Dist:
    return Dist("floor-loguniform", lo, hi)


@dataclass(frozen=True)
class GeneratorConfig:
    class_id: str
    structure: Structure
    kappa: Dist
    exponent: Dist
    steps: Dist | None = None
    peak_count: int = 1
    hessian_mode: HessianMode = HessianMode.ROTATED
    axis_aligned_optima: bool = False
    # unimodal class supplying the global shape of a perturbed class
    base_class: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "structure", Structure(self.structure))
        object.__setattr__(self, "hessian_mode", HessianMode(self.hessian_mode))
        if self.peak_count < 1:
            raise ValueError("peak_count must be >= 1")
        if self.structure is Structure.UNIMODAL and self.peak_count != 1:
            raise ValueError("unimodal classes have exactly one peak per objective")
        if self.structure is Structure.PERTURBED and self.peak_count < 2:
            raise ValueError("perturbed classes need at least two components")
        if self.kappa.lo < 1:
            raise ValueError("condition numbers must be >= 1")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["structure"] = self.structure.value
        data["hessian_mode"] = self.hessian_mode.value
        data["kappa"] = self.kappa.to_dict()
        data["exponent"] = self.exponent.to_dict()
        data["steps"] = None if self.steps is None else self.steps.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        return cls(
            class_id=data["class_id"],
            structure=Structure(data["structure"]),
            kappa=Dist.from_dict(data["kappa"]),
            exponent=Dist.from_dict(data["exponent"]),
            steps=None if data.get("steps") is None else Dist.from_dict(data["steps"]),
            peak_count=int(data["peak_count"]),
            hessian_mode=HessianMode(data["hessian_mode"]),
            axis_aligned_optima=bool(data["axis_aligned_optima"]),
            base_class=data.get("base_class"),
        )


_MODERATE = loguniform(50.0, 200.0)
_FREE_P = loguniform(1.0 / 3.0, 3.0)
_STEPS = floor_loguniform(50.0, 201.0)

_UNIMODAL = [
    GeneratorConfig("BONO1", Structure.UNIMODAL, const(1.0), const(2.0),
                    hessian_mode=HessianMode.IDENTITY, axis_aligned_optima=True),
    GeneratorConfig("BONO2", Structure.UNIMODAL, loguniform(1e5, 1e6), const(2.0),
                    hessian_mode=HessianMode.PERMUTATION_DIAGONAL, axis_aligned_optima=True),
    GeneratorConfig("BONO3", Structure.UNIMODAL, _MODERATE, loguniform(1.5, 3.0)),
    GeneratorConfig("BONO4", Structure.UNIMODAL, _MODERATE, const(1.0)),
    GeneratorConfig("BONO5", Structure.UNIMODAL, _MODERATE, loguniform(1.0 / 3.0, 2.0 / 3.0)),
    GeneratorConfig("BONO6", Structure.UNIMODAL, _MODERATE, _FREE_P,
                    hessian_mode=HessianMode.INDEPENDENT_ROTATED),
    GeneratorConfig("BONO7", Structure.UNIMODAL, _MODERATE, _FREE_P, steps=_STEPS,
                    hessian_mode=HessianMode.INDEPENDENT_ROTATED),
]

_PERTURBED = [
    replace(base, class_id=f"BONO{i + 8}", structure=Structure.PERTURBED,
            peak_count=500, base_class=base.class_id)
    for i, base in enumerate(_UNIMODAL)
]

_RANDOM = [
    GeneratorConfig("BONO15", Structure.RANDOM, const(1.0), const(2.0), peak_count=10,
                    hessian_mode=HessianMode.IDENTITY),
    GeneratorConfig("BONO16", Structure.RANDOM, const(1.0), _FREE_P, peak_count=100,
                    hessian_mode=HessianMode.IDENTITY),
    GeneratorConfig("BONO17", Structure.RANDOM, const(1.0), _FREE_P, steps=_STEPS,
                    peak_count=100, hessian_mode=HessianMode.IDENTITY),
    GeneratorConfig("BONO18", Structure.RANDOM, _MODERATE, _FREE_P, peak_count=10,
                    hessian_mode=HessianMode.INDEPENDENT_ROTATED),
    GeneratorConfig("BONO19", Structure.RANDOM, _MODERATE, _FREE_P, peak_count=100,
                    hessian_mode=HessianMode.INDEPENDENT_ROTATED),
    GeneratorConfig("BONO20", Structure.RANDOM, _MODERATE, _FREE_P, steps=_STEPS,
                    peak_count=100, hessian_mode=HessianMode.INDEPENDENT_ROTATED),
]

BONO_CLASSES: dict[str, GeneratorConfig] = {
    c.class_id: c for c in (*_UNIMODAL, *_PERTURBED, *_RANDOM)
}

_CUSTOM: dict[str, GeneratorConfig] = {}


def register_class(config: GeneratorConfig) -> None:
    """Register a custom problem class under ``config.class_id``."""
    if config.class_id in BONO_CLASSES:
        raise ValueError(f"{config.class_id} is a built-in class")
    _CUSTOM[config.class_id] = config


def get_config(class_id: str) -> GeneratorConfig:
    key = class_id.upper() if class_id.upper() in BONO_CLASSES else class_id
    if key in BONO_CLASSES:
        return BONO_CLASSES[key]
    if key in _CUSTOM:
        return _CUSTOM[key]
    raise KeyError(f"unknown class {class_id!r}")


def class_ids() -> list[str]:
    return list(BONO_CLASSES) + list(_CUSTOM)
