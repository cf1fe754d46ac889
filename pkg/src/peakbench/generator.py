"""Seeded sampling of problem instances.

Randomness is drawn from named streams so that paired classes share what
they should: every entity (optima, Hessians, exponent, scales, ...) has its
own ``SeedSequence(seed, spawn_key=(stream, attempt, ...))``. BONO3, BONO4,
BONO5 and BONO10 with one seed therefore share optima and Hessians, and a
perturbed class sees exactly the base pair of its unimodal partner.

Reproduction across languages goes through the serialized instance, not
through re-running this sampler.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from peakbench.config import GeneratorConfig, HessianMode, Structure, get_config
from peakbench.errors import DegenerateInstanceError, GenerationError
from peakbench.instance import ProblemInstance
from peakbench.peaks import BiObjectiveProblem, PeakObjective, PeakTransform, ideal_nadir
from peakbench.quadratic import QuadraticForm, add

OPTIMA_BOX = 4.0
MIN_OPTIMA_DISTANCE = 2.0
MAX_REJECTIONS = 10_000
MAX_ATTEMPTS = 100
BOUNDS_CHECK_SAMPLES = 1000
SCALE_RANGE = (1.0, 1e6)
LOCAL_OFFSET_RANGE = (1.0, 10.0)


class Stream(IntEnum):
    OPTIMA = 1
    KAPPA = 2
    HESSIAN = 3
    EXPONENT = 4
    SCALE = 5
    STEPS = 6
    PERTURBATION = 7
    RANDOM_PEAKS = 8


def stream_rng(seed: int, stream: Stream, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(int(stream), *keys))
    return np.random.Generator(np.random.PCG64(ss))


def sample_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    if d < 1:
        raise ValueError("d must be positive")
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def _eigenvalues(d: int, kappa: float, rng: np.random.Generator) -> np.ndarray:
    lam = np.empty(d)
    lam[0] = 1.0
    if d >= 2:
        lam[1] = kappa
    if d >= 3:
        lam[2:] = np.exp(rng.uniform(0.0, np.log(kappa), d - 2)) if kappa > 1 else 1.0
    return lam


def sample_hessian(d: int, kappa: float, mode: HessianMode | str, rng: np.random.Generator) -> np.ndarray:
    """Symmetric PD matrix with condition number exactly ``kappa`` (up to rounding).

    The spectrum is ``(1, kappa, lambda_3, ..., lambda_d)`` with the remaining
    eigenvalues log-uniform in ``[1, kappa]``.
    """
    mode = HessianMode(mode)
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    if mode is HessianMode.IDENTITY or kappa == 1:
        return np.eye(d)
    lam = _eigenvalues(d, kappa, rng)
    if mode is HessianMode.PERMUTATION_DIAGONAL:
        return np.diag(lam[rng.permutation(d)])
    R = sample_rotation(d, rng)
    H = R.T @ (lam[:, None] * R)
    return 0.5 * (H + H.T)


def sample_optima_pair(d: int, rng: np.random.Generator):
    """Two points uniform in ``[-4, 4]^d`` at distance at least 2."""
    for _ in range(MAX_REJECTIONS):
        x1 = rng.uniform(-OPTIMA_BOX, OPTIMA_BOX, d)
        x2 = rng.uniform(-OPTIMA_BOX, OPTIMA_BOX, d)
        if np.linalg.norm(x1 - x2) >= MIN_OPTIMA_DISTANCE:
            return x1, x2
    raise GenerationError("could not place optima at the minimum distance")


def sample_axis_aligned_pair(d: int, rng: np.random.Generator):
    """Optima that differ in exactly one uniformly chosen coordinate."""
    x1 = rng.uniform(-OPTIMA_BOX, OPTIMA_BOX, d)
    axis = int(rng.integers(d))
    for _ in range(MAX_REJECTIONS):
        value = rng.uniform(-OPTIMA_BOX, OPTIMA_BOX)
        if abs(value - x1[axis]) >= MIN_OPTIMA_DISTANCE:
            x2 = x1.copy()
            x2[axis] = value
            return x1, x2
    raise GenerationError("could not place axis-aligned optima at the minimum distance")


def _loguniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def _transforms(config: GeneratorConfig, seed: int, attempt: int):
    """Shared exponent, per-objective scale and offset, optional step count."""
    p = config.exponent.from_uniform(stream_rng(seed, Stream.EXPONENT, attempt).random())
    rng = stream_rng(seed, Stream.SCALE, attempt)
    scales = [_loguniform(rng, *SCALE_RANGE) for _ in range(2)]
    offsets = [float(rng.uniform(-s, s)) for s in scales]
    n_steps = None
    if config.steps is not None:
        n_steps = int(config.steps.from_uniform(stream_rng(seed, Stream.STEPS, attempt).random()))
    return p, scales, offsets, n_steps


def _base_pair(config: GeneratorConfig, d: int, seed: int, attempt: int):
    rng = stream_rng(seed, Stream.OPTIMA, attempt)
    if config.axis_aligned_optima:
        x1, x2 = sample_axis_aligned_pair(d, rng)
    else:
        x1, x2 = sample_optima_pair(d, rng)
    krng = stream_rng(seed, Stream.KAPPA, attempt)
    kappas = [config.kappa.from_uniform(krng.random()) for _ in range(2)]
    hrng = stream_rng(seed, Stream.HESSIAN, attempt)
    if config.hessian_mode is HessianMode.INDEPENDENT_ROTATED:
        H1 = sample_hessian(d, kappas[0], HessianMode.ROTATED, hrng)
        H2 = sample_hessian(d, kappas[1], HessianMode.ROTATED, hrng)
    else:
        kappas[1] = kappas[0]
        H1 = sample_hessian(d, kappas[0], config.hessian_mode, hrng)
        H2 = H1
    return QuadraticForm(H1, x1, 0.0), QuadraticForm(H2, x2, 0.0), kappas


def verify_pareto_in_bounds(instance_or_pair, samples_per_pair: int = BOUNDS_CHECK_SAMPLES,
                            lower: float = -5.0, upper: float = 5.0) -> bool:
    """Check that the base pair's Pareto set stays inside the box on an even t-grid."""
    if isinstance(instance_or_pair, ProblemInstance):
        inst = instance_or_pair
        if inst.base_components is not None:
            q1, q2 = inst.base_components
        else:
            q1, q2 = inst.problem.f1.components[0], inst.problem.f2.components[0]
        lower, upper = inst.problem.lower, inst.problem.upper
    else:
        q1, q2 = instance_or_pair
    if samples_per_pair < 2:
        raise ValueError("need at least the two endpoints")
    X = pareto_set_samples(q1, q2, samples_per_pair)
    return bool(np.all(X >= lower) and np.all(X <= upper))


def pareto_set_samples(q1: QuadraticForm, q2: QuadraticForm, n: int) -> np.ndarray:
    """Interpolation optima ``x_t`` for ``n`` evenly spaced ``t`` in ``[0, 1]``."""
    t = np.linspace(0.0, 1.0, n)[:, None, None]
    H = (1.0 - t) * q1.hessian + t * q2.hessian
    b = (1.0 - t[:, :, 0]) * (q1.hessian @ q1.optimum_x) + t[:, :, 0] * (q2.hessian @ q2.optimum_x)
    X = np.linalg.solve(H, b[:, :, None])[:, :, 0]
    X[0], X[-1] = q1.optimum_x, q2.optimum_x
    return X


def _perturbed_components(base: QuadraticForm, kappa: float, mode: HessianMode, J: int,
                          rng: np.random.Generator) -> list[QuadraticForm]:
    if mode is HessianMode.INDEPENDENT_ROTATED:
        mode = HessianMode.ROTATED
    d = base.dim
    comps = [add(base, base)]
    for _ in range(J - 1):
        H = sample_hessian(d, kappa, mode, rng)
        x = rng.uniform(-OPTIMA_BOX, OPTIMA_BOX, d)
        comps.append(add(base, QuadraticForm(H, x, 0.0)))
    return comps


def _random_components(global_x: np.ndarray, config: GeneratorConfig, rng: np.random.Generator):
    mode = config.hessian_mode
    if mode is HessianMode.INDEPENDENT_ROTATED:
        mode = HessianMode.ROTATED
    d = global_x.shape[0]
    comps, kappas = [], []
    for j in range(config.peak_count):
        kappa = config.kappa.from_uniform(rng.random())
        H = sample_hessian(d, kappa, mode, rng)
        if j == 0:
            x, y = global_x, 0.0
        else:
            x = rng.uniform(-OPTIMA_BOX, OPTIMA_BOX, d)
            y = float(rng.uniform(*LOCAL_OFFSET_RANGE))
        comps.append(QuadraticForm(H, x, y))
        kappas.append(kappa)
    return comps, kappas


def _step_sizes(problem: BiObjectiveProblem, n_steps: int | None):
    if n_steps is None:
        return [0.0, 0.0]
    return [float((problem.nadir[i] - problem.ideal[i]) / n_steps) for i in range(2)]


def _assemble(comps1, comps2, transforms, x1, x2) -> BiObjectiveProblem:
    f1 = PeakObjective(tuple(comps1), transforms[0])
    f2 = PeakObjective(tuple(comps2), transforms[1])
    return BiObjectiveProblem(f1, f2, x1, x2)


def _with_steps(problem: BiObjectiveProblem, steps) -> BiObjectiveProblem:
    if not any(steps):
        return problem
    t1, t2 = problem.f1.transform, problem.f2.transform
    f1 = PeakObjective(problem.f1.components,
                       PeakTransform(t1.scale, t1.exponent, t1.offset, steps[0]))
    f2 = PeakObjective(problem.f2.components,
                       PeakTransform(t2.scale, t2.exponent, t2.offset, steps[1]))
    return BiObjectiveProblem(f1, f2, problem.global_optimum_x1, problem.global_optimum_x2,
                              ideal=problem.ideal, nadir=problem.nadir)


def _generate_unimodal(config, d, seed, attempt):
    q1, q2, kappas = _base_pair(config, d, seed, attempt)
    if config.hessian_mode is HessianMode.INDEPENDENT_ROTATED:
        if not verify_pareto_in_bounds((q1, q2), BOUNDS_CHECK_SAMPLES):
            return None
    p, scales, offsets, n_steps = _transforms(config, seed, attempt)
    transforms = [PeakTransform(scales[i], p, offsets[i]) for i in range(2)]
    unimodal = _assemble([q1], [q2], transforms, q1.optimum_x, q2.optimum_x)
    steps = _step_sizes(unimodal, n_steps)
    params = {"attempt": attempt, "kappa": kappas, "exponent": p, "scale": scales,
              "offset": offsets, "n_steps": n_steps, "step": steps}
    return unimodal, steps, params, (q1, q2)


def generate_from_config(config: GeneratorConfig, dimension: int, seed: int) -> ProblemInstance:
    if dimension < 2:
        raise ValueError("dimension must be at least 2")
    d = int(dimension)
    for attempt in range(MAX_ATTEMPTS):
        try:
            built = _build(config, d, seed, attempt)
        except DegenerateInstanceError:
            continue
        if built is None:
            continue
        problem, params, base = built
        return ProblemInstance(config=config, dimension=d, seed=seed, problem=problem,
                               params=params, base_components=base)
    raise GenerationError(f"{config.class_id}: no admissible instance after {MAX_ATTEMPTS} attempts")


def _build(config: GeneratorConfig, d: int, seed: int, attempt: int):
    if config.structure is Structure.RANDOM:
        x1, x2 = sample_optima_pair(d, stream_rng(seed, Stream.OPTIMA, attempt))
        comps, kappas = [], []
        for i, gx in enumerate((x1, x2)):
            c, k = _random_components(gx, config, stream_rng(seed, Stream.RANDOM_PEAKS, attempt, i))
            comps.append(c)
            kappas.append(k)
        p, scales, offsets, n_steps = _transforms(config, seed, attempt)
        transforms = [PeakTransform(scales[i], p, offsets[i]) for i in range(2)]
        smooth = _assemble(comps[0], comps[1], transforms, x1, x2)
        steps = _step_sizes(smooth, n_steps)
        params = {"attempt": attempt, "kappa": kappas, "exponent": p, "scale": scales,
                  "offset": offsets, "n_steps": n_steps, "step": steps}
        return _with_steps(smooth, steps), params, None

    unimodal = _generate_unimodal(config, d, seed, attempt)
    if unimodal is None:
        return None
    problem, steps, params, (q1, q2) = unimodal
    if config.structure is Structure.UNIMODAL:
        return _with_steps(problem, steps), params, None

    # perturbed: inherit transform and step sizes from the unimodal partner
    comps = [
        _perturbed_components(q, params["kappa"][i], config.hessian_mode, config.peak_count,
                              stream_rng(seed, Stream.PERTURBATION, i))
        for i, q in enumerate((q1, q2))
    ]
    smooth = _assemble(comps[0], comps[1], [problem.f1.transform, problem.f2.transform],
                       q1.optimum_x, q2.optimum_x)
    return _with_steps(smooth, steps), params, (q1, q2)


def generate(class_id: str, dimension: int, seed: int) -> ProblemInstance:
    """Generate an instance of a built-in or registered class."""
    return generate_from_config(get_config(class_id), dimension, seed)


def unimodal_partner(class_id: str) -> str | None:
    config = get_config(class_id)
    return config.base_class if config.structure is Structure.PERTURBED else None


__all__ = [
    "Stream",
    "generate",
    "generate_from_config",
    "pareto_set_samples",
    "sample_axis_aligned_pair",
    "sample_hessian",
    "sample_optima_pair",
    "sample_rotation",
    "stream_rng",
    "verify_pareto_in_bounds",
    "ideal_nadir",
]
