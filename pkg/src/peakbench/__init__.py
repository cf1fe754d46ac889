"""Bi-objective peak-function benchmark generator with certified front approximation."""

from peakbench.archive import Dominance, NondominatedArchive2D, dominates
from peakbench.config import BONO_CLASSES, GeneratorConfig, class_ids, get_config
from peakbench.frontapprox import FrontApproximation, approximate_front
from peakbench.generator import generate, generate_from_config
from peakbench.harness import (CountingEvaluator, RunRecord, TargetSet, make_targets, run,
                               targets_from_front)
from peakbench.indicators import HV, R2, IndicatorKind, exact_r2, hypervolume2d, segment_epsilon
from peakbench.instance import ProblemInstance, deserialize, serialize
from peakbench.peaks import BiObjectiveProblem, PeakObjective, PeakTransform
from peakbench.profiles import ProfileCurve, aggregate, virtual_best
from peakbench.quadratic import QuadraticForm
from peakbench.solvers import SolverConfig, make_solver, nsga2_lite, random_search

__version__ = "0.1.0"

__all__ = [
    "BONO_CLASSES", "BiObjectiveProblem", "CountingEvaluator", "Dominance", "FrontApproximation",
    "GeneratorConfig", "HV", "IndicatorKind", "NondominatedArchive2D", "PeakObjective",
    "PeakTransform", "ProblemInstance", "ProfileCurve", "QuadraticForm", "R2", "RunRecord",
    "SolverConfig", "TargetSet", "aggregate", "approximate_front", "class_ids", "deserialize",
    "dominates", "exact_r2", "generate", "generate_from_config", "get_config", "hypervolume2d",
    "make_solver", "make_targets", "nsga2_lite", "random_search", "run", "segment_epsilon",
    "serialize", "targets_from_front", "virtual_best",
]
