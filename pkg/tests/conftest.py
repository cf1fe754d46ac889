import numpy as np
import pytest

from peakbench.peaks import BiObjectiveProblem, PeakObjective, PeakTransform
from peakbench.quadratic import QuadraticForm


def random_spd(rng, d, kappa=None):
    A = rng.standard_normal((d, d))
    Q, _ = np.linalg.qr(A)
    if kappa is None:
        kappa = 10 ** rng.uniform(0, 3)
    lam = np.exp(rng.uniform(0, np.log(kappa), d))
    lam[0], lam[-1] = 1.0, kappa
    return Q.T @ np.diag(lam) @ Q


def random_quadratic(rng, d, y=0.0):
    return QuadraticForm(random_spd(rng, d), rng.uniform(-3, 3, d), y)


def sphere(center, y=0.0):
    c = np.asarray(center, dtype=float)
    return QuadraticForm(np.eye(c.size), c, y)


def make_problem(q1, q2, t1=None, t2=None):
    return BiObjectiveProblem(
        PeakObjective((q1,), t1 or PeakTransform()),
        PeakObjective((q2,), t2 or PeakTransform()),
        q1.optimum_x, q2.optimum_x,
    )


@pytest.fixture
def bisphere():
    return make_problem(sphere([0.0, 0.0]), sphere([2.0, 0.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
