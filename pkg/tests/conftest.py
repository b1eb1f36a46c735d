import numpy as np
import pytest

from safebandits.geometry import Polytope, SimplexSpec, build_simplex
from safebandits.solvers import linear_maximum


@pytest.fixture
def experiment_simplex() -> Polytope:
    """The fixed 3-agent safe set with axis scales (1, 1/4, 1/2)."""
    return build_simplex(SimplexSpec(np.array([1.0, 0.25, 0.5])))


@pytest.fixture
def unit_box_2d() -> Polytope:
    A = np.vstack([np.eye(2), -np.eye(2)])
    return Polytope(A, np.ones(4))


def untag(poly: Polytope) -> Polytope:
    """Strip the simplex tag so oracle-backed paths run."""
    return Polytope(poly.A, poly.b, check_region=False)


def sample_inside(poly: Polytope, n: int, rng: np.random.Generator) -> np.ndarray:
    """Rejection-sample points of the polytope from its bounding box."""
    M = poly.dim
    lo = np.empty(M)
    hi = np.empty(M)
    for j in range(M):
        e = np.zeros(M)
        e[j] = 1.0
        _, hi[j] = linear_maximum(poly.A, poly.b, e)
        _, neg = linear_maximum(poly.A, poly.b, -e)
        lo[j] = -neg
    out = []
    while len(out) < n:
        pts = rng.uniform(lo, hi, size=(4 * n, M))
        ok = np.all(pts @ poly.A.T <= poly.b + 1e-12, axis=1)
        out.extend(pts[ok][: n - len(out)])
    return np.array(out)
