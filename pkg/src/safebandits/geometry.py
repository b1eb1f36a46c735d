"""Polytopic safe-set geometry: shrinkage, maximum shrinkage, and sharpness.

Safe sets are halfspace intersections ``{x : Ax <= b}``. Diagonally scaled
simplices get closed-form shrinkage and sharpness; general (small) polytopes
fall back to LP bisection and vertex projection oracles. All values are
immutable after construction, so they can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, InitVar
from itertools import combinations
from math import comb

import numpy as np

from . import solvers
from .solvers import SolverError

FEAS_TOL = 1e-9
_BISECT_TOL = 1e-9
_MAX_VERTEX_SUBSETS = 200_000


class GeometryError(ValueError):
    """Invalid geometric specification or unsupported computation."""


def _locked(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass
class SimplexSpec:
    """Diagonal scaling of the standard simplex, one scale ``c_m`` per axis."""

    c: np.ndarray

    def __post_init__(self):
        self.c = _locked(np.atleast_1d(self.c))
        if self.c.ndim != 1 or self.c.size < 1:
            raise GeometryError("simplex spec needs a 1-D vector of scales")
        if not np.all(np.isfinite(self.c)) or np.any(self.c <= 0):
            raise GeometryError("simplex scales must be finite and positive")

    @property
    def q(self) -> float:
        return float(np.sum(1.0 / self.c))

    @property
    def dim(self) -> int:
        return self.c.size

    def to_text(self) -> str:
        return "simplex\nc\n" + " ".join(repr(float(v)) for v in self.c) + "\n"


@dataclass
class ScalingTransform:
    """Diagonal response-space transform ``diag(1/beta_m)`` applied to a set."""

    beta: np.ndarray

    def __post_init__(self):
        self.beta = _locked(np.atleast_1d(self.beta))
        if not np.all(np.isfinite(self.beta)) or np.any(self.beta <= 0):
            raise GeometryError("scaling requires finite positive beta")

    def inverse(self) -> "ScalingTransform":
        return ScalingTransform(1.0 / self.beta)


@dataclass
class Polytope:
    """Bounded halfspace intersection ``{x in R^M : Ax <= b}``.

    ``simplex_c``/``simplex_beta`` tag polytopes produced by
    :func:`build_simplex` (and its scalings), unlocking the closed-form
    shrinkage and sharpness paths. Construction verifies boundedness and
    nonemptiness via LPs unless ``check_region`` is disabled by an internal
    caller that guarantees them (or, for shrunk sets, tolerates emptiness).
    """

    A: np.ndarray
    b: np.ndarray
    simplex_c: np.ndarray | None = None
    simplex_beta: np.ndarray | None = None
    check_region: InitVar[bool] = True

    def __post_init__(self, check_region: bool):
        self.A = _locked(np.atleast_2d(self.A))
        self.b = _locked(np.atleast_1d(self.b))
        if self.A.ndim != 2 or self.b.ndim != 1 or self.A.shape[0] != self.b.size:
            raise GeometryError("A must be P x M with a length-P offset vector b")
        if self.A.shape[0] < 1 or self.A.shape[1] < 1:
            raise GeometryError("need at least one row and one column")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise GeometryError("polytope data must be finite")
        if self.simplex_c is not None:
            self.simplex_c = _locked(self.simplex_c)
            self.simplex_beta = _locked(self.simplex_beta)
        if check_region:
            if not solvers.polyhedron_feasible(self.A, self.b):
                raise GeometryError("polytope is empty")
            if not solvers.polyhedron_bounded(self.A, self.b):
                raise GeometryError("polytope is unbounded")

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def is_simplex(self) -> bool:
        return self.simplex_c is not None

    def contains(self, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
        return bool(np.all(self.A @ np.asarray(x, dtype=float) <= self.b + tol))

    def is_empty(self) -> bool:
        return not solvers.polyhedron_feasible(self.A, self.b)

    def row_l1_norms(self) -> np.ndarray:
        return np.abs(self.A).sum(axis=1)

    def to_text(self) -> str:
        lines = [f"polytope {self.n_rows} {self.dim}", "A"]
        lines += [" ".join(repr(float(v)) for v in row) for row in self.A]
        lines.append("b")
        lines.append(" ".join(repr(float(v)) for v in self.b))
        return "\n".join(lines) + "\n"


def geometry_from_text(text: str) -> Polytope:
    """Parse the plain-text set format; simplex files come back tagged."""
    tokens = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not tokens:
        raise GeometryError("empty geometry file")
    head = tokens[0].split()
    if head[0] == "simplex":
        if len(tokens) < 3 or tokens[1] != "c":
            raise GeometryError("simplex format: 'simplex', 'c', one row of scales")
        return build_simplex(SimplexSpec(np.array([float(v) for v in tokens[2].split()])))
    if head[0] == "polytope":
        if len(head) != 3:
            raise GeometryError("polytope header must be 'polytope P M'")
        P, M = int(head[1]), int(head[2])
        if tokens[1] != "A" or len(tokens) != P + 4 or tokens[P + 2] != "b":
            raise GeometryError("polytope format: header, 'A', P rows, 'b', one row")
        A = np.array([[float(v) for v in tokens[2 + i].split()] for i in range(P)])
        b = np.array([float(v) for v in tokens[P + 3].split()])
        if A.shape != (P, M) or b.shape != (P,):
            raise GeometryError("polytope data does not match the declared shape")
        return Polytope(A, b)
    raise GeometryError(f"unknown geometry kind {head[0]!r}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def build_simplex(spec: SimplexSpec) -> Polytope:
    """Halfspace form of the scaled simplex with interior origin.

    The first row is ``(1/c_1, ..., 1/c_M)`` with offset 1/2; the remaining
    rows are ``-e_m`` with offset ``1/(2q)``, ``q = sum 1/c_m``.
    """
    M = spec.dim
    A = np.vstack([1.0 / spec.c, -np.eye(M)])
    b = np.concatenate([[0.5], np.full(M, 1.0 / (2.0 * spec.q))])
    return Polytope(A, b, simplex_c=spec.c, simplex_beta=np.ones(M),
                    check_region=False)


def apply_scaling(poly: Polytope, t: ScalingTransform) -> Polytope:
    """Image of the set under ``diag(1/beta)``: column ``m`` of A gains ``beta_m``."""
    if t.beta.size != poly.dim:
        raise GeometryError(
            f"scaling dimension {t.beta.size} != polytope dimension {poly.dim}")
    A_scaled = poly.A * t.beta[None, :]
    beta = None if poly.simplex_beta is None else poly.simplex_beta * t.beta
    return Polytope(A_scaled, poly.b, simplex_c=poly.simplex_c,
                    simplex_beta=beta, check_region=False)


def shrink(poly: Polytope, delta: float) -> Polytope:
    """Points that stay in the set under any inf-norm perturbation <= delta.

    Each halfspace shrinks to ``a_j @ x <= b_j - delta * ||a_j||_1``. The
    result may be empty; query with ``is_empty`` rather than catching errors.
    """
    if delta < 0:
        raise GeometryError("shrinkage must be nonnegative")
    b_new = poly.b - delta * poly.row_l1_norms()
    return Polytope(poly.A, b_new, check_region=False)


def max_shrinkage(poly: Polytope) -> float:
    """Largest delta with a nonempty shrunk set.

    Scaled simplices use the closed form ``1 / (2 q')`` with
    ``q' = sum beta_m / c_m``; general polytopes bisect on LP feasibility to
    absolute tolerance 1e-9.
    """
    if poly.is_simplex:
        q_prime = float(np.sum(poly.simplex_beta / poly.simplex_c))
        return 1.0 / (2.0 * q_prime)
    if poly.is_empty():
        raise GeometryError("maximum shrinkage of an empty polytope")
    # Per-row upper bound: delta <= (b_j - min_Y a_j @ x) / ||a_j||_1.
    norms = poly.row_l1_norms()
    hi = np.inf
    for j in range(poly.n_rows):
        if norms[j] == 0:
            continue
        _, row_max = solvers.linear_maximum(poly.A, poly.b, -poly.A[j])
        hi = min(hi, (poly.b[j] + row_max) / norms[j])
    if not np.isfinite(hi):
        raise GeometryError("could not bound the shrinkage range")
    lo = 0.0
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if solvers.polyhedron_feasible(poly.A, poly.b - mid * norms):
            lo = mid
        else:
            hi = mid
    return lo


def vertices(poly: Polytope) -> list[np.ndarray]:
    """Extreme points of the polytope.

    Simplex-tagged sets return exactly M+1 vertices via row-deletion solves
    (a singular deleted system means a degenerate simplex and is an error).
    Other polytopes enumerate all M-row subsets, keeping feasible basic
    solutions; that path is limited to desk-scale row counts.
    """
    A, b, M = poly.A, poly.b, poly.dim
    if poly.is_simplex:
        out = []
        for r in range(M + 1):
            keep = [j for j in range(M + 1) if j != r]
            try:
                v = np.linalg.solve(A[keep], b[keep])
            except np.linalg.LinAlgError:
                raise GeometryError(f"degenerate simplex: rows {keep} are singular")
            out.append(v)
        return out
    if comb(poly.n_rows, M) > _MAX_VERTEX_SUBSETS:
        raise GeometryError(
            f"vertex enumeration over {poly.n_rows} rows in dimension {M} "
            "exceeds the supported size")
    out = []
    for rows in combinations(range(poly.n_rows), M):
        sub = A[list(rows)]
        if np.linalg.matrix_rank(sub, tol=1e-12) < M:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if not poly.contains(v, tol=FEAS_TOL):
            continue
        if any(np.linalg.norm(v - u) <= 1e-8 * (1.0 + np.linalg.norm(v)) for u in out):
            continue
        out.append(v)
    return out


def project(point: np.ndarray, poly: Polytope) -> np.ndarray:
    """Closest point of the polytope in Euclidean norm."""
    try:
        return solvers.project_onto_polyhedron(point, poly.A, poly.b)
    except SolverError as exc:
        raise GeometryError(str(exc)) from exc


def sharpness(poly: Polytope, delta: float) -> float:
    """Worst-case distance from the set to its delta-shrunk version.

    Scaled simplices use ``delta * sqrt((M-1) + (2 q' rho_tilde - 1)^2)``
    with ``rho_m = c_m / beta_m``. For general polytopes the supremum of the
    (convex) distance-to-shrunk-set function is attained at a vertex, so the
    value is the max over vertices of the distance to their projections.
    """
    if delta < 0:
        raise GeometryError("sharpness needs nonnegative delta")
    if delta == 0:
        return 0.0
    H = max_shrinkage(poly)
    if delta > H + _BISECT_TOL:
        raise GeometryError(
            f"shrinkage {delta} exceeds the maximum shrinkage {H}")
    if poly.is_simplex:
        M = poly.dim
        rho = poly.simplex_c / poly.simplex_beta
        q_prime = float(np.sum(1.0 / rho))
        rho_tilde = float(np.max(rho))
        return delta * np.sqrt((M - 1) + (2.0 * q_prime * rho_tilde - 1.0) ** 2)
    shrunk = shrink(poly, min(delta, H))
    best = 0.0
    for v in vertices(poly):
        best = max(best, float(np.linalg.norm(v - project(v, shrunk))))
    return best
