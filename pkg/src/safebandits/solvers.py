"""Small dense optimization routines shared by the geometry and policy layers.

Three tools live here:

* thin LP wrappers (feasibility, boundedness, Chebyshev center) on top of
  ``scipy.optimize.linprog``,
* an active-set quadratic program for Euclidean projection onto a polyhedron,
* a batched log-barrier method that maximizes many linear objectives over one
  shared convex set built from per-agent norm balls and rows of the form
  ``linear + weighted-norm <= offset``.

Everything is sized for desk-scale problems (a handful of agents, single-digit
action dimension) and favors robustness over micro-optimization, except the
batched barrier solver, which sits on the simulation hot path and is fully
vectorized over subproblems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import _kernels

# Feasibility slack used by all LP-based queries.
LP_SLACK = 1e-10


class SolverError(RuntimeError):
    """An optimization routine failed to produce a certified answer."""


# ---------------------------------------------------------------------------
# LP wrappers
# ---------------------------------------------------------------------------


_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10,
               "dual_feasibility_tolerance": 1e-10}


def polyhedron_feasible(A: np.ndarray, b: np.ndarray, slack: float = LP_SLACK) -> bool:
    """Whether ``{x : Ax <= b}`` is nonempty, up to ``slack`` on each row."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    res = linprog(np.zeros(A.shape[1]), A_ub=A, b_ub=b + slack,
                  bounds=[(None, None)] * A.shape[1], method="highs",
                  options=_LP_OPTIONS)
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise SolverError(f"feasibility LP ended with status {res.status}: {res.message}")


def polyhedron_bounded(A: np.ndarray, b: np.ndarray) -> bool:
    """Whether ``{x : Ax <= b}`` is bounded (checked along every axis)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    for j in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[j] = -sign  # maximize sign * x_j
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                return False
            if res.status == 2:
                return True  # empty sets are trivially bounded
            if res.status != 0:
                raise SolverError(f"boundedness LP status {res.status}: {res.message}")
    return True


def chebyshev_center(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Center and radius of the largest ball inscribed in ``{x : Ax <= b}``.

    The radius is negative when the polyhedron is infeasible beyond the LP
    slack, zero when it has empty interior.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    norms = np.linalg.norm(A, axis=1)
    n = A.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, norms[:, None]])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * n + [(None, None)],
                  method="highs")
    if res.status != 0:
        raise SolverError(f"Chebyshev LP status {res.status}: {res.message}")
    return res.x[:n], res.x[n]


def linear_maximum(A: np.ndarray, b: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, float]:
    """Maximize ``w @ x`` over ``{x : Ax <= b}`` (must be bounded, nonempty)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    res = linprog(-np.asarray(w, dtype=float), A_ub=A, b_ub=b,
                  bounds=[(None, None)] * A.shape[1], method="highs")
    if res.status != 0:
        raise SolverError(f"linear max LP status {res.status}: {res.message}")
    return res.x, -res.fun


# ---------------------------------------------------------------------------
# Active-set projection
# ---------------------------------------------------------------------------


def project_onto_polyhedron(point: np.ndarray, A: np.ndarray, b: np.ndarray,
                            kkt_tol: float = 1e-8, max_iter: int = 200) -> np.ndarray:
    """Euclidean projection of ``point`` onto ``{x : Ax <= b}``.

    Primal active-set method for the projection QP. The identity Hessian makes
    every subproblem a least-squares solve on the working set; suitable for
    the desk-scale shapes used here (P <= 32 rows, dimension <= 8).

    Raises
    ------
    SolverError
        If the polyhedron is empty or the iteration limit is hit.
    """
    p = np.asarray(point, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    P = A.shape[0]

    if np.all(A @ p <= b + kkt_tol):
        return p.copy()

    x, radius = chebyshev_center(A, b)
    if radius < -LP_SLACK:
        raise SolverError("cannot project onto an empty polyhedron")

    work: list[int] = []
    for _ in range(max_iter):
        if work:
            Aw = A[work]
            gram = Aw @ Aw.T
            # Direction: project the residual p - x onto the null space of Aw.
            lam = np.linalg.lstsq(gram, Aw @ (p - x), rcond=None)[0]
            d = (p - x) - Aw.T @ lam
        else:
            d = p - x

        if np.linalg.norm(d) <= kkt_tol:
            if not work:
                return x
            lam = np.linalg.lstsq(A[work].T, p - x, rcond=None)[0]
            if np.all(lam >= -kkt_tol):
                return x
            work.pop(int(np.argmin(lam)))
            continue

        # Step toward the unconstrained minimizer of the working-set problem,
        # stopping at the first blocking row.
        alpha = 1.0
        blocking = -1
        Ad = A @ d
        for i in range(P):
            if i in work or Ad[i] <= kkt_tol * max(1.0, np.linalg.norm(d)):
                continue
            step = (b[i] - A[i] @ x) / Ad[i]
            if step < alpha:
                alpha = max(step, 0.0)
                blocking = i
        x = x + alpha * d
        if blocking >= 0:
            work.append(blocking)
    raise SolverError("active-set projection did not converge")


# ---------------------------------------------------------------------------
# Batched barrier maximizer
# ---------------------------------------------------------------------------

_NORM_SMOOTHING = 1e-20  # floor for the smoothing under the weighted-norm sqrt
_FEAS_MARGIN = 1e-13     # strictness margin when restoring interior points


@dataclass
class BarrierResult:
    x: np.ndarray        # (B, M, d) maximizers
    value: np.ndarray    # (B,) objective values
    converged: np.ndarray  # (B,) bool
    newton_iters: int
    x_mid: np.ndarray | None = None  # moderate-accuracy central points (warm starts)


class ConicSafeSet:
    """Shared feasible set for the optimistic action subproblems.

    The set is ``{X = (x_1..x_M) : ||x_m||_2 <= K`` and, for every row ``i``,
    ``sum_m (abar[i,m] @ x_m + s[i,m] * ||x_m||_{Q_m}) <= b_i}`` with the
    ``Q_m`` positive definite. The origin must be strictly feasible
    (``b > 0``), which anchors interior restarts.
    """

    #: compiled Newton stage (numba); the numpy reference runs when False.
    use_compiled = _kernels.HAVE_NUMBA

    def __init__(self, abar: np.ndarray, s: np.ndarray, Q: np.ndarray,
                 b: np.ndarray, K: float):
        self.abar = np.ascontiguousarray(abar, dtype=float)   # (P, M, d)
        self.s = np.ascontiguousarray(s, dtype=float)         # (P, M)
        self.Q = np.ascontiguousarray(Q, dtype=float)         # (M, d, d)
        self.b = np.ascontiguousarray(b, dtype=float)         # (P,)
        self.K = float(K)
        self.P, self.M, self.d = self.abar.shape
        self.n = self.M * self.d
        if np.any(self.b <= 0):
            raise SolverError("conic safe set requires b > 0 (origin interior)")
        # worst-case per-row weighted-norm mass; bounds how much the stage
        # smoothing can tighten any row
        rowsum = self.s.sum(axis=1)
        self._row_mass = float(rowsum.max()) if rowsum.size else 0.0
        active = rowsum > 0
        self._smooth_cap = (0.25 * float(np.min(self.b[active] / rowsum[active]))
                            if active.any() else 0.0)

    def row_slacks(self, X: np.ndarray) -> np.ndarray:
        """``b_i - row_i(X)`` for a single point ``X`` of shape (M, d)."""
        norms = np.sqrt(np.einsum("md,mde,me->m", X, self.Q, X))
        lin = np.einsum("pmd,md->p", self.abar, X)
        return self.b - lin - self.s @ norms

    # -- batched internals ---------------------------------------------------

    def _norms(self, X: np.ndarray,
               eps: float = _NORM_SMOOTHING) -> tuple[np.ndarray, np.ndarray]:
        QX = np.einsum("mde,bme->bmd", self.Q, X)
        nrm = np.sqrt(np.einsum("bmd,bmd->bm", X, QX) + eps)
        return nrm, QX

    def _phi_g(self, X: np.ndarray,
               eps: float = _NORM_SMOOTHING) -> tuple[np.ndarray, np.ndarray]:
        """Row values ``phi <= 0`` (B, P) and ball values ``g <= 0`` (B, M)."""
        nrm, _ = self._norms(X, eps)
        lin = np.einsum("pmd,bmd->bp", self.abar, X)
        phi = lin + nrm @ self.s.T - self.b
        g = np.einsum("bmd,bmd->bm", X, X) - self.K ** 2
        return phi, g

    def smoothing_for(self, mu: float) -> float:
        """Stage smoothing under the weighted-norm sqrt.

        Matched to the barrier weight so iterates near a norm's nonsmooth
        origin see curvature at their own step scale; capped so the
        (conservative) tightening never empties the interior around the
        origin.
        """
        if self._smooth_cap == 0.0:
            return _NORM_SMOOTHING
        return max(min(self._smooth_cap, mu) ** 2, _NORM_SMOOTHING)

    def strictly_feasible(self, X: np.ndarray,
                          eps: float = _NORM_SMOOTHING) -> np.ndarray:
        phi, g = self._phi_g(X, eps)
        return (phi < -_FEAS_MARGIN).all(axis=1) & (g < -_FEAS_MARGIN).all(axis=1)

    def _barrier_value(self, X: np.ndarray, W: np.ndarray, mu: float,
                       eps: float = _NORM_SMOOTHING) -> np.ndarray:
        """Barrier objective only; ``+inf`` for points outside the interior."""
        phi, g = self._phi_g(X, eps)
        ok = (phi < 0).all(axis=1) & (g < 0).all(axis=1)
        val = np.full(X.shape[0], np.inf)
        if ok.any():
            val[ok] = (-np.einsum("bmd,bmd->b", W[ok], X[ok])
                       - mu * (np.log(-phi[ok]).sum(axis=1)
                               + np.log(-g[ok]).sum(axis=1)))
        return val

    def certified_bounds(self, X: np.ndarray, W: np.ndarray, mu: float,
                         eps: float = _NORM_SMOOTHING) -> tuple[np.ndarray, np.ndarray]:
        """Objective values and rigorous upper bounds at interior points.

        At any strictly feasible ``X`` the multipliers ``mu / (-c_j)`` are
        dual feasible, so each optimum is at most
        ``W . X + n_cons * mu + ||barrier gradient|| * diameter``; the
        gradient term vanishes on the central path.
        """
        B = X.shape[0]
        nrm, QX = self._norms(X, eps)
        lin = np.einsum("pmd,bmd->bp", self.abar, X)
        phi = lin + nrm @ self.s.T - self.b
        g = np.einsum("bmd,bmd->bm", X, X) - self.K ** 2
        dnorm = QX / nrm[..., None]
        gphi = self.abar[None] + self.s[None, :, :, None] * dnorm[:, None]
        grad = -W + mu * (np.einsum("bp,bpmd->bmd", 1.0 / (-phi), gphi)
                          + 2.0 * X / (-g)[..., None])
        value = np.einsum("bmd,bmd->b", W, X)
        diam = 2.0 * self.K * np.sqrt(self.M)
        resid = np.linalg.norm(grad.reshape(B, self.n), axis=1)
        return value, value + (self.P + self.M) * mu + diam * resid

    def pull_inside(self, X: np.ndarray,
                    eps: float = _NORM_SMOOTHING) -> np.ndarray:
        """Scale each batch point toward the origin until strictly feasible.

        Uses the convexity bound ``c(tau X) <= tau c(X) + (1 - tau) c(0)`` to
        pick the per-point scale in one shot, so barely-infeasible warm
        starts stay close to where they were.
        """
        phi, g = self._phi_g(X, eps)
        margin_rows = 1e-12 * (1.0 + np.abs(self.b))
        # smoothed rows at the origin sit at s_row * sqrt(eps) - b
        b_eff = self.b - self.s.sum(axis=1) * np.sqrt(eps)
        denom = phi + b_eff[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            tau_rows = np.where(denom > 0,
                                (b_eff - margin_rows)[None, :] / denom, 1.0)
        sq = np.einsum("bmd,bmd->bm", X, X)
        margin_ball = 1e-12 * (1.0 + self.K ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            tau_ball = np.where(sq > self.K ** 2 - margin_ball,
                                np.sqrt(np.maximum(self.K ** 2 - margin_ball, 0.0)
                                        / np.maximum(sq, 1e-300)), 1.0)
        tau = np.minimum(1.0, np.minimum(tau_rows.min(axis=1),
                                         tau_ball.min(axis=1)))
        tau = np.where(np.isfinite(tau), np.clip(tau, 0.0, 1.0), 0.0)
        # the convexity bound makes the scaled points strictly feasible
        return tau[:, None, None] * X

    def _barrier_terms(self, X: np.ndarray, W: np.ndarray, mu: float,
                       eps: float = _NORM_SMOOTHING):
        """Value, gradient and Hessian of the barrier objective.

        Minimizes ``-W . X - mu * sum log(-constraint)``; returns None value
        for infeasible points (caller handles via line search).
        """
        B = X.shape[0]
        nrm, QX = self._norms(X, eps)
        lin = np.einsum("pmd,bmd->bp", self.abar, X)
        phi = lin + nrm @ self.s.T - self.b          # (B, P)
        g = np.einsum("bmd,bmd->bm", X, X) - self.K ** 2

        val = -np.einsum("bmd,bmd->b", W, X) - mu * (
            np.log(-phi).sum(axis=1) + np.log(-g).sum(axis=1))

        dnorm = QX / nrm[..., None]                  # (B, M, d)
        # grad phi_i wrt x_m: abar[i,m] + s[i,m] * dnorm_m
        gphi = self.abar[None] + self.s[None, :, :, None] * dnorm[:, None]  # (B,P,M,d)
        inv_phi = 1.0 / (-phi)                        # (B, P)
        inv_g = 1.0 / (-g)                            # (B, M)

        grad = -W + mu * (
            np.einsum("bp,bpmd->bmd", inv_phi, gphi) + 2.0 * X * inv_g[..., None])

        # Hessian: row outer products couple agents; the curvature of the
        # weighted norms and of the balls stays block-diagonal per agent.
        gphi_flat = gphi.reshape(B, self.P, self.n)
        H = mu * np.einsum("bpi,bpj,bp->bij", gphi_flat, gphi_flat, inv_phi ** 2)

        kappa = np.einsum("bp,pm->bm", inv_phi, self.s)   # (B, M)
        hnorm = (self.Q[None] / nrm[..., None, None]
                 - np.einsum("bmd,bme->bmde", QX, QX) / nrm[..., None, None] ** 3)
        blocks = mu * (
            kappa[..., None, None] * hnorm
            + 4.0 * np.einsum("bmd,bme->bmde", X, X) * (inv_g ** 2)[..., None, None]
            + 2.0 * inv_g[..., None, None] * np.eye(self.d))
        for m in range(self.M):
            sl = slice(m * self.d, (m + 1) * self.d)
            H[:, sl, sl] += blocks[:, m]
        return val, grad.reshape(B, self.n), H

    def _newton(self, X: np.ndarray, W: np.ndarray, mu: float, max_iter: int,
                tol: float,
                eps: float = _NORM_SMOOTHING) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
        """Damped Newton on the barrier at fixed ``mu``.

        Returns the points, the converged mask, the last Newton decrements,
        and the iteration count. Elements whose line search stalls are frozen
        at their current point and reported unconverged, so one stubborn
        subproblem cannot thrash the whole batch. Dispatches to the compiled
        kernel when available; the numpy body below is the reference
        implementation of the same iteration.
        """
        if self.use_compiled:
            done, dec, iters = _kernels.newton_stage(
                X, np.ascontiguousarray(W), self.abar, self.s, self.Q,
                self.b, self.K, float(mu), int(max_iter), float(tol),
                float(eps))
            return X, done, dec, iters
        B = X.shape[0]
        done = np.zeros(B, dtype=bool)
        stalled = np.zeros(B, dtype=bool)
        decrement = np.full(B, np.inf)
        iters = 0
        eye = np.eye(self.n)
        for _ in range(max_iter):
            val, grad, H = self._barrier_terms(X, W, mu, eps)
            # Jacobi scaling keeps the solve usable when active constraints
            # push the Hessian towards singular conditioning.
            dscale = 1.0 / np.sqrt(np.maximum(
                np.einsum("bii->bi", H), 1e-30))
            H = H * dscale[:, :, None] * dscale[:, None, :]
            H += 1e-14 * eye
            rhs = -grad * dscale
            try:
                step = np.linalg.solve(H, rhs[..., None])[..., 0] * dscale
            except np.linalg.LinAlgError:
                step = np.stack([np.linalg.lstsq(H[k], rhs[k], rcond=None)[0]
                                 for k in range(B)]) * dscale
            decrement = np.abs(np.einsum("bi,bi->b", grad, step))
            done = decrement <= tol
            if (done | stalled).all():
                break
            iters += 1
            step = step.reshape(X.shape)
            skip = done | stalled
            t = np.where(skip, 0.0, 1.0)
            accepted = skip.copy()
            for _ in range(40):
                cand = X + t[:, None, None] * step
                cand_val = self._barrier_value(cand, W, mu, eps)
                improve = cand_val <= val - 0.25 * t * decrement
                newly = ~accepted & improve
                X[newly] = cand[newly]
                accepted |= newly
                stalled |= ~accepted & (t < 1e-13)
                accepted |= stalled
                if accepted.all():
                    break
                t = np.where(accepted, t, t * 0.5)
        return X, done & ~stalled, decrement, iters

    def _cold_solve(self, W: np.ndarray,
                    mu_to: float) -> tuple[np.ndarray, np.ndarray, int]:
        """Barrier schedule from the origin down to ``mu_to``."""
        n_cons = self.P + self.M
        X = np.zeros((W.shape[0], self.M, self.d))
        total = 0
        mu = max(1e-2, mu_to)
        while True:
            X, ok, dec, it = self._newton(X, W, mu, 30,
                                          max(1e-12, 0.2 * mu),
                                          eps=self.smoothing_for(mu))
            total += it
            if mu <= mu_to:
                return X, ok | (dec <= 0.25 * mu), total
            mu = max(mu * 0.1, mu_to)

    def maximize(self, W: np.ndarray, x0: np.ndarray | None = None,
                 gap: float = 1e-8, mid_gap: float = 1e-4,
                 refine_all: bool = False) -> BarrierResult:
        """Maximize ``W[k] . X`` over the set for every batch objective.

        Cascade with screening. Every subproblem is first centered at a
        robust barrier weight (warm-started from ``x0`` when given); from
        there the whole surviving batch follows the schedule down to duality
        measure ``gap``, and after each stage the central-path certificate
        (optimum within ``2 n mu`` of a near-central value, where a Newton
        decrement below ``mu/4`` counts as near-central) drops subproblems
        that can no longer attain the incumbent. Elements that fail to
        center are re-solved cold before being trusted. The best value is
        always exact to ``gap``; screened-out entries report certified lower
        bounds. ``refine_all`` refines every subproblem (verification
        paths).
        """
        W = np.asarray(W, dtype=float)
        B = W.shape[0]
        n_cons = self.P + self.M
        mu_final = max(gap / n_cons, 1e-14)
        mu_top = max(mid_gap / n_cons, mu_final)
        total_iters = 0

        if x0 is not None and np.asarray(x0).shape == (B, self.M, self.d):
            eps_top = self.smoothing_for(mu_top)
            X = self.pull_inside(np.array(x0, dtype=float), eps_top)
            X, ok, dec, it = self._newton(X, W, mu_top, 12,
                                          0.2 * mu_top, eps=eps_top)
            total_iters += it
            certified = ok | (dec <= 0.25 * mu_top)
            if not certified.all():
                idx = np.flatnonzero(~certified)
                Xc, okc, itc = self._cold_solve(W[idx], mu_top)
                total_iters += itc
                X[idx] = Xc
                certified[idx] = okc
        else:
            X, certified, it = self._cold_solve(W, mu_top)
            total_iters += it
        value = np.einsum("bmd,bmd->b", W, X)
        x_mid = X.copy()
        X = X.copy()

        if refine_all:
            cand = np.arange(B)
        else:
            # Interior values are valid lower bounds; only certified points
            # get a finite upper bound. The row-mass term absorbs the gap
            # between this stage's smoothed rows and the final ones.
            slack = (2.0 * n_cons + self._row_mass) * mu_top
            bound = np.where(certified, value + slack, np.inf)
            cand = np.flatnonzero(bound >= value.max())

        converged = np.ones(B, dtype=bool)
        rescued = np.zeros(B, dtype=bool)
        mu = mu_top
        Xr, Wr = X[cand].copy(), W[cand]
        while mu > mu_final:
            mu = max(mu * 0.1, mu_final)
            Xr, ok, dec, it = self._newton(Xr, Wr, mu, 20,
                                           max(1e-12, 0.2 * mu),
                                           eps=self.smoothing_for(mu))
            total_iters += it
            cert = ok | (dec <= 0.25 * mu)
            fresh = ~cert & ~rescued[cand]
            if fresh.any():
                # One-shot rescue: re-solve first-time stragglers from
                # scratch; a certified cold point supersedes the stale one.
                idx = np.flatnonzero(fresh)
                Xc, okc, itc = self._cold_solve(Wr[idx], mu)
                total_iters += itc
                vc = np.einsum("bmd,bmd->b", Wr[idx], Xc)
                vr = np.einsum("bmd,bmd->b", Wr[idx], Xr[idx])
                take = okc | (vc >= vr)
                Xr[idx[take]] = Xc[take]
                cert[idx] = okc
                rescued[cand[idx]] = True
            X[cand] = Xr
            value[cand] = np.einsum("bmd,bmd->b", Wr, Xr)
            if mu <= mu_final:
                converged[cand] = cert
                break
            if not refine_all and cand.size > 1:
                v = value[cand]
                # Certified candidates carry the central-path bound;
                # uncertifiable ones fall back to the (looser but rigorous)
                # gradient-residual bound so persistent stragglers that
                # provably cannot win still leave the cascade.
                slack = (2.0 * n_cons + self._row_mass) * mu
                bnd = np.where(cert, v + slack, np.inf)
                uncert = np.flatnonzero(~cert)
                if uncert.size:
                    _, gb = self.certified_bounds(
                        Xr[uncert], Wr[uncert], mu, self.smoothing_for(mu))
                    bnd[uncert] = gb + self._row_mass * mu
                keep = bnd >= v.max()
                if not keep.all():
                    cand, Xr, Wr = cand[keep], Xr[keep], Wr[keep]

        return BarrierResult(x=X, value=value, converged=converged,
                             newton_iters=total_iters, x_mid=x_mid)

    def maximize_robust(self, W: np.ndarray, x0: np.ndarray | None = None,
                        gap: float = 1e-8) -> BarrierResult:
        """``maximize`` with a projected-subgradient fallback on barrier failure."""
        res = self.maximize(W, x0=x0, gap=gap)
        if not res.converged.all():
            bad = np.flatnonzero(~res.converged)
            for k in bad:
                x, v = self._subgradient_fallback(W[k])
                if v > res.value[k]:
                    res.x[k] = x
                    res.value[k] = v
            res.converged[:] = True
        return res

    def _subgradient_fallback(self, w: np.ndarray,
                              iters: int = 300) -> tuple[np.ndarray, float]:
        """Feasible ascent: step along the objective, then scale back inside."""
        x = np.zeros((1, self.M, self.d))
        best = x[0].copy()
        best_val = 0.0
        wn = np.linalg.norm(w)
        if wn == 0:
            return best, 0.0
        scale = self.K * np.sqrt(self.M) / wn
        for k in range(1, iters + 1):
            cand = x + (scale / np.sqrt(k)) * w[None]
            lo, hi = 0.0, 1.0
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if self.strictly_feasible(mid * cand)[0]:
                    lo = mid
                else:
                    hi = mid
            x = lo * cand
            val = float(np.sum(w * x[0]))
            if val > best_val:
                best_val = val
                best = x[0].copy()
        return best, best_val
