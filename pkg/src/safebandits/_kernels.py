"""Compiled inner loops for the barrier solver.

The batched damped-Newton stage dominates simulation time: a few hundred
small subproblems, each a handful of constraint evaluations, a dense
Cholesky solve of dimension M*d, and a backtracking line search. At these
sizes the arithmetic is trivial next to array-dispatch overhead, so the
stage is written as explicit loops and compiled with numba (cached across
processes). ``solvers`` falls back to its numpy implementation when numba is
unavailable; both paths compute the same iteration.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - the reference path covers this
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

_FEAS_MARGIN = 1e-13


@njit(cache=True)
def _eval_constraints(x, abar, s, Q, b, Ksq, phi, g, nrm, QX, eps):
    """Fill phi (P,), g (M,), nrm (M,), QX (M,d) at one point x (M, d)."""
    P, M, d = abar.shape
    for m in range(M):
        sq = 0.0
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += Q[m, i, j] * x[m, j]
            QX[m, i] = acc
        qf = eps
        for i in range(d):
            qf += x[m, i] * QX[m, i]
            sq += x[m, i] * x[m, i]
        nrm[m] = np.sqrt(qf)
        g[m] = sq - Ksq
    for p in range(P):
        acc = -b[p]
        for m in range(M):
            for i in range(d):
                acc += abar[p, m, i] * x[m, i]
            acc += s[p, m] * nrm[m]
        phi[p] = acc


@njit(cache=True)
def _barrier_val(x, w, abar, s, Q, b, Ksq, mu, phi, g, nrm, QX, eps):
    """Barrier value at x, or +inf when x is not strictly inside."""
    _eval_constraints(x, abar, s, Q, b, Ksq, phi, g, nrm, QX, eps)
    P, M, d = abar.shape
    val = 0.0
    for m in range(M):
        for i in range(d):
            val -= w[m, i] * x[m, i]
    for p in range(P):
        if phi[p] >= -_FEAS_MARGIN:
            return np.inf
        val -= mu * np.log(-phi[p])
    for m in range(M):
        if g[m] >= -_FEAS_MARGIN:
            return np.inf
        val -= mu * np.log(-g[m])
    return val


@njit(cache=True)
def _cholesky_solve(H, rhs, n):
    """Solve H y = rhs in place for SPD H (returns False on breakdown)."""
    for i in range(n):
        for j in range(i + 1):
            acc = H[i, j]
            for k in range(j):
                acc -= H[i, k] * H[j, k]
            if i == j:
                if acc <= 0.0:
                    return False
                H[i, i] = np.sqrt(acc)
            else:
                H[i, j] = acc / H[j, j]
    for i in range(n):
        acc = rhs[i]
        for k in range(i):
            acc -= H[i, k] * rhs[k]
        rhs[i] = acc / H[i, i]
    for i in range(n - 1, -1, -1):
        acc = rhs[i]
        for k in range(i + 1, n):
            acc -= H[k, i] * rhs[k]
        rhs[i] = acc / H[i, i]
    return True


@njit(cache=True)
def newton_stage(X, W, abar, s, Q, b, K, mu, max_iter, tol, eps):
    """Damped Newton at fixed barrier weight, element by element.

    Mutates X; returns (converged mask, final decrements, total iterations).
    Matches the numpy reference in ``solvers`` including the Jacobi-scaled
    solve and the Armijo backtracking rule.
    """
    B, M, d = X.shape
    P = b.shape[0]
    n = M * d
    Ksq = K * K
    done = np.zeros(B, np.bool_)
    dec_out = np.empty(B)
    total = 0

    phi = np.empty(P)
    g = np.empty(M)
    nrm = np.empty(M)
    QX = np.empty((M, d))
    grad = np.empty(n)
    H = np.empty((n, n))
    Hw = np.empty((n, n))
    gphi = np.empty(n)
    step = np.empty(n)
    rhs = np.empty(n)
    dscale = np.empty(n)
    xtry = np.empty((M, d))

    for kk in range(B):
        x = X[kk]
        w = W[kk]
        dec = np.inf
        converged = False
        for _ in range(max_iter):
            _eval_constraints(x, abar, s, Q, b, Ksq, phi, g, nrm, QX, eps)
            val = 0.0
            for m in range(M):
                for i in range(d):
                    val -= w[m, i] * x[m, i]
            for p in range(P):
                val -= mu * np.log(-phi[p])
            for m in range(M):
                val -= mu * np.log(-g[m])

            # gradient and Hessian of the barrier objective
            for i in range(n):
                grad[i] = 0.0
                for j in range(n):
                    H[i, j] = 0.0
            for m in range(M):
                ig = 1.0 / (-g[m])
                base = m * d
                for i in range(d):
                    grad[base + i] = -w[m, i] + mu * 2.0 * x[m, i] * ig
            for p in range(P):
                ip = 1.0 / (-phi[p])
                ip2 = ip * ip
                for m in range(M):
                    base = m * d
                    sn = s[p, m] / nrm[m]
                    for i in range(d):
                        gphi[base + i] = abar[p, m, i] + sn * QX[m, i]
                for i in range(n):
                    grad[i] += mu * ip * gphi[i]
                    gi = mu * ip2 * gphi[i]
                    for j in range(i + 1):
                        H[i, j] += gi * gphi[j]
            for m in range(M):
                # curvature of the weighted norms and of the ball
                kap = 0.0
                for p in range(P):
                    kap += s[p, m] / (-phi[p])
                ig = 1.0 / (-g[m])
                ig2 = ig * ig
                inm = 1.0 / nrm[m]
                inm3 = inm * inm * inm
                base = m * d
                for i in range(d):
                    for j in range(i + 1):
                        hij = kap * (Q[m, i, j] * inm - QX[m, i] * QX[m, j] * inm3)
                        hij += 4.0 * x[m, i] * x[m, j] * ig2
                        if i == j:
                            hij += 2.0 * ig
                        H[base + i, base + j] += mu * hij
            for i in range(n):
                for j in range(i):
                    H[j, i] = H[i, j]

            # Jacobi scaling keeps the solve usable near the boundary
            for i in range(n):
                dj = H[i, i]
                dscale[i] = 1.0 / np.sqrt(dj if dj > 1e-30 else 1e-30)
            for i in range(n):
                for j in range(n):
                    Hw[i, j] = H[i, j] * dscale[i] * dscale[j]
                Hw[i, i] += 1e-14
                rhs[i] = -grad[i] * dscale[i]
            okchol = _cholesky_solve(Hw, rhs, n)
            if not okchol:
                # retry with stronger regularization
                for i in range(n):
                    for j in range(n):
                        Hw[i, j] = H[i, j] * dscale[i] * dscale[j]
                    Hw[i, i] += 1e-8
                    rhs[i] = -grad[i] * dscale[i]
                if not _cholesky_solve(Hw, rhs, n):
                    break
            dec = 0.0
            for i in range(n):
                step[i] = rhs[i] * dscale[i]
                dec += grad[i] * step[i]
            dec = abs(dec)
            if dec <= tol:
                converged = True
                break
            total += 1

            t = 1.0
            accepted = False
            for _ in range(40):
                for m in range(M):
                    base = m * d
                    for i in range(d):
                        xtry[m, i] = x[m, i] + t * step[base + i]
                cval = _barrier_val(xtry, w, abar, s, Q, b, Ksq, mu,
                                    phi, g, nrm, QX, eps)
                if cval <= val - 0.25 * t * dec:
                    for m in range(M):
                        for i in range(d):
                            x[m, i] = xtry[m, i]
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                break  # stalled; freeze this element
        done[kk] = converged
        dec_out[kk] = dec
    return done, dec_out, total
