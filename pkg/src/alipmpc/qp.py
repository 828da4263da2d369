"""Dense box-constrained quadratic programming with optional equality rows.

Solves  min 0.5 u^T P u + q^T u  s.t.  lb <= u <= ub  (and  Aeq u = beq)
for strictly convex P by a primal active-set iteration on the bounds.  The
equality-constrained subproblem on the free coordinates is reduced through a
null-space basis, so iterates stay on the equality manifold once a feasible
point is found.  If the equality rows cannot be met inside the box, they are
moved to a quadratic penalty and the box problem is re-solved; the returned
status records this.

Problem sizes here are small (at most a few hundred variables), so every
subproblem is solved densely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QpProblem",
    "QpSolution",
    "solve_qp",
    "STATUS_OPTIMAL",
    "STATUS_RELAXED",
    "STATUS_MAXITER",
]

STATUS_OPTIMAL = "optimal"
STATUS_RELAXED = "infeasible-equality-relaxed"
STATUS_MAXITER = "max-iterations"


@dataclass
class QpProblem:
    """Condensed QP data.  Aeq/beq are optional equality rows (at most a few).

    eq_penalty is the quadratic weight used if the equality has to be
    relaxed; condensing sets it from the tracking weights.
    """

    P: np.ndarray
    q: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    Aeq: np.ndarray | None = None
    beq: np.ndarray | None = None
    eq_penalty: float | None = None

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.q = np.asarray(self.q, dtype=float).ravel()
        n = self.q.size
        self.lb = np.asarray(self.lb, dtype=float).ravel()
        self.ub = np.asarray(self.ub, dtype=float).ravel()
        if self.P.shape != (n, n):
            raise ValueError(f"P must be {n}x{n}, got {self.P.shape}")
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError("bound vectors must match the decision dimension")
        if not np.allclose(self.P, self.P.T, atol=1e-10 * (1 + np.abs(self.P).max())):
            raise ValueError("P must be symmetric")
        if np.any(self.lb > self.ub):
            raise ValueError("lb must be <= ub componentwise")
        if self.Aeq is not None:
            self.Aeq = np.atleast_2d(np.asarray(self.Aeq, dtype=float))
            self.beq = np.asarray(self.beq, dtype=float).ravel()
            if self.Aeq.shape[1] != n or self.beq.shape != (self.Aeq.shape[0],):
                raise ValueError("equality rows have inconsistent shape")

    @property
    def n(self) -> int:
        return self.q.size


@dataclass
class QpSolution:
    u_seq: np.ndarray
    objective: float
    status: str
    active_set: np.ndarray  # int8 per coordinate: -1 lower, 0 free, +1 upper
    iterations: int = 0


def _objective(P, q, u) -> float:
    return float(0.5 * u @ P @ u + q @ u)


def _null_space(A: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the kernel of A (columns)."""
    if A.size == 0:
        return np.eye(A.shape[1])
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    tol = max(A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return vt[rank:].T


def _subproblem_target(P, q, u, free, Aeq):
    """Optimum of the equality-respecting subproblem with clamped coords fixed.

    Returns the target value of u[free]; the current u[free] is feasible for
    the subproblem by construction, so with equality rows the move happens
    inside the null space of the free columns.
    """
    idx = np.flatnonzero(free)
    if idx.size == 0:
        return np.empty(0)
    P_ff = P[np.ix_(idx, idx)]
    g = q[idx] + P[np.ix_(idx, np.flatnonzero(~free))] @ u[~free]
    if Aeq is None:
        return np.linalg.solve(P_ff, -g)
    Z = _null_space(Aeq[:, idx])
    if Z.shape[1] == 0:
        return u[idx].copy()
    rhs = -Z.T @ (P_ff @ u[idx] + g)
    w = np.linalg.solve(Z.T @ P_ff @ Z, rhs)
    return u[idx] + Z @ w


def _kkt_releases(P, q, u, state, Aeq, tol):
    """Clamped bounds whose multipliers are negative (blockwise release)."""
    grad = P @ u + q
    if Aeq is not None:
        free = state == 0
        idx = np.flatnonzero(free)
        if idx.size:
            nu, *_ = np.linalg.lstsq(Aeq[:, idx].T, -grad[idx], rcond=None)
        else:
            nu, *_ = np.linalg.lstsq(Aeq.T, -grad, rcond=None)
        grad = grad + Aeq.T @ nu
    clamped = np.flatnonzero(state != 0)
    lam = np.where(state[clamped] == -1, grad[clamped], -grad[clamped])
    return clamped[lam < -tol]


def _active_set_iterate(P, q, lb, ub, Aeq, u0, max_iter, tol_grad):
    """Primal active-set loop from a feasible start.  Returns (u, state, n_iter,
    converged)."""
    n = q.size
    u = np.clip(u0, lb, ub)
    # initial working set: bounds whose gradient already pins them there
    grad0 = P @ u + q
    state = np.zeros(n, dtype=np.int8)
    state[(u <= lb) & (grad0 > 0)] = -1
    state[(u >= ub) & (grad0 < 0)] = 1
    u[state == -1] = lb[state == -1]
    u[state == 1] = ub[state == 1]

    step_tol = 1e-13 * (1.0 + np.abs(u).max())
    for it in range(1, max_iter + 1):
        free = state == 0
        idx = np.flatnonzero(free)
        target = _subproblem_target(P, q, u, free, Aeq)
        d = target - u[idx] if idx.size else np.empty(0)

        if d.size == 0 or np.abs(d).max() <= step_tol:
            releases = _kkt_releases(P, q, u, state, Aeq, tol_grad)
            if releases.size == 0:
                return u, state, it, True
            state[releases] = 0
            continue

        # ratio test against the bounds of the moving free coordinates
        alpha = 1.0
        blocker = -1
        block_side = 0
        for k, i in enumerate(idx):
            if d[k] > step_tol:
                a = (ub[i] - u[i]) / d[k]
                side = 1
            elif d[k] < -step_tol:
                a = (lb[i] - u[i]) / d[k]
                side = -1
            else:
                continue
            if a < alpha:
                alpha, blocker, block_side = a, i, side
        u[idx] = u[idx] + max(alpha, 0.0) * d
        if blocker >= 0:
            state[blocker] = block_side
            u[blocker] = ub[blocker] if block_side == 1 else lb[blocker]
        else:
            u[idx] = target  # full step, land exactly on the subproblem optimum
    return u, state, max_iter, False


def _equality_feasible_start(Aeq, beq, lb, ub, u_guess, max_iter):
    """A point in the box on the equality manifold, or None if there is none.

    First minimizes the equality residual over the box (lightly regularized
    so the Hessian stays definite), then polishes onto the manifold with
    least-norm corrections in the coordinates that are still free.
    """
    scale = 1.0 + np.abs(beq).max() + np.abs(Aeq).max()
    feas_tol = 1e-10 * scale
    u = np.clip(u_guess, lb, ub)
    if np.abs(Aeq @ u - beq).max() <= feas_tol:
        return u

    delta = 1e-10 * max(1.0, float(np.sum(Aeq * Aeq)))
    P1 = 2.0 * (Aeq.T @ Aeq + delta * np.eye(len(u)))
    q1 = -2.0 * (Aeq.T @ beq + delta * u)
    u, _, _, _ = _active_set_iterate(P1, q1, lb, ub, None, u, max_iter, 1e-12 * scale)

    for _ in range(2 * len(u) + 4):
        r = beq - Aeq @ u
        if np.abs(r).max() <= feas_tol:
            return u
        free = (u > lb) & (u < ub)
        idx = np.flatnonzero(free)
        if idx.size == 0:
            return None
        step, *_ = np.linalg.lstsq(Aeq[:, idx], r, rcond=None)
        if np.abs(step).max() < 1e-15 * scale:
            return None
        alpha = 1.0
        blocker = -1
        side = 0
        for k, i in enumerate(idx):
            if step[k] > 0:
                a = (ub[i] - u[i]) / step[k]
                s = 1
            elif step[k] < 0:
                a = (lb[i] - u[i]) / step[k]
                s = -1
            else:
                continue
            if a < alpha:
                alpha, blocker, side = a, i, s
        u[idx] = u[idx] + alpha * step
        if blocker >= 0:
            u[blocker] = ub[blocker] if side == 1 else lb[blocker]
        elif np.abs(beq - Aeq @ u).max() > feas_tol:
            return None  # unconstrained least-norm step cannot reach the manifold
    return None


def solve_qp(prob: QpProblem, max_iter: int = 200, warm_start=None) -> QpSolution:
    """Global minimizer of the box(-and-equality) QP.

    Strict convexity makes the minimizer unique.  If the equality rows are
    unreachable inside the box the solve falls back to a quadratic penalty
    and reports status "infeasible-equality-relaxed"; hitting the iteration
    cap reports "max-iterations" with the best iterate (still inside the
    box).
    """
    n = prob.n
    u0 = np.zeros(n) if warm_start is None else np.asarray(warm_start, dtype=float)
    u0 = np.clip(u0, prob.lb, prob.ub)
    tol_grad = 1e-9 * (1.0 + np.abs(prob.q).max())

    status = STATUS_OPTIMAL
    P, q = prob.P, prob.q
    Aeq, beq = prob.Aeq, prob.beq

    if Aeq is not None:
        start = _equality_feasible_start(Aeq, beq, prob.lb, prob.ub, u0, max_iter)
        if start is None:
            rho = prob.eq_penalty
            if rho is None:
                rho = 1e6 * float(np.abs(np.diag(P)).max())
            P = P + 2.0 * rho * (Aeq.T @ Aeq)
            q = q - 2.0 * rho * (Aeq.T @ beq)
            Aeq, beq = None, None
            status = STATUS_RELAXED
        else:
            u0 = start

    u, state, iters, converged = _active_set_iterate(
        P, q, prob.lb, prob.ub, Aeq, u0, max_iter, tol_grad
    )
    if not converged:
        status = STATUS_MAXITER
    return QpSolution(
        u_seq=u,
        objective=_objective(prob.P, prob.q, u),
        status=status,
        active_set=state,
        iterations=iters,
    )
