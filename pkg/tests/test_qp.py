import itertools

import numpy as np
import pytest

from alipmpc.qp import (
    STATUS_MAXITER,
    STATUS_OPTIMAL,
    STATUS_RELAXED,
    QpProblem,
    solve_qp,
)

RNG = np.random.default_rng(23)


def enumeration_oracle(prob):
    """Exhaustive active-set oracle: every {lower, free, upper} assignment.

    Solves the reduced stationarity system for each assignment with lstsq,
    verifies stationarity, bound and equality feasibility, and keeps the
    feasible minimum.  Independent of the production solver.
    """
    n = prob.n
    P, q, lb, ub = prob.P, prob.q, prob.lb, prob.ub
    m = 0 if prob.Aeq is None else prob.Aeq.shape[0]
    best_u, best_obj = None, np.inf
    for assignment in itertools.product((-1, 0, 1), repeat=n):
        a = np.array(assignment, dtype=int)
        u = np.where(a == -1, lb, np.where(a == 1, ub, 0.0))
        free = np.flatnonzero(a == 0)
        fixed = np.flatnonzero(a != 0)
        nf = free.size
        if nf + m > 0 and nf > 0:
            KKT = np.zeros((nf + m, nf + m))
            KKT[:nf, :nf] = P[np.ix_(free, free)]
            rhs = np.zeros(nf + m)
            rhs[:nf] = -q[free] - P[np.ix_(free, fixed)] @ u[fixed]
            if m:
                KKT[:nf, nf:] = prob.Aeq[:, free].T
                KKT[nf:, :nf] = prob.Aeq[:, free]
                rhs[nf:] = prob.beq - prob.Aeq[:, fixed] @ u[fixed]
            sol, *_ = np.linalg.lstsq(KKT, rhs, rcond=None)
            if np.abs(KKT @ sol - rhs).max() > 1e-8 * (1 + np.abs(rhs).max()):
                continue
            u[free] = sol[:nf]
        elif m:
            if np.abs(prob.Aeq @ u - prob.beq).max() > 1e-8:
                continue
        if np.any(u < lb - 1e-9) or np.any(u > ub + 1e-9):
            continue
        if m and np.abs(prob.Aeq @ u - prob.beq).max() > 1e-8:
            continue
        obj = 0.5 * u @ P @ u + q @ u
        if obj < best_obj:
            best_u, best_obj = u.copy(), obj
    return best_u, best_obj


def kkt_residual(prob, u):
    """Stationarity on free coords, complementarity on active bounds,
    equality residual -- the solver's optimality certificate."""
    grad = prob.P @ u + prob.q
    if prob.Aeq is not None:
        free = (u > prob.lb + 1e-9) & (u < prob.ub - 1e-9)
        idx = np.flatnonzero(free)
        A_f = prob.Aeq[:, idx] if idx.size else prob.Aeq
        g_f = grad[idx] if idx.size else grad
        nu, *_ = np.linalg.lstsq(A_f.T, -g_f, rcond=None)
        grad = grad + prob.Aeq.T @ nu
    res = 0.0
    for i in range(prob.n):
        if u[i] <= prob.lb[i] + 1e-9:
            res = max(res, max(0.0, -grad[i]))
        elif u[i] >= prob.ub[i] - 1e-9:
            res = max(res, max(0.0, grad[i]))
        else:
            res = max(res, abs(grad[i]))
    if prob.Aeq is not None:
        res = max(res, np.abs(prob.Aeq @ u - prob.beq).max())
    return res


def random_problem(n, with_equality=False, rng=RNG):
    M = rng.normal(size=(n, n))
    P = M.T @ M + 0.2 * np.eye(n)
    q = rng.normal(scale=3.0, size=n)
    lb = -0.1 - np.abs(rng.normal(size=n))
    ub = 0.1 + np.abs(rng.normal(size=n))
    Aeq = beq = None
    if with_equality:
        Aeq = rng.normal(size=(2, n))
        interior = lb + rng.uniform(0.15, 0.85, size=n) * (ub - lb)
        beq = Aeq @ interior
    return QpProblem(P, q, lb, ub, Aeq, beq)


def test_unconstrained_interior():
    prob = QpProblem(np.eye(3), np.zeros(3), -np.ones(3), np.ones(3))
    sol = solve_qp(prob)
    assert sol.status == STATUS_OPTIMAL
    assert np.allclose(sol.u_seq, 0.0, atol=1e-12)


def test_separable_clipping():
    n = 4
    q = np.zeros(n)
    q[0] = -10.0
    prob = QpProblem(np.eye(n), q, -np.ones(n), np.ones(n))
    sol = solve_qp(prob)
    expected = np.zeros(n)
    expected[0] = 1.0
    assert np.array_equal(sol.u_seq, expected)  # bound hit exactly
    assert sol.active_set[0] == 1


def test_matches_oracle_small_battery():
    checked_eq = 0
    for trial in range(120):
        n = int(RNG.integers(1, 7))
        with_eq = bool(RNG.random() < 0.5 and n >= 2)
        prob = random_problem(n, with_eq)
        sol = solve_qp(prob, max_iter=300)
        u_oracle, obj_oracle = enumeration_oracle(prob)
        assert u_oracle is not None, "oracle found no feasible assignment"
        assert sol.status == STATUS_OPTIMAL
        assert np.abs(sol.u_seq - u_oracle).max() <= 1e-6, (
            f"trial {trial}: solver {sol.u_seq} oracle {u_oracle}"
        )
        assert abs(sol.objective - obj_oracle) <= 1e-8 * (1 + abs(obj_oracle))
        checked_eq += with_eq
    assert checked_eq > 20


def test_kkt_residual_contract():
    for _ in range(60):
        n = int(RNG.integers(1, 9))
        with_eq = bool(RNG.random() < 0.4 and n >= 3)
        prob = random_problem(n, with_eq)
        sol = solve_qp(prob, max_iter=300)
        assert sol.status == STATUS_OPTIMAL
        assert kkt_residual(prob, sol.u_seq) <= 1e-8 * (1 + np.abs(prob.q).max())


def test_solution_respects_bounds_always():
    for _ in range(40):
        prob = random_problem(int(RNG.integers(2, 8)))
        sol = solve_qp(prob, max_iter=300)
        assert np.all(sol.u_seq >= prob.lb) and np.all(sol.u_seq <= prob.ub)


def test_equality_held_exactly():
    for _ in range(40):
        prob = random_problem(int(RNG.integers(3, 8)), with_equality=True)
        sol = solve_qp(prob, max_iter=300)
        assert sol.status == STATUS_OPTIMAL
        assert np.abs(prob.Aeq @ sol.u_seq - prob.beq).max() <= 1e-8 * (
            1 + np.abs(prob.beq).max()
        )


def test_infeasible_equality_relaxed():
    n = 4
    prob = random_problem(n)
    Aeq = np.vstack([np.ones(n), np.arange(1.0, n + 1.0)])
    beq = Aeq @ (prob.ub + 1.0)  # outside the box by construction
    prob = QpProblem(prob.P, prob.q, prob.lb, prob.ub, Aeq, beq, eq_penalty=1e6)
    sol = solve_qp(prob, max_iter=300)
    assert sol.status == STATUS_RELAXED
    assert np.all(sol.u_seq >= prob.lb) and np.all(sol.u_seq <= prob.ub)
    # the relaxed solve must agree with the oracle on the penalized box QP
    P_pen = prob.P + 2e6 * Aeq.T @ Aeq
    q_pen = prob.q - 2e6 * Aeq.T @ beq
    pen = QpProblem(P_pen, q_pen, prob.lb, prob.ub)
    u_oracle, _ = enumeration_oracle(pen)
    assert np.abs(sol.u_seq - u_oracle).max() <= 1e-6


def test_max_iterations_status():
    prob = random_problem(6)
    sol = solve_qp(prob, max_iter=1)
    if sol.status == STATUS_MAXITER:
        assert np.all(sol.u_seq >= prob.lb) and np.all(sol.u_seq <= prob.ub)
    else:
        assert sol.status == STATUS_OPTIMAL  # trivially easy instance


def test_warm_start_same_answer():
    prob = random_problem(5, with_equality=True)
    cold = solve_qp(prob, max_iter=300)
    warm = solve_qp(prob, max_iter=300, warm_start=cold.u_seq)
    assert np.abs(cold.u_seq - warm.u_seq).max() <= 1e-9


def test_problem_validation():
    with pytest.raises(ValueError):
        QpProblem(np.eye(2), np.zeros(3), -np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        QpProblem(np.array([[1.0, 5.0], [0.0, 1.0]]), np.zeros(2), -np.ones(2), np.ones(2))
    with pytest.raises(ValueError):
        QpProblem(np.eye(2), np.zeros(2), np.ones(2), -np.ones(2))
