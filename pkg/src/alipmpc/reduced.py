"""Constrained rigid-body dynamics reduction by block elimination.

Assembles the equations of motion with contact and spring-feedback
constraints into one saddle-point system, partitions the unknowns into
controlled accelerations versus everything else (uncontrolled accelerations
and constraint forces), eliminates the latter with a Schur complement, and
solves for the torque that imposes a prescribed second-order output law.

The module is model-free: all matrices are caller-supplied; nothing here
knows about a particular robot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ControlError, ReductionError

__all__ = ["ConstrainedSystem", "ReducedSystem", "assemble", "schur_reduce",
           "output_torque_solve"]

COND_LIMIT = 1e12


@dataclass
class ConstrainedSystem:
    """Dynamics  D qdd + drift = J_contact^T F + J_spring^T F_s + B u
    with a no-slip contact constraint and a spring-feedback constraint
    J_spring qdd + jdot_qdot_spring = spring_rhs.

    jdot_qdot stacks the contact rows then the spring rows.
    """

    inertia: np.ndarray          # (n, n) symmetric positive definite
    drift: np.ndarray            # (n,) Coriolis + gravity minus isolated inputs
    contact_jacobian: np.ndarray  # (c1, n)
    spring_jacobian: np.ndarray   # (c2, n)
    jdot_qdot: np.ndarray        # (c1 + c2,)
    spring_rhs: np.ndarray       # (c2,) feedback right-hand side
    input_map: np.ndarray        # (n, m)

    def __post_init__(self):
        D = np.asarray(self.inertia, dtype=float)
        n = D.shape[0]
        self.inertia = D
        self.drift = np.asarray(self.drift, dtype=float).ravel()
        self.contact_jacobian = np.atleast_2d(np.asarray(self.contact_jacobian, float))
        self.spring_jacobian = np.atleast_2d(np.asarray(self.spring_jacobian, float))
        if self.spring_jacobian.size == 0:
            self.spring_jacobian = self.spring_jacobian.reshape(0, n)
        if self.contact_jacobian.size == 0:
            self.contact_jacobian = self.contact_jacobian.reshape(0, n)
        self.jdot_qdot = np.asarray(self.jdot_qdot, dtype=float).ravel()
        self.spring_rhs = np.asarray(self.spring_rhs, dtype=float).ravel()
        self.input_map = np.atleast_2d(np.asarray(self.input_map, dtype=float))

        c1, c2 = self.contact_jacobian.shape[0], self.spring_jacobian.shape[0]
        if D.shape != (n, n) or self.drift.shape != (n,):
            raise ReductionError("inertia/drift dimensions inconsistent")
        if self.contact_jacobian.shape[1] != n or self.spring_jacobian.shape[1] != n:
            raise ReductionError("constraint Jacobians must have n columns")
        if self.jdot_qdot.shape != (c1 + c2,) or self.spring_rhs.shape != (c2,):
            raise ReductionError("constraint right-hand sides inconsistent")
        if self.input_map.shape[0] != n:
            raise ReductionError("input map must have n rows")
        if not np.allclose(D, D.T, atol=1e-9 * (1 + np.abs(D).max())):
            raise ReductionError("inertia matrix must be symmetric")
        if np.linalg.eigvalsh(D).min() <= 0:
            raise ReductionError("inertia matrix must be positive definite")
        for name, J in (("contact", self.contact_jacobian),
                        ("spring", self.spring_jacobian)):
            if J.shape[0]:
                s = np.linalg.svd(J, compute_uv=False)
                if s.min() <= 1e-10 * max(1.0, s.max()):
                    raise ReductionError(f"{name} Jacobian is not full row rank")

    @property
    def n_coords(self) -> int:
        return self.inertia.shape[0]


@dataclass(frozen=True)
class ReducedSystem:
    """Controlled-coordinate dynamics  D_bar qdd_c + H_bar = B_bar u."""

    D_bar: np.ndarray
    H_bar: np.ndarray
    B_bar: np.ndarray


def assemble(sys: ConstrainedSystem):
    """Saddle-point form (Dtilde, Htilde, Btilde) over [qdd, F_contact, F_spring].

    Row blocks: dynamics, no-slip contact, spring feedback; the spring
    feedback target is folded into Htilde with its sign flipped so every
    block reads  Dtilde f + Htilde = Btilde u.
    """
    n = sys.n_coords
    J_st, J_s = sys.contact_jacobian, sys.spring_jacobian
    c1, c2 = J_st.shape[0], J_s.shape[0]
    m = sys.input_map.shape[1]

    Dtilde = np.zeros((n + c1 + c2, n + c1 + c2))
    Dtilde[:n, :n] = sys.inertia
    Dtilde[:n, n:n + c1] = -J_st.T
    Dtilde[:n, n + c1:] = -J_s.T
    Dtilde[n:n + c1, :n] = J_st
    Dtilde[n + c1:, :n] = J_s

    Htilde = np.concatenate([
        sys.drift,
        sys.jdot_qdot[:c1],
        sys.jdot_qdot[c1:] - sys.spring_rhs,
    ])

    Btilde = np.zeros((n + c1 + c2, m))
    Btilde[:n, :] = sys.input_map
    return Dtilde, Htilde, Btilde


def schur_reduce(Dtilde, Htilde, Btilde, n_c: int) -> ReducedSystem:
    """Eliminate everything past the first n_c unknowns by block elimination.

    D_bar = D11 - D12 D22^{-1} D21 and likewise for H_bar, B_bar; the
    reduced solution equals the leading block of the full solve for any u.
    """
    Dtilde = np.asarray(Dtilde, dtype=float)
    Htilde = np.asarray(Htilde, dtype=float).ravel()
    Btilde = np.atleast_2d(np.asarray(Btilde, dtype=float))
    total = Dtilde.shape[0]
    if not 0 < n_c < total:
        raise ReductionError(f"controlled count {n_c} outside (0, {total})")

    D11 = Dtilde[:n_c, :n_c]
    D12 = Dtilde[:n_c, n_c:]
    D21 = Dtilde[n_c:, :n_c]
    D22 = Dtilde[n_c:, n_c:]
    cond = np.linalg.cond(D22)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ReductionError(
            f"eliminated block is ill-conditioned (cond ~ {cond:.2e})"
        )
    W = np.linalg.solve(D22, np.column_stack([D21, Htilde[n_c:], Btilde[n_c:]]))
    n2 = D21.shape[1]
    D_bar = D11 - D12 @ W[:, :n2]
    H_bar = Htilde[:n_c] - D12 @ W[:, n2]
    B_bar = Btilde[:n_c] - D12 @ W[:, n2 + 1:]
    return ReducedSystem(D_bar, H_bar, B_bar)


def output_torque_solve(
    reduced: ReducedSystem,
    J_y: np.ndarray,
    Jdot_y_qdot: np.ndarray,
    y: np.ndarray,
    ydot: np.ndarray,
    hd_ddot: np.ndarray,
    K_P: np.ndarray,
    K_D: np.ndarray,
) -> np.ndarray:
    """Torque achieving  ydd = hd_ddot - K_D ydot - K_P y  on the reduced
    dynamics, where ydd = J_y qdd_c + Jdot_y_qdot.

    Requires a square, full-rank decoupling matrix J_y D_bar^{-1} B_bar.
    """
    J_y = np.atleast_2d(np.asarray(J_y, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    ydot = np.asarray(ydot, dtype=float).ravel()
    hd_ddot = np.asarray(hd_ddot, dtype=float).ravel()
    K_P = np.atleast_2d(np.asarray(K_P, dtype=float))
    K_D = np.atleast_2d(np.asarray(K_D, dtype=float))

    n_y, m = J_y.shape[0], reduced.B_bar.shape[1]
    if n_y != m:
        raise ControlError(f"decoupling matrix is {n_y}x{m}, must be square")

    Dinv_B = np.linalg.solve(reduced.D_bar, reduced.B_bar)
    Dinv_H = np.linalg.solve(reduced.D_bar, reduced.H_bar)
    decoupling = J_y @ Dinv_B
    cond = np.linalg.cond(decoupling)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ControlError(f"decoupling matrix is rank deficient (cond ~ {cond:.2e})")

    ydd_cmd = hd_ddot - K_D @ ydot - K_P @ y
    rhs = ydd_cmd - np.asarray(Jdot_y_qdot, dtype=float).ravel() + J_y @ Dinv_H
    return np.linalg.solve(decoupling, rhs)
