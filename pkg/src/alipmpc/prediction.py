"""Horizon prediction for the discretized time-varying pendulum model.

Forward-Euler discretization of the small-angle model gives, per sample,

    x_{k+1} = A_k x_k + b_k u_k,
    A_k = [[1, dt/(m r_c^2)], [dt m g r_c, 1]],  b_k = [0, dt]^T,

with r_c read off the nominal orbit at the sample time.  The horizon maps
stack these into a cumulative transition S, an input-to-state map Gamma,
and per-sample intermediate maps used for stage costs.  When the horizon
crosses a step boundary, the nominal post-minus-pre impact jump enters as an
affine offset so the prediction stays linear in (x_k, u-sequence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AlipParams, AlipState, com_velocity_from_state, impact_transfer
from .trajectory import NominalOrbit, orbit_sample

__all__ = ["DiscreteStep", "HorizonPrediction", "discretize_at", "build_prediction",
           "rank_check"]

DEFAULT_HORIZON_CAP_STEPS = 5  # multiples of the step period (longest supported lookahead)


@dataclass(frozen=True)
class DiscreteStep:
    """One Euler step of the model: x_next = A x + b u."""

    A: np.ndarray
    b: np.ndarray
    dt: float


@dataclass(frozen=True)
class HorizonPrediction:
    """Affine map from (x_k, u_seq) to the states along a horizon.

    stage_S[j], stage_Gamma(j), offsets[j] give x_{k+j+1}; the full-horizon
    terminal map (S, Gamma, offsets[-1]) is the last stage.  Gamma blocks are
    stored zero-padded to width N.
    """

    S: np.ndarray              # (2, 2) cumulative transition
    Gamma: np.ndarray          # (2, N) input map to the terminal state
    stage_S: np.ndarray        # (N, 2, 2)
    stage_Gamma_padded: np.ndarray  # (N, 2, N); row j uses columns :j+1
    impact_offsets: np.ndarray  # (N, 2) accumulated affine resets
    N: int
    dt: float
    t0: float

    def stage_maps(self, j: int):
        """(S_j, Gamma_j) mapping (x_k, u_{k..k+j}) to x_{k+j+1}."""
        return self.stage_S[j], self.stage_Gamma_padded[j, :, : j + 1]


def discretize_at(orbit: NominalOrbit, t: float, dt: float, p: AlipParams) -> DiscreteStep:
    """Euler-step matrices with the pendulum length taken at orbit time t."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    _, r, _ = orbit_sample(orbit, t)
    A = np.array(
        [[1.0, dt / (p.m * r * r)], [dt * p.m * p.g * r, 1.0]]
    )
    b = np.array([0.0, dt])
    return DiscreteStep(A, b, dt)


def _nominal_impact_jump(orbit: NominalOrbit) -> np.ndarray:
    """Nominal post-impact state minus nominal pre-impact state.

    The pre-impact state is the curve endpoint; the post-impact state is the
    momentum transfer applied to it, relabelled to the new contact -- which
    by periodicity is the orbit start up to the stored residual.
    """
    p = orbit.params
    T = orbit.T
    from .trajectory import bezier_derivative, bezier_eval, nominal_L

    theta_T = bezier_eval(orbit.theta_curve, T)
    L_T = nominal_L(orbit, T)
    r_T = bezier_eval(orbit.r_c_curve, T)
    dr_T = bezier_derivative(orbit.r_c_curve, T)
    v = com_velocity_from_state(AlipState(theta_T, L_T), r_T, dr_T, p)
    L_plus = impact_transfer(L_T, v, orbit.step_vector, p)
    theta_plus = bezier_eval(orbit.theta_curve, 0.0) + orbit.residual[0]
    return np.array([theta_plus - theta_T, L_plus - L_T])


def _impacts_crossed(t_prev: float, t_next: float, T: float) -> int:
    # number of step-period multiples in (t_prev, t_next]
    tol = 1e-9 * T
    return int(math.floor(t_next / T + tol)) - int(math.floor(t_prev / T + tol))


def build_prediction(
    orbit: NominalOrbit,
    t0: float,
    N: int,
    dt: float,
    p: AlipParams,
    horizon_cap: float | None = None,
) -> HorizonPrediction:
    """Build the horizon maps for N samples of length dt starting at t0."""
    if N < 1:
        raise ValueError(f"horizon length must be >= 1, got {N}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    cap = DEFAULT_HORIZON_CAP_STEPS * orbit.T if horizon_cap is None else horizon_cap
    if N * dt > cap * (1.0 + 1e-9):
        raise ValueError(f"horizon N*dt = {N * dt:.4f}s exceeds the cap {cap:.4f}s")

    jump = _nominal_impact_jump(orbit)

    S = np.eye(2)
    Gamma = np.zeros((2, N))
    offset = np.zeros(2)
    stage_S = np.empty((N, 2, 2))
    stage_Gamma = np.zeros((N, 2, N))
    offsets = np.empty((N, 2))

    for j in range(N):
        t_j = t0 + j * dt
        step = discretize_at(orbit, t_j, dt, p)
        S = step.A @ S
        Gamma[:, : j] = step.A @ Gamma[:, : j]
        Gamma[:, j] = step.b
        offset = step.A @ offset
        crossings = _impacts_crossed(t_j, t_j + dt, orbit.T)
        if crossings:
            offset = offset + crossings * jump
        stage_S[j] = S
        stage_Gamma[j] = Gamma
        offsets[j] = offset

    return HorizonPrediction(
        S=S,
        Gamma=Gamma,
        stage_S=stage_S,
        stage_Gamma_padded=stage_Gamma,
        impact_offsets=offsets,
        N=N,
        dt=dt,
        t0=t0,
    )


def rank_check(pred: HorizonPrediction) -> bool:
    """True iff Gamma has full row rank, scaled against its Frobenius norm."""
    G = pred.Gamma
    det = float(np.linalg.det(G @ G.T))
    fro2 = float(np.sum(G * G))  # upper bound for the largest singular value squared
    return det > 1e-12 * fro2
