"""Condensed tracking MPC over the ankle-torque sequence.

Builds the dense QP for a horizon of the discretized pendulum model: a
torque penalty plus state-deviation penalties that grow toward the end of
the step, heaviest at the foot-exchange samples.  The default horizon ends
at the next foot exchange; multi-step lookahead is a configuration.  Each
control cycle re-solves the QP and applies the first torque, warm-started
from the previous cycle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import AlipState
from .prediction import HorizonPrediction, _impacts_crossed, build_prediction
from .qp import STATUS_MAXITER, QpProblem, solve_qp
from .trajectory import NominalOrbit, orbit_sample

__all__ = [
    "WeightSchedule",
    "make_weight_schedule",
    "condense",
    "ControllerConfig",
    "MpcController",
    "mpc_step",
]

MODE_SOFT = "soft-tracking"
MODE_HARD = "hard-terminal"

RAMP_PERIOD = 0.01  # s of horizon time over which cfg.ramp applies once


@dataclass(frozen=True)
class WeightSchedule:
    """Per-sample cost weights along a horizon.

    H_weights penalize each torque sample; Q_weights hold (angle, momentum)
    deviation weights per predicted sample, non-decreasing along the horizon
    with the terminal sample heaviest.
    """

    H_weights: np.ndarray
    Q_weights: np.ndarray
    terminal_multiplier: float

    def __post_init__(self):
        H = np.asarray(self.H_weights, dtype=float)
        Q = np.asarray(self.Q_weights, dtype=float)
        object.__setattr__(self, "H_weights", H)
        object.__setattr__(self, "Q_weights", Q)
        if H.ndim != 1 or Q.shape != (H.size, 2):
            raise ValueError("weights must be shaped (N,) and (N, 2)")
        if np.any(H <= 0) or np.any(Q <= 0):
            raise ValueError("all weights must be strictly positive")
        if np.any(np.diff(Q, axis=0) < -1e-12):
            raise ValueError("Q_weights must be non-decreasing along the horizon")
        if self.terminal_multiplier < 1.0:
            raise ValueError("terminal_multiplier must be >= 1")
        if np.any(Q[-1] < Q.max(axis=0) - 1e-12):
            raise ValueError("terminal sample must carry the maximum Q weight")


def make_weight_schedule(
    N: int,
    impact_samples,
    h_weight: float = 1.0,
    q_theta: float = 1000.0,
    q_L: float = 1.0,
    ramp: float = 1.1,
    terminal_multiplier: float = 10.0,
) -> WeightSchedule:
    """Geometric ramp with a persistent boost at every foot-exchange sample.

    impact_samples flags, per predicted sample j = 1..N, whether it lands on
    a step boundary.  Boosting multiplicatively and keeping the boost for
    later samples preserves monotonicity on multi-step horizons.
    """
    if ramp < 1.0:
        raise ValueError("ramp must be >= 1 to keep weights non-decreasing")
    flags = np.asarray(impact_samples, dtype=bool)
    if flags.shape != (N,):
        raise ValueError("impact_samples must have one flag per sample")
    growth = ramp ** np.arange(1, N + 1)
    boost = terminal_multiplier ** np.cumsum(flags)
    scale = growth * boost
    if not flags[-1]:
        scale[-1] *= terminal_multiplier  # horizon ends mid-step: still heaviest
    Q = np.column_stack([q_theta * scale, q_L * scale])
    return WeightSchedule(np.full(N, float(h_weight)), Q, terminal_multiplier)


def condense(
    pred: HorizonPrediction,
    x_k: AlipState,
    orbit: NominalOrbit,
    t0: float,
    w: WeightSchedule,
    bounds,
    mode: str = MODE_SOFT,
) -> QpProblem:
    """Stack the horizon into a dense QP over the torque sequence.

    soft-tracking: stage deviation costs only.  hard-terminal: the same cost
    plus an equality pinning the terminal state to the reference.
    """
    N = pred.N
    if w.H_weights.size != N:
        raise ValueError(f"weights sized {w.H_weights.size} for a horizon of {N}")
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise ValueError(f"bounds must satisfy lower < upper, got {bounds}")

    x0 = np.array([x_k.theta_c, x_k.L])
    G = pred.stage_Gamma_padded.reshape(2 * N, N)
    x_free = (pred.stage_S @ x0 + pred.impact_offsets).reshape(2 * N)
    x_des = np.empty(2 * N)
    for j in range(1, N + 1):
        ref, _, _ = orbit_sample(orbit, t0 + j * pred.dt)
        x_des[2 * j - 2] = ref.theta_c
        x_des[2 * j - 1] = ref.L
    q_diag = w.Q_weights.reshape(2 * N)

    P = 2.0 * (np.diag(w.H_weights) + G.T @ (q_diag[:, None] * G))
    P = 0.5 * (P + P.T)
    q = 2.0 * (G.T @ (q_diag * (x_free - x_des)))

    Aeq = beq = None
    if mode == MODE_HARD:
        Aeq = pred.Gamma.copy()
        beq = x_des[-2:] - pred.S @ x0 - pred.impact_offsets[-1]
    elif mode != MODE_SOFT:
        raise ValueError(f"unknown mode {mode!r}")

    return QpProblem(
        P,
        q,
        np.full(N, lo),
        np.full(N, hi),
        Aeq,
        beq,
        eq_penalty=1e6 * float(w.Q_weights.max()),
    )


@dataclass
class ControllerConfig:
    """Receding-horizon controller knobs; defaults match the shipped gait.

    The prediction grid is finer than the 10 ms update period because the
    forward-Euler model's forced-response error grows with the sample time;
    at 10 ms and full torque it costs several milliradians per step, which
    is visible at the foot exchanges.
    """

    dt: float = 0.0025
    update_period: float = 0.01
    horizon_steps: int = 1
    mode: str = MODE_SOFT
    u_max: float = 23.0
    h_weight: float = 1.0
    q_theta: float = 1.0e5
    q_L: float = 100.0
    ramp: float = 1.1
    terminal_multiplier: float = 100.0
    max_iter: int = 400
    enabled: bool = True

    def __post_init__(self):
        if self.dt <= 0 or self.update_period <= 0:
            raise ValueError("dt and update_period must be positive")
        if self.horizon_steps < 1:
            raise ValueError("horizon_steps must be >= 1")
        if self.u_max <= 0:
            raise ValueError("u_max must be positive")
        if self.mode not in (MODE_SOFT, MODE_HARD):
            raise ValueError(f"unknown controller mode {self.mode!r}")


class MpcController:
    """Holds the warm start and solve diagnostics across control cycles.

    One instance drives one simulation; instances are independent.
    """

    def __init__(self, orbit: NominalOrbit, cfg: ControllerConfig | None = None):
        self.orbit = orbit
        self.cfg = cfg or ControllerConfig()
        self.diagnostics: list = []
        self._last_u: np.ndarray | None = None
        self._last_t: float | None = None
        self._last_tau: float = 0.0
        self.last_status: str = "none"

    def _horizon_length(self, t: float) -> int:
        T = self.orbit.T
        k = math.floor(t / T + 1e-9)
        end = (k + self.cfg.horizon_steps) * T
        return max(1, round((end - t) / self.cfg.dt))

    def _warm_start(self, t: float, N: int):
        if self._last_u is None:
            return None
        shift = max(0, round((t - self._last_t) / self.cfg.dt))
        tail = self._last_u[shift:]
        if tail.size >= N:
            return tail[:N]
        return np.concatenate([tail, np.zeros(N - tail.size)])

    def step(self, x: AlipState, t: float) -> float:
        """Solve the horizon QP at time t and return the torque to apply."""
        cfg = self.cfg
        if not cfg.enabled:
            self.last_status = "off"
            return 0.0
        N = self._horizon_length(t)
        cap = max(5.0, cfg.horizon_steps + 1) * self.orbit.T
        pred = build_prediction(
            self.orbit, t, N, cfg.dt, self.orbit.params, horizon_cap=cap
        )
        flags = [
            _impacts_crossed(t + j * cfg.dt, t + (j + 1) * cfg.dt, self.orbit.T) > 0
            for j in range(N)
        ]
        # cfg.ramp is the growth per RAMP_PERIOD of horizon time, so the
        # weight profile does not depend on the prediction sample rate
        ramp_per_sample = cfg.ramp ** (cfg.dt / RAMP_PERIOD)
        w = make_weight_schedule(
            N,
            flags,
            h_weight=cfg.h_weight,
            q_theta=cfg.q_theta,
            q_L=cfg.q_L,
            ramp=ramp_per_sample,
            terminal_multiplier=cfg.terminal_multiplier,
        )
        prob = condense(pred, x, self.orbit, t, w, (-cfg.u_max, cfg.u_max), cfg.mode)
        sol = solve_qp(prob, max_iter=cfg.max_iter, warm_start=self._warm_start(t, N))
        self.diagnostics.append((t, sol.status, sol.iterations, sol.objective))
        self.last_status = sol.status
        if sol.status == STATUS_MAXITER:
            warnings.warn(
                f"torque solve hit the iteration cap at t={t:.3f}s; "
                "re-applying the previous torque",
                RuntimeWarning,
                stacklevel=2,
            )
            return self._last_tau
        self._last_u = sol.u_seq
        self._last_t = t
        tau = float(min(max(sol.u_seq[0], -cfg.u_max), cfg.u_max))
        self._last_tau = tau
        return tau


def mpc_step(
    x_k: AlipState, t: float, orbit: NominalOrbit, cfg: ControllerConfig | None = None
) -> float:
    """One-shot torque solve (fresh controller, no warm start carried)."""
    return MpcController(orbit, cfg).step(x_k, t)
