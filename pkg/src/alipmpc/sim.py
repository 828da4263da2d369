"""Closed-loop hybrid simulation of the planar nonlinear pendulum plant.

Fixed-step RK4 integrates the nonlinear dynamics with the leg length driven
by the nominal orbit curve; at every step-period boundary the stance foot is
exchanged: the angular momentum transfers to the new contact point and the
CoM angle is relabelled about it.  Commanded torque comes from the MPC at a
fixed update period (zero-order hold) and may be scaled by perturbation
events.  Every integration sample is logged; runs are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .mpc import ControllerConfig, MpcController
from .model import (
    AlipParams,
    AlipState,
    PlanarVec,
    com_angle,
    com_velocity_from_state,
    impact_transfer,
    linearized_dynamics,
    nonlinear_dynamics,
)
from .trajectory import NominalOrbit, StairGeometry, bezier_derivative, bezier_eval, orbit_sample

__all__ = [
    "PerturbationEvent",
    "SimConfig",
    "SimRow",
    "SimLog",
    "rk4_step",
    "run_scenario",
    "metrics",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "t",
    "theta_c",
    "L",
    "theta_des",
    "L_des",
    "tau_commanded",
    "tau_applied",
    "r_c",
    "step_index",
    "impact",
    "perturb_active",
    "fell",
    "qp_status",
]


@dataclass(frozen=True)
class PerturbationEvent:
    """Scale the commanded torque by torque_scale during [t_start, t_start+duration)."""

    t_start: float
    duration: float
    torque_scale: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.torque_scale < 0:
            raise ValueError(f"torque_scale must be >= 0, got {self.torque_scale}")

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_start + self.duration


@dataclass
class SimConfig:
    """Run parameters.  dt_integration must divide both the controller update
    period and the step period; fall_threshold must clear the orbit's angle
    range.  initial_offset displaces the start state from the orbit to seed
    the transient (e.g. a handoff mismatch).  seed is reserved for future
    stochastic inputs and does not affect runs today."""

    dt_integration: float = 0.001
    T: float = 0.4
    num_steps: int = 5
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    perturbations: list = field(default_factory=list)
    fall_threshold: float = 0.5
    initial_offset: tuple = (0.0, 0.0)
    seed: int = 0


@dataclass(frozen=True)
class SimRow:
    t: float
    theta_c: float
    L: float
    theta_des: float
    L_des: float
    tau_commanded: float
    tau_applied: float
    r_c: float
    step_index: int
    impact: bool
    perturb_active: bool
    fell: bool
    qp_status: str


@dataclass
class SimLog:
    rows: list

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(
                    f"{r.t!r},{r.theta_c!r},{r.L!r},{r.theta_des!r},{r.L_des!r},"
                    f"{r.tau_commanded!r},{r.tau_applied!r},{r.r_c!r},"
                    f"{r.step_index},{int(r.impact)},{int(r.perturb_active)},"
                    f"{int(r.fell)},{r.qp_status}\n"
                )


def read_csv(path) -> SimLog:
    """Read a log written by SimLog.to_csv (exact column contract)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header.split(",") != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header {header!r}")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(CSV_COLUMNS):
                raise ValueError(f"{path}:{lineno}: expected "
                                 f"{len(CSV_COLUMNS)} fields, got {len(parts)}")
            rows.append(
                SimRow(
                    t=float(parts[0]),
                    theta_c=float(parts[1]),
                    L=float(parts[2]),
                    theta_des=float(parts[3]),
                    L_des=float(parts[4]),
                    tau_commanded=float(parts[5]),
                    tau_applied=float(parts[6]),
                    r_c=float(parts[7]),
                    step_index=int(parts[8]),
                    impact=bool(int(parts[9])),
                    perturb_active=bool(int(parts[10])),
                    fell=bool(int(parts[11])),
                    qp_status=parts[12],
                )
            )
    return SimLog(rows)


def write_metrics(summary: dict, path) -> None:
    """Key-value summary document; floats keep full precision."""
    with open(path, "w") as fh:
        for key, value in summary.items():
            if isinstance(value, bool):
                fh.write(f"{key} = {str(value).lower()}\n")
            elif isinstance(value, float):
                fh.write(f"{key} = {value!r}\n")
            else:
                fh.write(f"{key} = {value}\n")


def _ratio_is_integer(num: float, den: float) -> bool:
    ratio = num / den
    return abs(ratio - round(ratio)) <= 1e-12 * max(1.0, abs(ratio))


def rk4_step(
    s: AlipState,
    r_c_of_t,
    L_c: float,
    tau: float,
    t: float,
    dt: float,
    p: AlipParams,
    dynamics: str = "nonlinear",
) -> AlipState:
    """Classical RK4 step with the leg length sampled at the stage times and
    the torque held constant.  dynamics="linear" substitutes the small-angle
    model (used by convergence and energy checks)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")

    if dynamics == "nonlinear":
        def f(ti, th, L):
            d = nonlinear_dynamics(AlipState(th, L), r_c_of_t(ti), L_c, tau, p)
            return d.dtheta_c, d.dL
    elif dynamics == "linear":
        def f(ti, th, L):
            d = linearized_dynamics(AlipState(th, L), r_c_of_t(ti), tau, p)
            return d.dtheta_c, d.dL
    else:
        raise ValueError(f"unknown dynamics {dynamics!r}")

    th, L = s.theta_c, s.L
    try:
        k1t, k1L = f(t, th, L)
        k2t, k2L = f(t + 0.5 * dt, th + 0.5 * dt * k1t, L + 0.5 * dt * k1L)
        k3t, k3L = f(t + 0.5 * dt, th + 0.5 * dt * k2t, L + 0.5 * dt * k2L)
        k4t, k4L = f(t + dt, th + dt * k3t, L + dt * k3L)
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise NumericalError(f"non-finite intermediate at t={t}: {exc}") from exc
    th_next = th + (dt / 6.0) * (k1t + 2 * k2t + 2 * k3t + k4t)
    L_next = L + (dt / 6.0) * (k1L + 2 * k2L + 2 * k3L + k4L)
    if not (math.isfinite(th_next) and math.isfinite(L_next)):
        raise NumericalError(
            f"non-finite state after step at t={t}: theta={th_next}, L={L_next}"
        )
    return AlipState(th_next, L_next)


def _torque_scale(perturbations, t: float) -> float:
    scale = 1.0
    for ev in perturbations:
        if ev.active(t):
            scale *= ev.torque_scale
    return scale


def run_scenario(
    cfg: SimConfig, orbit: NominalOrbit, terrain: StairGeometry
) -> SimLog:
    """Walk cfg.num_steps steps of the terrain in closed loop and log each
    integration sample.  Terminates early with a fell row when the CoM angle
    leaves +-fall_threshold."""
    p = orbit.params
    T = orbit.T
    dt = cfg.dt_integration
    ctrl_cfg = cfg.controller

    if abs(cfg.T - T) > 1e-12:
        raise ValueError(f"config step period {cfg.T} does not match orbit {T}")
    if not _ratio_is_integer(T, dt):
        raise ValueError(f"dt_integration {dt} does not divide the step period {T}")
    if not _ratio_is_integer(ctrl_cfg.update_period, dt):
        raise ValueError(
            f"dt_integration {dt} does not divide the update period "
            f"{ctrl_cfg.update_period}"
        )
    lo, hi = orbit.theta_range()
    if cfg.fall_threshold <= max(abs(lo), abs(hi)):
        raise ValueError(
            f"fall threshold {cfg.fall_threshold} inside the orbit angle range"
        )

    samples_per_step = round(T / dt)
    ctrl_every = round(ctrl_cfg.update_period / dt)
    controller = MpcController(orbit, ctrl_cfg)
    if not ctrl_cfg.enabled:
        controller.last_status = "off"
    step_vec = terrain.step_vector

    ref0, _, _ = orbit_sample(orbit, 0.0)
    x = AlipState(
        ref0.theta_c + cfg.initial_offset[0], ref0.L + cfg.initial_offset[1]
    )

    rows: list = []
    tau_cmd = 0.0
    pending_impact = False

    def local_r(step_idx):
        t_start = step_idx * T
        def r_of(t_abs):
            local = min(max(t_abs - t_start, 0.0), T)
            return bezier_eval(orbit.r_c_curve, local)
        return r_of

    def log_row(t, state, step_idx, impact, fell, tau_c, tau_a, perturb):
        ref, r_ref, _ = orbit_sample(orbit, t)
        r_here = bezier_eval(orbit.r_c_curve, min(max(t - step_idx * T, 0.0), T))
        rows.append(
            SimRow(
                t=t,
                theta_c=state.theta_c,
                L=state.L,
                theta_des=ref.theta_c,
                L_des=ref.L,
                tau_commanded=tau_c,
                tau_applied=tau_a,
                r_c=r_here,
                step_index=step_idx,
                impact=impact,
                perturb_active=perturb,
                fell=fell,
                qp_status=controller.last_status,
            )
        )

    sample = 0  # global integration sample counter
    for step_idx in range(cfg.num_steps):
        r_of = local_r(step_idx)
        for i in range(samples_per_step):
            t = step_idx * T + i * dt
            if ctrl_cfg.enabled and sample % ctrl_every == 0:
                tau_cmd = controller.step(x, t)
            scale = _torque_scale(cfg.perturbations, t)
            tau_applied = scale * tau_cmd
            log_row(
                t, x, step_idx, pending_impact, False, tau_cmd, tau_applied,
                scale != 1.0,
            )
            pending_impact = False
            try:
                x = rk4_step(x, r_of, 0.0, tau_applied, t, dt, p)
            except NumericalError:
                # last finite state, flagged as a terminal fall
                log_row(t + dt, x, step_idx, False, True,
                        tau_cmd, tau_applied, scale != 1.0)
                return SimLog(rows)
            sample += 1
            if abs(x.theta_c) > cfg.fall_threshold:
                log_row(t + dt, x, step_idx, False, True, tau_cmd, tau_applied,
                        _torque_scale(cfg.perturbations, t + dt) != 1.0)
                return SimLog(rows)

        # foot exchange at t = (step_idx + 1) T
        t_impact = (step_idx + 1) * T
        scale = _torque_scale(cfg.perturbations, t_impact)
        r_T = bezier_eval(orbit.r_c_curve, T)
        dr_T = bezier_derivative(orbit.r_c_curve, T)
        v_minus = com_velocity_from_state(x, r_T, dr_T, p)
        L_plus = impact_transfer(x.L, v_minus, step_vec, p)
        pos_pre = PlanarVec(r_T * math.sin(x.theta_c), r_T * math.cos(x.theta_c))
        pos_post = PlanarVec(pos_pre.x - step_vec.x, pos_pre.z - step_vec.z)
        if pos_post.z <= 0:
            log_row(t_impact, x, step_idx + 1, True, True,
                    tau_cmd, scale * tau_cmd, scale != 1.0)
            return SimLog(rows)
        x = AlipState(com_angle(pos_post), L_plus)
        pending_impact = True
        if abs(x.theta_c) > cfg.fall_threshold:
            log_row(t_impact, x, step_idx + 1, True, True,
                    tau_cmd, scale * tau_cmd, scale != 1.0)
            return SimLog(rows)

    # final post-impact sample closes the log
    t_end = cfg.num_steps * T
    scale = _torque_scale(cfg.perturbations, t_end)
    log_row(t_end, x, cfg.num_steps, True, False, tau_cmd, scale * tau_cmd,
            scale != 1.0)
    return SimLog(rows)


def metrics(log: SimLog) -> dict:
    """Tracking and effort summary of a run.

    Per-step torque statistics group rows by k*T <= t < (k+1)*T; impact
    deviations are read off the impact-flagged (post-exchange) rows.
    """
    if not log.rows:
        raise ValueError("empty log")
    theta_err = log.column("theta_c") - log.column("theta_des")
    L_err = log.column("L") - log.column("L_des")
    tau = log.column("tau_applied")
    step_index = log.column("step_index").astype(int)
    impact_rows = [r for r in log.rows if r.impact]
    fell = bool(log.rows[-1].fell)

    out = {
        "steps_completed": len(impact_rows),
        "fell": fell,
        "rms_theta_error": float(np.sqrt(np.mean(theta_err**2))),
        "rms_L_error": float(np.sqrt(np.mean(L_err**2))),
        "peak_abs_tau": float(np.abs(tau).max()),
    }
    # the lone boundary row that closes a run belongs to the next step;
    # leave it out of the per-step means so each mean covers one interval
    last_row = log.rows[-1]
    for k in sorted(set(step_index.tolist())):
        mask = step_index == k
        if (
            not fell
            and k == last_row.step_index
            and last_row.impact
            and int(mask.sum()) == 1
        ):
            continue
        out[f"step_mean_abs_tau.{k}"] = float(np.abs(tau[mask]).mean())
    for n, r in enumerate(impact_rows, start=1):
        out[f"impact_dev_theta.{n}"] = float(r.theta_c - r.theta_des)
        out[f"impact_dev_L.{n}"] = float(r.L - r.L_des)
    return out
