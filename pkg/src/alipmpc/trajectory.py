"""Bezier curve primitives and periodic stair-climbing reference orbits.

A nominal orbit stores two quartic Bezier curves over one step period: the
pendulum length r_c(t) and the desired CoM angle.  The desired angular
momentum is derived from them (L = m r_c^2 dtheta), so the reference is
consistent with the first row of the pendulum model by construction.

Synthesis closes the step geometrically (the CoM advances exactly one
tread) and dynamically (the momentum carried through the foot exchange
matches the next step) with damped Newton iterations, in two stages.  The
first shoots the zero-torque small-angle flow over a seed length profile to
find the flow-preferred angle shape; the second makes the stored curves
themselves near-torque-free by deriving the length from the consistency
equation of the zero-torque flow, so tracking the reference costs almost no
ankle torque.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CurveFitError, CurveRangeError, OrbitSynthesisError
from .model import (
    AlipParams,
    AlipState,
    PlanarVec,
    com_angle,
    com_velocity_from_state,
    impact_transfer,
)

__all__ = [
    "BezierCurve",
    "StairGeometry",
    "NominalOrbit",
    "bezier_eval",
    "bezier_derivative",
    "bezier_fit",
    "nominal_L",
    "orbit_sample",
    "synthesize_orbit",
    "save_orbit",
    "load_orbit",
]

ORDER = 4  # quartic curves throughout
THETA_LIMIT = 0.3  # rad, small-angle validity margin for any orbit


@dataclass(frozen=True)
class BezierCurve:
    """Quartic Bezier curve: 5 control points over [0, duration]."""

    control_points: tuple
    duration: float

    def __post_init__(self):
        pts = tuple(float(v) for v in self.control_points)
        object.__setattr__(self, "control_points", pts)
        if len(pts) != ORDER + 1:
            raise CurveFitError(f"need {ORDER + 1} control points, got {len(pts)}")
        if not self.duration > 0:
            raise CurveRangeError(f"duration must be positive, got {self.duration}")

    def __call__(self, t: float) -> float:
        return bezier_eval(self, t)


def _check_range(c: BezierCurve, t: float) -> float:
    if not (0.0 <= t <= c.duration):
        raise CurveRangeError(f"t={t} outside [0, {c.duration}]")
    return t / c.duration


def bezier_eval(c: BezierCurve, t: float) -> float:
    """Bernstein-form evaluation at time t in [0, duration]."""
    s = _check_range(c, t)
    u = 1.0 - s
    p = c.control_points
    # binomial weights 1 4 6 4 1
    return (
        p[0] * u**4
        + 4.0 * p[1] * s * u**3
        + 6.0 * p[2] * s**2 * u**2
        + 4.0 * p[3] * s**3 * u
        + p[4] * s**4
    )


def bezier_derivative(c: BezierCurve, t: float) -> float:
    """Exact hodograph derivative at time t."""
    s = _check_range(c, t)
    u = 1.0 - s
    p = c.control_points
    d0, d1, d2, d3 = (p[1] - p[0], p[2] - p[1], p[3] - p[2], p[4] - p[3])
    return (4.0 / c.duration) * (
        d0 * u**3 + 3.0 * d1 * s * u**2 + 3.0 * d2 * s**2 * u + d3 * s**3
    )


def _bernstein_matrix(ts: np.ndarray, duration: float) -> np.ndarray:
    s = np.asarray(ts, dtype=float) / duration
    u = 1.0 - s
    return np.column_stack(
        [u**4, 4 * s * u**3, 6 * s**2 * u**2, 4 * s**3 * u, s**4]
    )


def bezier_fit(samples, duration: float):
    """Least-squares quartic fit to (t, value) samples.

    Returns (curve, residual) where residual is the l2 norm of the misfit.
    Requires at least 5 samples with distinct t in [0, duration].
    """
    ts = np.array([t for t, _ in samples], dtype=float)
    ys = np.array([y for _, y in samples], dtype=float)
    if ts.size < ORDER + 1 or np.unique(ts).size < ORDER + 1:
        raise CurveFitError(f"need >= {ORDER + 1} distinct sample times, got {ts.size}")
    if ts.min() < 0 or ts.max() > duration:
        raise CurveRangeError("sample times outside [0, duration]")
    B = _bernstein_matrix(ts, duration)
    coeffs, _, rank, _ = np.linalg.lstsq(B, ys, rcond=None)
    if rank < ORDER + 1:
        raise CurveFitError("sample times do not determine a quartic (rank deficient)")
    residual = float(np.linalg.norm(B @ coeffs - ys))
    return BezierCurve(tuple(coeffs), duration), residual


def _derivative_matrix(ts: np.ndarray, duration: float) -> np.ndarray:
    # d/dt of the Bernstein basis functions, as a matrix on the control points
    s = np.asarray(ts, dtype=float) / duration
    u = 1.0 - s
    hodo = np.column_stack([u**3, 3 * s * u**2, 3 * s**2 * u, s**3]) * (4.0 / duration)
    diff = np.zeros((4, 5))
    for i in range(4):
        diff[i, i] = -1.0
        diff[i, i + 1] = 1.0
    return hodo @ diff


def _fit_through_endpoints(ts, ys, dys, duration, y0, yT):
    """Quartic fit with pinned end control points, matching values and slopes.

    Weighting the slope rows by the duration keeps the derived momentum
    reference (proportional to the slope) as faithful as the angle itself.
    """
    B = _bernstein_matrix(ts, duration)
    Bd = _derivative_matrix(ts, duration) * duration
    A = np.vstack([B, Bd])
    target = np.concatenate([ys, np.asarray(dys) * duration])
    fixed = A[:, 0] * y0 + A[:, 4] * yT
    inner, _, _, _ = np.linalg.lstsq(A[:, 1:4], target - fixed, rcond=None)
    return BezierCurve((y0, inner[0], inner[1], inner[2], yT), duration)


@dataclass(frozen=True)
class StairGeometry:
    """Per-step displacement of the scene: tread depth, riser height, count."""

    run: float
    rise: float
    num_steps: int = 1

    def __post_init__(self):
        if not self.run >= 0:
            raise OrbitSynthesisError(f"run must be non-negative, got {self.run}")
        if not math.isfinite(self.rise):
            raise OrbitSynthesisError(f"rise must be finite, got {self.rise}")
        if self.num_steps < 1:
            raise OrbitSynthesisError(f"num_steps must be >= 1, got {self.num_steps}")

    @property
    def step_vector(self) -> PlanarVec:
        return PlanarVec(self.run, self.rise)


def _wrap_time(t: float, T: float) -> float:
    # frac-based wrap: bitwise stable under t -> k*T scalings of the same
    # phase.  Times within 1e-9 periods of a boundary snap to the boundary
    # (post-impact), so accumulated float error in t0 + j*dt cannot make a
    # sample straddle the wrong side of a foot exchange.
    q = t / T
    frac = q - math.floor(q)
    if frac >= 1.0 - 1e-9 or frac <= 1e-9:
        return 0.0
    return T * frac


@dataclass(frozen=True)
class NominalOrbit:
    """Periodic reference for one step: length and angle curves plus metadata.

    residual holds the periodicity defect (rad, kg*m^2/s) left by synthesis;
    construction rejects orbits whose defect exceeds residual_tolerance.
    """

    r_c_curve: BezierCurve
    theta_curve: BezierCurve
    T: float
    step_vector: PlanarVec
    params: AlipParams
    residual: tuple = (0.0, 0.0)
    residual_tolerance: float = 1e-3

    def __post_init__(self):
        if not self.T > 0:
            raise OrbitSynthesisError(f"step period must be positive, got {self.T}")
        if self.r_c_curve.duration != self.T or self.theta_curve.duration != self.T:
            raise OrbitSynthesisError("curve durations must equal the step period")
        grid = np.linspace(0.0, self.T, 201)
        r_vals = [bezier_eval(self.r_c_curve, t) for t in grid]
        if min(r_vals) <= 0:
            raise OrbitSynthesisError("pendulum length curve is not strictly positive")
        th_vals = [bezier_eval(self.theta_curve, t) for t in grid]
        if max(abs(v) for v in th_vals) > THETA_LIMIT:
            raise OrbitSynthesisError(
                f"angle range {min(th_vals):.4f}..{max(th_vals):.4f} rad exceeds "
                f"the +-{THETA_LIMIT} rad small-angle margin"
            )
        if (
            abs(self.residual[0]) > self.residual_tolerance
            or abs(self.residual[1]) > self.residual_tolerance
        ):
            raise OrbitSynthesisError(
                f"periodicity residual {self.residual} exceeds tolerance "
                f"{self.residual_tolerance}"
            )

    def theta_range(self):
        grid = np.linspace(0.0, self.T, 201)
        vals = [bezier_eval(self.theta_curve, t) for t in grid]
        return min(vals), max(vals)


def nominal_L(orbit: NominalOrbit, t: float) -> float:
    """Desired angular momentum: m r_c(t)^2 dtheta_des(t)."""
    if not (0.0 <= t <= orbit.T):
        raise CurveRangeError(f"t={t} outside [0, {orbit.T}]")
    r = bezier_eval(orbit.r_c_curve, t)
    dtheta = bezier_derivative(orbit.theta_curve, t)
    return orbit.params.m * r * r * dtheta


def orbit_sample(orbit: NominalOrbit, t: float):
    """Reference at time t (wrapped mod T): (AlipState, r_c, dr_c).

    The sample at an exact multiple of T is the post-impact start of the
    curve; the pre-impact endpoint is the limit from below.
    """
    if t < 0:
        raise CurveRangeError(f"t must be non-negative, got {t}")
    tau = _wrap_time(t, orbit.T)
    state = AlipState(bezier_eval(orbit.theta_curve, tau), nominal_L(orbit, tau))
    r = bezier_eval(orbit.r_c_curve, tau)
    dr = bezier_derivative(orbit.r_c_curve, tau)
    return state, r, dr


def _bezier_accel(c: BezierCurve, t: float) -> float:
    """Second derivative of a quartic curve (hodograph applied twice)."""
    s = _check_range(c, t)
    p = c.control_points
    e0 = p[2] - 2.0 * p[1] + p[0]
    e1 = p[3] - 2.0 * p[2] + p[1]
    e2 = p[4] - 2.0 * p[3] + p[2]
    u = 1.0 - s
    return (12.0 / (c.duration * c.duration)) * (e0 * u * u + 2.0 * e1 * s * u + e2 * s * s)


def _boundary_lengths(theta0, thetaT, run, rise):
    """Solve r_T sin(thetaT) - r_0 sin(theta0) = run (and the cos/z analogue)."""
    det = math.sin(thetaT - theta0)
    if abs(det) < 1e-10:
        raise OrbitSynthesisError(
            f"boundary angles {theta0:.4f}, {thetaT:.4f} leave the step "
            "displacement unreachable (parallel leg directions)"
        )
    # [[-sin(theta0), sin(thetaT)], [-cos(theta0), cos(thetaT)]] [r0, rT] = [run, rise]
    r0 = (run * math.cos(thetaT) - rise * math.sin(thetaT)) / det
    rT = (run * math.cos(theta0) - rise * math.sin(theta0)) / det
    return r0, rT


_FLOW_STEPS = 400

# admissible boundary leg lengths relative to the apex; outside this band the
# stair displacement is only reachable with a physically implausible leg
_LEG_RATIO_MIN = 0.5
_LEG_RATIO_MAX = 1.25


def _check_leg_lengths(r0: float, rT: float, r_apex: float) -> None:
    lo, hi = _LEG_RATIO_MIN * r_apex, _LEG_RATIO_MAX * r_apex
    if not (lo <= r0 <= hi and lo <= rT <= hi):
        raise OrbitSynthesisError(
            f"implied boundary leg lengths r0={r0:.3f}, rT={rT:.3f} m fall outside "
            f"[{lo:.3f}, {hi:.3f}] m ({_LEG_RATIO_MIN}..{_LEG_RATIO_MAX} x apex); "
            "geometry infeasible for this apex length"
        )


def _one_hump_length_curve(r0: float, rT: float, r_apex: float, T: float) -> BezierCurve:
    # seed length profile through r0, r_apex (midstance), rT
    pm = (16.0 * r_apex - 3.0 * (r0 + rT)) / 10.0
    return BezierCurve((r0, 0.5 * (r0 + pm), pm, 0.5 * (rT + pm), rT), T)


def _shoot_linear_flow(theta0, L0, r_curve, p: AlipParams):
    """Zero-torque small-angle flow over one period for a given length curve.

    Returns uniformly spaced (ts, thetas, dthetas); RK4 with the curve
    evaluated at the stage times.
    """
    T = r_curve.duration
    h = T / _FLOW_STEPS
    ts = np.empty(_FLOW_STEPS + 1)
    thetas = np.empty(_FLOW_STEPS + 1)
    dthetas = np.empty(_FLOW_STEPS + 1)

    def f(t, th, L):
        r = bezier_eval(r_curve, min(t, T))
        return L / (p.m * r * r), p.m * p.g * r * th

    th, L = theta0, L0
    ts[0], thetas[0] = 0.0, th
    dthetas[0] = f(0.0, th, L)[0]
    for i in range(_FLOW_STEPS):
        t = i * h
        k1t, k1L = f(t, th, L)
        k2t, k2L = f(t + 0.5 * h, th + 0.5 * h * k1t, L + 0.5 * h * k1L)
        k3t, k3L = f(t + 0.5 * h, th + 0.5 * h * k2t, L + 0.5 * h * k2L)
        k4t, k4L = f(t + h, th + h * k3t, L + h * k3L)
        th += (h / 6.0) * (k1t + 2 * k2t + 2 * k3t + k4t)
        L += (h / 6.0) * (k1L + 2 * k2L + 2 * k3L + k4L)
        ts[i + 1] = (i + 1) * h
        thetas[i + 1] = th
        dthetas[i + 1] = f(ts[i + 1], th, L)[0]
    return ts, thetas, dthetas


def _integrate_length_ode(theta_curve: BezierCurve, r0: float, p: AlipParams):
    """Leg length that makes the quartic angle curve a zero-torque solution.

    With L = m r^2 dtheta and dL = m g r theta (small-angle flow, no
    torque), the length must satisfy  dr = (g theta - r ddtheta) / (2 dtheta).
    Returns uniformly spaced (ts, rs, drs); RK4 on that scalar equation.
    Requires the angle curve to be strictly monotone.
    """
    T = theta_curve.duration
    h = T / _FLOW_STEPS

    def slope(t, r):
        tc = min(t, T)
        dth = bezier_derivative(theta_curve, tc)
        if abs(dth) < 1e-4:
            raise OrbitSynthesisError(
                "angle curve is not strictly monotone; length equation is singular"
            )
        return (p.g * bezier_eval(theta_curve, tc) - r * _bezier_accel(theta_curve, tc)) / (
            2.0 * dth
        )

    ts = np.empty(_FLOW_STEPS + 1)
    rs = np.empty(_FLOW_STEPS + 1)
    drs = np.empty(_FLOW_STEPS + 1)
    r = r0
    ts[0], rs[0], drs[0] = 0.0, r, slope(0.0, r)
    for i in range(_FLOW_STEPS):
        t = i * h
        k1 = slope(t, r)
        k2 = slope(t + 0.5 * h, r + 0.5 * h * k1)
        k3 = slope(t + 0.5 * h, r + 0.5 * h * k2)
        k4 = slope(t + h, r + h * k3)
        r += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not (0.05 < r < 10.0):
            raise OrbitSynthesisError(f"length equation left the sane range at r={r:.3f}")
        ts[i + 1] = (i + 1) * h
        rs[i + 1] = r
        drs[i + 1] = slope(ts[i + 1], r)
    return ts, rs, drs


def _closure_defects(r_curve, theta_curve, geom, p):
    """Geometry and momentum-transfer defects of a candidate orbit."""
    T = theta_curve.duration
    theta0 = theta_curve.control_points[0]
    thetaT = theta_curve.control_points[-1]
    r0 = r_curve.control_points[0]
    rT = r_curve.control_points[-1]

    f_x = rT * math.sin(thetaT) - r0 * math.sin(theta0) - geom.run
    f_z = rT * math.cos(thetaT) - r0 * math.cos(theta0) - geom.rise

    L_end = p.m * rT * rT * bezier_derivative(theta_curve, T)
    v_end = com_velocity_from_state(
        AlipState(thetaT, L_end), rT, bezier_derivative(r_curve, T), p
    )
    L_plus = impact_transfer(L_end, v_end, geom.step_vector, p)
    L_start = p.m * r0 * r0 * bezier_derivative(theta_curve, 0.0)
    f_L = L_plus - L_start
    return f_x, f_z, f_L


def _newton(residual_of, z0, scales, max_iter, context):
    """Damped Newton with forward-difference Jacobian on a square system."""
    z = np.asarray(z0, dtype=float)
    F, payload = residual_of(z)
    norm = float(np.max(np.abs(F / scales)))
    n = z.size
    for _ in range(max_iter):
        if norm <= 1.0:
            return z, F, payload
        J = np.empty((n, n))
        for j in range(n):
            h = 1e-7 * max(1.0, abs(z[j]))
            zj = z.copy()
            zj[j] += h
            try:
                Fj, _ = residual_of(zj)
            except OrbitSynthesisError:
                zj[j] = z[j] - h
                Fj, _ = residual_of(zj)
                h = -h
            J[:, j] = (Fj - F) / h
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise OrbitSynthesisError(f"singular closure Jacobian ({context})") from exc
        alpha = 1.0
        for _ in range(30):
            z_new = z + alpha * step
            try:
                F_new, payload_new = residual_of(z_new)
            except OrbitSynthesisError:
                alpha *= 0.5
                continue
            norm_new = float(np.max(np.abs(F_new / scales)))
            if norm_new < norm:
                z, F, payload, norm = z_new, F_new, payload_new, norm_new
                break
            alpha *= 0.5
        else:
            raise OrbitSynthesisError(
                f"closure iteration stalled at residual {F} ({context})"
            )
    if norm > 1.0:
        raise OrbitSynthesisError(
            f"no periodic orbit after {max_iter} iterations; residual {F} ({context})"
        )
    return z, F, payload


# residual scales: metres, metres, kg*m^2/s, radians (plus metres for the
# midstance pin in the second stage)
_SCALE_FLOW = np.array([1e-9, 1e-9, 1e-9, 1e-12])
_SCALE_CONSISTENT = np.array([1e-9, 1e-9, 1e-9, 1e-12, 1e-7, 1e-9])


def synthesize_orbit(
    geom: StairGeometry,
    p: AlipParams,
    T: float,
    r_apex: float,
    theta_start: float,
    residual_tolerance: float = 1e-3,
    max_iter: int = 60,
) -> NominalOrbit:
    """Construct a periodic reference orbit for the given stair geometry.

    The CoM path advances exactly (run, rise) per step and the momentum
    transferred through the foot exchange matches the start of the next
    step.  Raises OrbitSynthesisError when the geometry forces angles
    outside the small-angle margin or the Newton iteration fails to close.
    """
    if not T > 0:
        raise OrbitSynthesisError(f"step period must be positive, got {T}")
    if not r_apex > max(geom.rise, 0.0):
        raise OrbitSynthesisError(
            f"apex length {r_apex} must exceed the riser height {geom.rise}"
        )
    if abs(theta_start) >= THETA_LIMIT:
        raise OrbitSynthesisError(
            f"start angle {theta_start} outside the +-{THETA_LIMIT} rad margin"
        )

    if geom.run == 0.0 and geom.rise == 0.0:
        # stepping in place: constant-length, constant-angle reference
        flat = BezierCurve((theta_start,) * 5, T)
        level = BezierCurve((r_apex,) * 5, T)
        return NominalOrbit(
            level, flat, T, geom.step_vector, p, (0.0, 0.0), residual_tolerance
        )

    # initial guess: boundary angles from the geometry at apex length
    sin_end = math.sin(theta_start) + geom.run / r_apex
    if abs(sin_end) >= math.sin(THETA_LIMIT):
        raise OrbitSynthesisError(
            f"geometry (run={geom.run}, rise={geom.rise}) needs an end angle "
            f"beyond +-{THETA_LIMIT} rad from start angle {theta_start}"
        )
    thetaT = math.asin(sin_end)
    r0, rT = _boundary_lengths(theta_start, thetaT, geom.run, geom.rise)
    _check_leg_lengths(r0, rT, r_apex)

    # stage 1: shoot the zero-torque flow over a one-hump length profile and
    # fit the angle curve to it -- finds the flow-preferred curve shape
    def residual_flow(zv):
        theta0_v, L0_v, r0_v, rT_v = zv
        if r0_v <= 0 or rT_v <= 0:
            raise OrbitSynthesisError("negative boundary length in flow stage")
        r_c = _one_hump_length_curve(r0_v, rT_v, r_apex, T)
        ts, ths, dths = _shoot_linear_flow(theta0_v, L0_v, r_c, p)
        th_c = _fit_through_endpoints(ts, ths, dths, T, ths[0], ths[-1])
        f_x, f_z, f_L = _closure_defects(r_c, th_c, geom, p)
        return np.array([f_x, f_z, f_L, theta0_v - theta_start]), (r_c, th_c)

    L0 = p.m * (0.5 * (r0 + rT)) ** 2 * (thetaT - theta_start) / T
    z0 = np.array([theta_start, L0, r0, rT])
    _, _, seed = _newton(residual_flow, z0, _SCALE_FLOW, max_iter, "flow stage")
    seed_theta = seed[1].control_points
    seed_gamma = (seed_theta[2] - seed_theta[0]) / (seed_theta[4] - seed_theta[0])

    # stage 2: treat the angle control points as the unknowns and derive the
    # length from the zero-torque consistency equation, so the stored curves
    # themselves need (almost) no torque; the midpoint anchor keeps the shape
    # in the flow-like family found above
    def residual_consistent(zv):
        c1, c2, c3, theta0_v, thetaT_v, r0_v = zv
        th_c = BezierCurve((theta0_v, c1, c2, c3, thetaT_v), T)
        ts, rs, drs = _integrate_length_ode(th_c, r0_v, p)
        r_c = _fit_through_endpoints(ts, rs, drs, T, rs[0], rs[-1])
        f_x, f_z, f_L = _closure_defects(r_c, th_c, geom, p)
        f_apex = bezier_eval(r_c, 0.5 * T) - r_apex
        f_shape = c2 - (theta0_v + seed_gamma * (thetaT_v - theta0_v))
        return (
            np.array([f_x, f_z, f_L, theta0_v - theta_start, f_apex, f_shape]),
            (r_c, th_c),
        )

    z1 = np.array(
        [seed_theta[1], seed_theta[2], seed_theta[3], seed_theta[0], seed_theta[4],
         seed[0].control_points[0]]
    )
    _, F, curves = _newton(
        residual_consistent, z1, _SCALE_CONSISTENT, max_iter, "consistency stage"
    )

    r_curve, theta_curve = curves
    theta0 = theta_curve.control_points[0]
    r0 = r_curve.control_points[0]
    rT = r_curve.control_points[-1]
    _check_leg_lengths(r0, rT, r_apex)
    thetaT = theta_curve.control_points[-1]

    # store the defect actually left in the constructed curves: relabelled
    # post-impact angle against the curve start, and the momentum closure
    p_pre = PlanarVec(rT * math.sin(thetaT), rT * math.cos(thetaT))
    p_post = PlanarVec(p_pre.x - geom.run, p_pre.z - geom.rise)
    res_theta = float(com_angle(p_post) - theta0)
    res_L = float(F[2])

    return NominalOrbit(
        r_curve,
        theta_curve,
        T,
        geom.step_vector,
        p,
        (res_theta, res_L),
        residual_tolerance,
    )


_ORBIT_HEADER = "alipmpc-orbit-v1"


def save_orbit(orbit: NominalOrbit, path) -> None:
    """Write the orbit as a plain-text key-value document."""
    lines = [_ORBIT_HEADER]
    lines.append(f"m = {float(orbit.params.m)!r}")
    lines.append(f"g = {float(orbit.params.g)!r}")
    lines.append(f"T = {float(orbit.T)!r}")
    lines.append(f"step_run = {float(orbit.step_vector.x)!r}")
    lines.append(f"step_rise = {float(orbit.step_vector.z)!r}")
    r_pts = " ".join(repr(float(v)) for v in orbit.r_c_curve.control_points)
    th_pts = " ".join(repr(float(v)) for v in orbit.theta_curve.control_points)
    lines.append(f"r_control_points = {r_pts}")
    lines.append(f"theta_control_points = {th_pts}")
    lines.append(f"residual_theta = {float(orbit.residual[0])!r}")
    lines.append(f"residual_L = {float(orbit.residual[1])!r}")
    lines.append(f"residual_tolerance = {float(orbit.residual_tolerance)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_orbit(path) -> NominalOrbit:
    """Read an orbit document written by save_orbit; re-validates invariants."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != _ORBIT_HEADER:
        raise OrbitSynthesisError(f"{path}: not an orbit file (missing header)")
    kv = {}
    for ln in lines[1:]:
        if "=" not in ln:
            raise OrbitSynthesisError(f"{path}: malformed line {ln!r}")
        key, _, val = ln.partition("=")
        kv[key.strip()] = val.strip()
    try:
        T = float(kv["T"])
        params = AlipParams(float(kv["m"]), float(kv["g"]))
        step = PlanarVec(float(kv["step_run"]), float(kv["step_rise"]))
        r_pts = tuple(float(v) for v in kv["r_control_points"].split())
        th_pts = tuple(float(v) for v in kv["theta_control_points"].split())
        residual = (float(kv["residual_theta"]), float(kv["residual_L"]))
        tol = float(kv["residual_tolerance"])
    except KeyError as exc:
        raise OrbitSynthesisError(f"{path}: missing key {exc}") from exc
    return NominalOrbit(
        BezierCurve(r_pts, T), BezierCurve(th_pts, T), T, step, params, residual, tol
    )
