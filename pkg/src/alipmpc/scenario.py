"""Plain-text scenario files: one experiment per file, fully pinned.

Format: `key = value` lines with `#` comments.  Dotted keys group the
terrain, orbit, simulation, controller, and perturbation settings.  Unknown
keys are rejected with the offending line number so typos cannot silently
fall back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ScenarioError
from .mpc import MODE_HARD, MODE_SOFT, ControllerConfig
from .model import AlipParams
from .sim import PerturbationEvent, SimConfig
from .trajectory import NominalOrbit, StairGeometry, load_orbit, synthesize_orbit

__all__ = ["Scenario", "parse_scenario"]


@dataclass
class Scenario:
    name: str
    terrain: StairGeometry
    orbit_file: str | None
    orbit_params: dict
    sim: SimConfig
    path: str

    def build_orbit(self) -> NominalOrbit:
        if self.orbit_file is not None:
            return load_orbit(self.orbit_file)
        op = self.orbit_params
        return synthesize_orbit(
            self.terrain,
            AlipParams(op["mass"], op["gravity"]),
            op["step_period"],
            op["apex_length"],
            op["start_angle"],
            residual_tolerance=op["residual_tolerance"],
        )


_DEFAULTS = {
    "version": "1",
    "name": None,  # required
    "terrain.run": "0.28",
    "terrain.rise": "0.17",
    "terrain.num_steps": "5",
    "orbit.file": None,
    "orbit.mass": "32.0",
    "orbit.gravity": "9.81",
    "orbit.step_period": "0.4",
    "orbit.apex_length": "0.9",
    "orbit.start_angle": "-0.21",
    "orbit.residual_tolerance": "1e-3",
    "sim.dt_integration": "0.001",
    "sim.fall_threshold": "0.5",
    "sim.initial_offset_theta": "0.0",
    "sim.initial_offset_L": "0.0",
    "sim.seed": "0",
    "controller.enabled": "true",
    "controller.mode": MODE_SOFT,
    "controller.dt": "0.0025",
    "controller.update_period": "0.01",
    "controller.horizon_steps": "1",
    "controller.u_max": "23.0",
    "controller.h_weight": "1.0",
    "controller.q_theta": "1.0e5",
    "controller.q_L": "100.0",
    "controller.ramp": "1.1",
    "controller.terminal_multiplier": "100.0",
    "controller.max_iter": "400",
}

_PERTURB_FIELDS = {"t_start", "duration", "torque_scale"}


def _parse_float(raw, key, path, line):
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(f"key {key!r}: {raw!r} is not a number", path, line)


def _parse_int(raw, key, path, line):
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"key {key!r}: {raw!r} is not an integer", path, line)


def _parse_bool(raw, key, path, line):
    low = raw.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ScenarioError(f"key {key!r}: {raw!r} is not a boolean", path, line)


def parse_scenario(path) -> Scenario:
    """Read and fully validate a scenario file."""
    path = Path(path)
    if not path.is_file():
        raise ScenarioError("scenario file not found", str(path))

    values: dict = {}
    lines_of: dict = {}
    perturb_raw: dict = {}
    for lineno, raw_line in enumerate(path.read_text().splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {raw_line!r}",
                                str(path), lineno)
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not raw:
            raise ScenarioError(f"key {key!r} has no value", str(path), lineno)
        if key.startswith("perturb."):
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in _PERTURB_FIELDS:
                raise ScenarioError(f"unknown key {key!r}", str(path), lineno)
            perturb_raw.setdefault(parts[1], {})[parts[2]] = (raw, lineno)
        elif key in _DEFAULTS:
            if key in values:
                raise ScenarioError(f"duplicate key {key!r}", str(path), lineno)
            values[key] = raw
            lines_of[key] = lineno
        else:
            raise ScenarioError(f"unknown key {key!r}", str(path), lineno)

    def get(key):
        return values.get(key, _DEFAULTS[key]), lines_of.get(key)

    sp = str(path)
    version, ln = get("version")
    if version != "1":
        raise ScenarioError(f"unsupported version {version!r}", sp, ln)
    name, ln = get("name")
    if name is None:
        raise ScenarioError("missing required key 'name'", sp)

    raw, ln = get("terrain.run")
    run = _parse_float(raw, "terrain.run", sp, ln)
    raw, ln = get("terrain.rise")
    rise = _parse_float(raw, "terrain.rise", sp, ln)
    raw, ln = get("terrain.num_steps")
    num_steps = _parse_int(raw, "terrain.num_steps", sp, ln)
    try:
        terrain = StairGeometry(run, rise, num_steps)
    except Exception as exc:
        raise ScenarioError(f"invalid terrain: {exc}", sp)

    orbit_file, ln = get("orbit.file")
    if orbit_file is not None:
        orbit_file = str((path.parent / orbit_file).resolve())
        if not Path(orbit_file).is_file():
            raise ScenarioError(f"orbit file {orbit_file!r} not found", sp, ln)
    orbit_params = {}
    for short in ("mass", "gravity", "step_period", "apex_length",
                  "start_angle", "residual_tolerance"):
        raw, ln = get(f"orbit.{short}")
        orbit_params[short] = _parse_float(raw, f"orbit.{short}", sp, ln)
    if orbit_params["step_period"] <= 0:
        raise ScenarioError("orbit.step_period must be positive", sp)

    raw, ln = get("controller.enabled")
    enabled = _parse_bool(raw, "controller.enabled", sp, ln)
    mode, ln = get("controller.mode")
    if mode not in (MODE_SOFT, MODE_HARD):
        raise ScenarioError(f"controller.mode must be {MODE_SOFT!r} or "
                            f"{MODE_HARD!r}, got {mode!r}", sp, ln)
    ctrl_kwargs = dict(enabled=enabled, mode=mode)
    for short, conv in (
        ("dt", _parse_float),
        ("update_period", _parse_float),
        ("horizon_steps", _parse_int),
        ("u_max", _parse_float),
        ("h_weight", _parse_float),
        ("q_theta", _parse_float),
        ("q_L", _parse_float),
        ("ramp", _parse_float),
        ("terminal_multiplier", _parse_float),
        ("max_iter", _parse_int),
    ):
        raw, ln = get(f"controller.{short}")
        ctrl_kwargs[short] = conv(raw, f"controller.{short}", sp, ln)
    try:
        controller = ControllerConfig(**ctrl_kwargs)
    except Exception as exc:
        raise ScenarioError(f"invalid controller config: {exc}", sp)

    perturbations = []
    for idx in sorted(perturb_raw):
        entry = perturb_raw[idx]
        missing = _PERTURB_FIELDS - set(entry)
        if missing:
            raise ScenarioError(
                f"perturb.{idx} is missing {sorted(missing)}", sp,
                min(ln for _, ln in entry.values()),
            )
        kwargs = {}
        for fieldname, (raw, ln) in entry.items():
            kwargs[fieldname] = _parse_float(raw, f"perturb.{idx}.{fieldname}", sp, ln)
        try:
            perturbations.append(PerturbationEvent(**kwargs))
        except Exception as exc:
            raise ScenarioError(f"invalid perturb.{idx}: {exc}", sp)

    raw, ln = get("sim.dt_integration")
    dt_int = _parse_float(raw, "sim.dt_integration", sp, ln)
    if dt_int <= 0:
        raise ScenarioError("sim.dt_integration must be positive", sp, ln)
    T = orbit_params["step_period"]
    for label, period in (("the step period", T),
                          ("controller.update_period", controller.update_period)):
        ratio = period / dt_int
        if abs(ratio - round(ratio)) > 1e-9:
            raise ScenarioError(
                f"sim.dt_integration {dt_int} does not divide {label} {period}",
                sp, lines_of.get("sim.dt_integration"),
            )
    raw, ln = get("sim.fall_threshold")
    fall = _parse_float(raw, "sim.fall_threshold", sp, ln)
    raw, ln = get("sim.initial_offset_theta")
    off_theta = _parse_float(raw, "sim.initial_offset_theta", sp, ln)
    raw, ln = get("sim.initial_offset_L")
    off_L = _parse_float(raw, "sim.initial_offset_L", sp, ln)
    raw, ln = get("sim.seed")
    seed = _parse_int(raw, "sim.seed", sp, ln)

    sim = SimConfig(
        dt_integration=dt_int,
        T=T,
        num_steps=terrain.num_steps,
        controller=controller,
        perturbations=perturbations,
        fall_threshold=fall,
        initial_offset=(off_theta, off_L),
        seed=seed,
    )
    return Scenario(
        name=name,
        terrain=terrain,
        orbit_file=orbit_file,
        orbit_params=orbit_params,
        sim=sim,
        path=sp,
    )
