"""Scenario configuration: JSON schema, loading, and rigid re-expression of a scene."""
from __future__ import annotations

import copy
from dataclasses import dataclass, replace
from pathlib import Path


from ._jsonio import load_json, validate
from .control import ControllerConfig, ForcePIDGains, ImpedanceGains, ShapingConfig, TankParams
from .environment import ContactParams, SurfaceModel
from .errors import ConfigError
from .fields import ForceFieldSpec, TrajectorySpec
from .geometry import Pose, StiffnessGains
from .robot_model import RobotDescription, default_model_path, load_model

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_vec3 = {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}
_vec6 = {"type": "array", "items": _num, "minItems": 6, "maxItems": 6}
_mat3 = {"type": "array", "items": _vec3, "minItems": 3, "maxItems": 3}
_gain3 = {"oneOf": [{"type": "array", "items": _pos, "minItems": 3, "maxItems": 3}, _mat3]}
_tank_fields = {"upper": _pos, "lower": _pos, "margin": _pos, "initial": _pos}
_pid = {
    "type": "object", "additionalProperties": False,
    "properties": {"kp": _nonneg, "ki": _nonneg, "kd": _nonneg, "integral_limit": _pos},
}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["controller", "duration", "trajectory", "surface", "force", "gains", "tanks"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "robot": {"type": "string"},
        "controller": {"enum": ["gufic", "gic", "naive"]},
        "duration": _nonneg,
        "timestep": _pos,
        "output": {"type": "string"},
        "trajectory": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["circle", "sphere", "waypoints"]}},
            "allOf": [
                {"if": {"properties": {"kind": {"const": "circle"}}},
                 "then": {"required": ["center", "radius", "rotation"],
                          "properties": {"center": _vec3, "radius": _pos, "omega": _num,
                                         "rotation": _mat3}}},
                {"if": {"properties": {"kind": {"const": "sphere"}}},
                 "then": {"required": ["center", "radius", "theta0", "rate", "rotation"],
                          "properties": {"center": _vec3, "radius": _pos, "theta0": _num,
                                         "rate": _num, "rotation": _mat3}}},
                {"if": {"properties": {"kind": {"const": "waypoints"}}},
                 "then": {"required": ["times", "positions", "rotations"],
                          "properties": {"times": {"type": "array", "items": _num, "minItems": 2},
                                         "positions": {"type": "array", "items": _vec3, "minItems": 2},
                                         "rotations": {"type": "array", "items": _mat3, "minItems": 2}}}},
            ],
        },
        "start": {
            "type": "object", "additionalProperties": False,
            "properties": {"offset": _num, "seed": _vec6},
        },
        "surface": {
            "type": "object",
            "required": ["kind", "center"],
            "additionalProperties": False,
            "properties": {"kind": {"enum": ["plane", "sphere"]}, "center": _vec3,
                           "normal": _vec3, "radius": _pos},
            "allOf": [
                {"if": {"properties": {"kind": {"const": "plane"}}}, "then": {"required": ["normal"]}},
                {"if": {"properties": {"kind": {"const": "sphere"}}}, "then": {"required": ["radius"]}},
            ],
        },
        "contact": {
            "type": "object", "additionalProperties": False,
            "properties": {"stiffness": _nonneg, "damping": _nonneg, "tangential_damping": _nonneg},
        },
        "sensor": {"type": "object", "additionalProperties": False,
                   "properties": {"cutoff": _pos}},
        "force": {
            "type": "object", "required": ["wrench"], "additionalProperties": False,
            "properties": {"wrench": _vec6, "frame": {"enum": ["current", "desired"]}},
        },
        "gains": {
            "type": "object",
            "required": ["Kp", "KR", "Kd", "zeta", "pid"],
            "additionalProperties": False,
            "properties": {
                "Kp": _gain3, "KR": _gain3,
                "Kd": {"oneOf": [_pos, {"type": "array", "items": _pos, "minItems": 6, "maxItems": 6}]},
                "zeta": _pos,
                "pid": _pid,
                "gic": {"type": "object", "additionalProperties": False,
                        "properties": {"Kp": _gain3, "KR": _gain3,
                                       "Kd": {"oneOf": [_pos, {"type": "array", "items": _pos,
                                                               "minItems": 6, "maxItems": 6}]}}},
            },
        },
        "tanks": {
            "type": "object",
            "required": ["upper", "lower", "margin", "initial"],
            "additionalProperties": False,
            "properties": dict(_tank_fields, force={"type": "object", "additionalProperties": False,
                                                    "properties": _tank_fields},
                               impedance={"type": "object", "additionalProperties": False,
                                          "properties": _tank_fields}),
        },
        "shaping": {
            "type": "object", "additionalProperties": False,
            "properties": {"enabled": {"type": "boolean"}, "psi0": _nonneg, "sigma": _pos},
        },
        "tank_force_signal": {"enum": ["raw", "filtered"]},
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: RobotDescription
    controller: ControllerConfig
    surface: SurfaceModel
    contact: ContactParams
    duration: float
    timestep: float = 1e-3
    start_offset: float = 0.05
    ik_seed: tuple = (0.0, 0.3, 1.2, 0.0, 1.2, 0.0)
    sensor_cutoff: float = 5.0
    output: str = "out"
    raw: dict | None = None
    base_dir: str = "."

    @property
    def steps(self):
        return int(round(self.duration / self.timestep))

    def with_controller(self, kind):
        """Same scene driven by another control law (gains per the config's sections)."""
        if self.raw is None:
            raise ConfigError("controller switch needs the source config")
        raw = copy.deepcopy(self.raw)
        raw["controller"] = kind
        return from_dict(raw, base_dir=self.base_dir)

    def with_duration(self, duration):
        if duration < 0:
            raise ConfigError("duration must be nonnegative")
        return replace(self, duration=float(duration))

    def transformed(self, h: Pose) -> "ScenarioConfig":
        """The whole scene moved rigidly by ``h``: robot base, gravity, reference, surface."""
        model = self.model.with_base(h @ self.model.base, h.rotation @ self.model.gravity)
        ctrl = replace(self.controller, trajectory=self.controller.trajectory.transformed(h))
        return replace(self, model=model, controller=ctrl, surface=self.surface.transformed(h))


def _tank(base, over):
    d = {k: base[k] for k in _tank_fields}
    d.update(over or {})
    try:
        return TankParams(**d)
    except ValueError as exc:
        raise ConfigError(f"tanks: {exc}") from None


def from_dict(d, base_dir=".", path="<config>") -> ScenarioConfig:
    validate(d, SCENARIO_SCHEMA, path)
    base_dir = Path(base_dir)
    try:
        robot = d.get("robot")
        if robot in (None, "builtin:indy7_like"):
            model = load_model(default_model_path())
        else:
            rp = Path(robot)
            model = load_model(rp if rp.is_absolute() else base_dir / rp)

        tr = dict(d["trajectory"])
        kind = tr.pop("kind")
        trajectory = TrajectorySpec(kind, tr)

        s = d["surface"]
        if s["kind"] == "plane":
            surface = SurfaceModel.plane(s["center"], s["normal"])
        else:
            surface = SurfaceModel.sphere(s["center"], s["radius"])
        contact = ContactParams(**d.get("contact", {}))

        gains = d["gains"]
        kind = d["controller"]
        gsec = dict(gains)
        if kind == "gic":
            gsec.update(gains.get("gic", {}))
        impedance = ImpedanceGains(StiffnessGains(gsec["Kp"], gsec["KR"]), gsec["Kd"])
        pid = ForcePIDGains(**gains["pid"])
        tanks = d["tanks"]
        ctrl = ControllerConfig(
            kind=kind,
            trajectory=trajectory,
            force=ForceFieldSpec(d["force"]["wrench"], d["force"].get("frame", "current")),
            impedance=impedance,
            pid=pid,
            zeta=0.0 if kind == "gic" else float(gains["zeta"]),
            force_tank=_tank(tanks, tanks.get("force")),
            impedance_tank=_tank(tanks, tanks.get("impedance")),
            shaping=ShapingConfig(**d.get("shaping", {})),
            tank_force_signal=d.get("tank_force_signal", "raw"),
        )
        start = d.get("start", {})
        dt = float(d.get("timestep", 1e-3))
        duration = float(d["duration"])
        if duration != 0 and duration < dt:
            raise ConfigError("duration must be zero or at least one timestep")
        raw = copy.deepcopy(d)
        return ScenarioConfig(
            name=d.get("name", "scenario"), model=model, controller=ctrl, surface=surface,
            contact=contact, duration=duration, timestep=dt,
            start_offset=float(start.get("offset", 0.05)),
            ik_seed=tuple(start.get("seed", ScenarioConfig.ik_seed)),
            sensor_cutoff=float(d.get("sensor", {}).get("cutoff", 5.0)),
            output=d.get("output", "out"), raw=raw, base_dir=str(base_dir))
    except ConfigError as exc:
        if str(exc).startswith(str(path)):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    d = load_json(path, SCENARIO_SCHEMA, "scenario config")
    return from_dict(d, base_dir=path.parent, path=str(path))


def scenario_dir() -> Path:
    return Path(__file__).parent / "scenarios"


def shipped_scenarios():
    return sorted(scenario_dir().glob("*.json"))
