"""Six-joint serial arm: kinematics, joint-space and operational-space dynamics.

The arm is described in its home configuration in base coordinates: every joint
has a unit axis and a point on that axis, every link a mass, center of mass and
rotational inertia. Link frame i sits at joint i's origin, aligned with the
base, so each joint screw reduces to a pure rotation ``[0; axis]`` in its own
frame. The numerics live in :mod:`gufic.kernels`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from . import kernels
from ._jsonio import load_json
from .errors import ConfigError, NearSingular, NoConvergence
from .geometry import Pose, error_function, hat3

N_JOINTS = 6
SINGULAR_SIGMA = 1e-4
DEFAULT_GRAVITY = (0.0, 0.0, -9.81)

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_mat3 = {"type": "array", "items": _vec3, "minItems": 3, "maxItems": 3}
_pose = {
    "type": "object",
    "properties": {"position": _vec3, "rotation": _mat3},
    "required": ["position", "rotation"],
    "additionalProperties": False,
}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["joints", "links", "end_effector"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "joints": {
            "type": "array", "minItems": N_JOINTS, "maxItems": N_JOINTS,
            "items": {
                "type": "object", "required": ["axis", "origin"], "additionalProperties": False,
                "properties": {"name": {"type": "string"}, "axis": _vec3, "origin": _vec3,
                               "armature": {"type": "number", "minimum": 0}},
            },
        },
        "links": {
            "type": "array", "minItems": N_JOINTS, "maxItems": N_JOINTS,
            "items": {
                "type": "object", "required": ["mass", "com", "inertia"], "additionalProperties": False,
                "properties": {"name": {"type": "string"},
                               "mass": {"type": "number", "exclusiveMinimum": 0},
                               "com": _vec3, "inertia": _mat3},
            },
        },
        "end_effector": _pose,
        "base": _pose,
        "gravity": _vec3,
    },
}


@dataclass(frozen=True)
class RobotDescription:
    """Home-configuration description of a 6-joint revolute arm.

    ``axes``/``origins`` are per-joint, ``masses``/``coms``/``inertias`` per
    link (inertia about the COM), all in base coordinates. ``base`` places the
    arm in the world and ``gravity`` is a world-frame vector.
    """

    axes: np.ndarray
    origins: np.ndarray
    masses: np.ndarray
    coms: np.ndarray
    inertias: np.ndarray
    ee_home: Pose
    armature: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))
    base: Pose = field(default_factory=Pose.identity)
    gravity: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_GRAVITY))
    name: str = "arm"

    def __post_init__(self):
        axes = np.array(self.axes, dtype=float).reshape(N_JOINTS, 3)
        norms = np.linalg.norm(axes, axis=1)
        if np.any(norms < 1e-12):
            raise ConfigError("joint axis must be nonzero")
        axes = axes / norms[:, None]
        inertias = np.array(self.inertias, dtype=float).reshape(N_JOINTS, 3, 3)
        masses = np.array(self.masses, dtype=float).reshape(N_JOINTS)
        if np.any(masses <= 0):
            raise ConfigError("link masses must be positive")
        for i, I in enumerate(inertias):
            if not np.allclose(I, I.T, atol=1e-12) or np.linalg.eigvalsh(I).min() <= 0:
                raise ConfigError(f"links.{i}.inertia must be symmetric positive definite")
        armature = np.array(self.armature, dtype=float).reshape(N_JOINTS)
        if np.any(armature < 0):
            raise ConfigError("armature must be nonnegative")
        vals = dict(axes=axes, origins=np.array(self.origins, dtype=float).reshape(N_JOINTS, 3),
                    masses=masses, coms=np.array(self.coms, dtype=float).reshape(N_JOINTS, 3),
                    inertias=inertias, armature=armature,
                    gravity=np.array(self.gravity, dtype=float).reshape(3))
        for k, v in vals.items():
            v.flags.writeable = False
            object.__setattr__(self, k, v)
        object.__setattr__(self, "_arrays", _kernel_arrays(self))

    # kernel-layout arrays, see gufic._kernels_py
    @property
    def A(self):
        return self._arrays[0]

    @property
    def Mrel(self):
        return self._arrays[1]

    @property
    def Mee(self):
        return self._arrays[2]

    @property
    def G(self):
        return self._arrays[3]

    @property
    def gravity_base(self):
        return self.base.rotation.T @ self.gravity

    def with_base(self, base: Pose, gravity=None) -> "RobotDescription":
        """Same arm mounted at ``base`` (world frame), optionally under new gravity."""
        return RobotDescription(self.axes, self.origins, self.masses, self.coms, self.inertias,
                                self.ee_home, self.armature, base,
                                self.gravity if gravity is None else gravity, self.name)

    def without_gravity(self) -> "RobotDescription":
        return RobotDescription(self.axes, self.origins, self.masses, self.coms, self.inertias,
                                self.ee_home, self.armature, self.base, np.zeros(3), self.name)


def _kernel_arrays(model):
    n = N_JOINTS
    A = np.zeros((n, 6))
    A[:, 3:] = model.axes
    Mrel = np.tile(np.eye(4), (n, 1, 1))
    prev = np.zeros(3)
    for i in range(n):
        Mrel[i, :3, 3] = model.origins[i] - prev
        prev = model.origins[i]
    Mee = model.ee_home.matrix
    Mee[:3, 3] -= model.origins[-1]
    G = np.zeros((n, 6, 6))
    for i in range(n):
        m = model.masses[i]
        C = hat3(model.coms[i] - model.origins[i])
        G[i, :3, :3] = m * np.eye(3)
        G[i, :3, 3:] = -m * C
        G[i, 3:, :3] = m * C
        G[i, 3:, 3:] = model.inertias[i] - m * C @ C
    out = (A, Mrel, Mee, G)
    for a in out:
        a.flags.writeable = False
    return out


def load_model(path) -> RobotDescription:
    """Read a robot description file; errors name the offending line and field."""
    d = load_json(path, MODEL_SCHEMA, "robot model")
    base = d.get("base")
    ee = d["end_effector"]
    try:
        return RobotDescription(
            axes=[j["axis"] for j in d["joints"]],
            origins=[j["origin"] for j in d["joints"]],
            masses=[l["mass"] for l in d["links"]],
            coms=[l["com"] for l in d["links"]],
            inertias=[l["inertia"] for l in d["links"]],
            ee_home=Pose(ee["rotation"], ee["position"]),
            armature=[j.get("armature", 0.0) for j in d["joints"]],
            base=Pose(base["rotation"], base["position"]) if base else Pose.identity(),
            gravity=d.get("gravity", DEFAULT_GRAVITY),
            name=d.get("name", Path(path).stem),
        )
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def default_model_path() -> Path:
    return Path(__file__).parent / "data" / "indy7_like.json"


@dataclass(frozen=True)
class JointState:
    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(N_JOINTS)
        qd = np.array(self.qdot, dtype=float).reshape(N_JOINTS)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
            raise ValueError("joint state must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qd)


@dataclass(frozen=True)
class DynamicsTerms:
    M: np.ndarray
    C: np.ndarray
    G: np.ndarray


@dataclass(frozen=True)
class OperationalTerms:
    Mt: np.ndarray
    Ct: np.ndarray
    Gt: np.ndarray
    Jb: np.ndarray
    Jbdot: np.ndarray


@dataclass(frozen=True)
class ArmSnapshot:
    """Everything the controller and integrator need at one (q, qdot)."""

    pose: Pose
    Jb: np.ndarray
    Jbdot: np.ndarray
    joint: DynamicsTerms


def forward_kinematics(model: RobotDescription, q) -> Pose:
    T = kernels.forward_kinematics(model.A, model.Mrel, model.Mee, np.asarray(q, dtype=float))
    return model.base @ Pose.from_matrix(T)


def body_jacobian(model: RobotDescription, q):
    return kernels.body_jacobian(model.A, model.Mrel, model.Mee, np.asarray(q, dtype=float))


def jacobian_rate(model: RobotDescription, q, qdot):
    return kernels.jacobian_rate(body_jacobian(model, q), np.asarray(qdot, dtype=float))


def joint_space_terms(model: RobotDescription, q, qdot) -> DynamicsTerms:
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    M = kernels.mass_matrix(model.A, model.Mrel, model.G, model.armature, q)
    C = kernels.coriolis_matrix(model.A, model.Mrel, model.G, model.armature, q, qdot)
    z = np.zeros(N_JOINTS)
    G = kernels.rnea(model.A, model.Mrel, model.G, model.armature, model.gravity_base, q, z, z)
    return DynamicsTerms(M, C, G)


def inverse_dynamics(model: RobotDescription, q, qdot, qddot):
    """Recursive Newton-Euler joint torques; used as an independent oracle."""
    return kernels.rnea(model.A, model.Mrel, model.G, model.armature, model.gravity_base,
                        np.asarray(q, dtype=float), np.asarray(qdot, dtype=float),
                        np.asarray(qddot, dtype=float))


def snapshot(model: RobotDescription, q, qdot) -> ArmSnapshot:
    T, J, Jd, M, C, G = kernels.dynamics(model.A, model.Mrel, model.Mee, model.G, model.armature,
                                         model.gravity_base, np.asarray(q, dtype=float),
                                         np.asarray(qdot, dtype=float))
    return ArmSnapshot(model.base @ Pose.from_matrix(T), J, Jd, DynamicsTerms(M, C, G))


def operational_from(J, Jd, terms: DynamicsTerms) -> OperationalTerms:
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] < SINGULAR_SIGMA:
        raise NearSingular(float(s[-1]))
    Ji = np.linalg.inv(J)
    JiT = Ji.T
    Mt = JiT @ terms.M @ Ji
    Mt = 0.5 * (Mt + Mt.T)
    Ct = JiT @ (terms.C - terms.M @ Ji @ Jd) @ Ji
    Gt = JiT @ terms.G
    return OperationalTerms(Mt, Ct, Gt, J, Jd)


def operational_terms(model: RobotDescription, q, qdot) -> OperationalTerms:
    snap = snapshot(model, q, qdot)
    return operational_from(snap.Jb, snap.Jbdot, snap.joint)


def forward_dynamics(model: RobotDescription, state: JointState, T, Fe, terms=None, J=None):
    """Joint accelerations from ``M qdd = T + Jb^T Fe - C qd - G``."""
    if terms is None:
        terms = joint_space_terms(model, state.q, state.qdot)
    if J is None:
        J = body_jacobian(model, state.q)
    rhs = np.asarray(T, dtype=float) + J.T @ np.asarray(Fe, dtype=float) - terms.C @ state.qdot - terms.G
    return np.linalg.solve(terms.M, rhs)


def inverse_kinematics(model: RobotDescription, target: Pose, seed, *, damping=1e-3,
                       max_iter=500, tol=1e-8):
    """Damped least squares on the body-frame pose error.

    Iterates until the error twist stops shrinking at machine precision, so
    the result is reproducible to round-off for equivalent targets; raises
    NoConvergence if ``error_function`` is still above ``tol`` afterwards.
    """
    q = np.array(seed, dtype=float).reshape(N_JOINTS)
    lam2 = damping**2
    for _ in range(max_iter + 1):
        g = forward_kinematics(model, q)
        xi = np.concatenate([g.rotation.T @ (target.position - g.position),
                             Rotation.from_matrix(g.rotation.T @ target.rotation).as_rotvec()])
        if np.linalg.norm(xi) < 1e-12:
            break
        J = body_jacobian(model, q)
        q = q + J.T @ np.linalg.solve(J @ J.T + lam2 * np.eye(6), xi)
    err = error_function(forward_kinematics(model, q), target)
    if not np.isfinite(err) or err > tol:
        raise NoConvergence(f"inverse kinematics did not converge (psi={err:.3e})")
    return q
