"""Reference trajectories, the pose-dependent velocity field and its time derivative,
and the desired force field."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.transform import Rotation, RotationSpline

from .geometry import Pose, adjoint_apply, coadjoint_transform, gcev, hat3, rot_y

R_DOWN = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])


def _vee(S):
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


@dataclass(frozen=True)
class ReferenceSample:
    """Desired pose with its body velocity and raw first/second derivatives."""

    pose: Pose
    twist: np.ndarray
    pdot: np.ndarray
    pddot: np.ndarray
    Rdot: np.ndarray
    Rddot: np.ndarray


@dataclass(frozen=True)
class TrajectorySpec:
    """Closed-form or sampled reference ``t -> gbar_d(t)``.

    kind ``circle``: ``center + radius*[cos wt, sin wt, 0]`` at a fixed
    orientation. kind ``sphere``: a meridian arc ``center + radius*[0, sin th,
    cos th]`` with ``th = theta0 + rate*t`` and orientation ``rotation @
    Ry(-th)``, keeping the tool axis along the inward normal. kind
    ``waypoints``: cubic spline through sampled positions and a rotation
    spline through sampled orientations, clamped at the end points.
    ``frame`` left-multiplies every sample (a rigid re-expression of the world).
    """

    kind: str
    params: dict = field(default_factory=dict)
    frame: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        if self.kind not in ("circle", "sphere", "waypoints"):
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if self.kind == "waypoints":
            p = self.params
            t = np.asarray(p["times"], dtype=float)
            if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
                raise ValueError("waypoint times must be strictly increasing (at least two)")
            rot = Rotation.from_matrix(np.asarray(p["rotations"], dtype=float))
            object.__setattr__(self, "_splines", (
                CubicSpline(t, np.asarray(p["positions"], dtype=float), bc_type="clamped"),
                RotationSpline(t, rot), t[0], t[-1]))

    def transformed(self, h: Pose) -> "TrajectorySpec":
        return TrajectorySpec(self.kind, self.params, h @ self.frame)


def circle_spec(center=(0.5, 0.0, 0.125), radius=0.1, omega=1.0, rotation=R_DOWN):
    return TrajectorySpec("circle", {"center": list(center), "radius": radius, "omega": omega,
                                     "rotation": np.asarray(rotation).tolist()})


def sphere_spec(center=(0.4, 0.0, -0.1), radius=0.3, theta0=-np.pi / 4, rate=np.pi / 20,
                rotation=R_DOWN):
    return TrajectorySpec("sphere", {"center": list(center), "radius": radius, "theta0": theta0,
                                     "rate": rate, "rotation": np.asarray(rotation).tolist()})


def _local_sample(spec: TrajectorySpec, t):
    p = spec.params
    if spec.kind == "circle":
        c = np.asarray(p["center"], dtype=float)
        r, w = float(p["radius"]), float(p.get("omega", 1.0))
        cs, sn = np.cos(w * t), np.sin(w * t)
        pos = c + r * np.array([cs, sn, 0.0])
        pd = r * w * np.array([-sn, cs, 0.0])
        pdd = -r * w * w * np.array([cs, sn, 0.0])
        R = np.asarray(p["rotation"], dtype=float)
        return pos, pd, pdd, R, np.zeros(3), np.zeros(3)
    if spec.kind == "sphere":
        c = np.asarray(p["center"], dtype=float)
        r, th0, rate = float(p["radius"]), float(p["theta0"]), float(p["rate"])
        th = th0 + rate * t
        s, co = np.sin(th), np.cos(th)
        pos = c + r * np.array([0.0, s, co])
        pd = r * rate * np.array([0.0, co, -s])
        pdd = -r * rate * rate * np.array([0.0, s, co])
        R = np.asarray(p["rotation"], dtype=float) @ rot_y(-th)
        return pos, pd, pdd, R, np.array([0.0, -rate, 0.0]), np.zeros(3)
    pspl, rspl, t0, t1 = spec._splines
    tc = min(max(t, t0), t1)
    pos = pspl(tc)
    R = rspl(tc).as_matrix()
    if t0 <= t <= t1:
        return pos, pspl(tc, 1), pspl(tc, 2), R, rspl(tc, 1), rspl(tc, 2)
    return pos, np.zeros(3), np.zeros(3), R, np.zeros(3), np.zeros(3)


def reference_trajectory(spec: TrajectorySpec, t) -> ReferenceSample:
    pos, pd, pdd, R, w, wd = _local_sample(spec, float(t))
    W = hat3(w)
    Rdot = R @ W
    Rddot = R @ (W @ W + hat3(wd))
    twist = np.concatenate([R.T @ pd, w])
    h = spec.frame
    Rh = h.rotation
    return ReferenceSample(Pose(Rh @ R, Rh @ pos + h.position), twist,
                           Rh @ pd, Rh @ pdd, Rh @ Rdot, Rh @ Rddot)


def velocity_field(t, g: Pose, spec: TrajectorySpec, zeta, sample: ReferenceSample | None = None):
    """Desired body twist at pose ``g``: reference feedforward moved to ``g``
    plus descent on the error function toward the reference."""
    ref = reference_trajectory(spec, t) if sample is None else sample
    ged = g.inverse() @ ref.pose
    return adjoint_apply(ged, ref.twist) - zeta * gcev(g, ref.pose)


def velocity_field_rate(t, g: Pose, Vb, spec: TrajectorySpec, zeta,
                        sample: ReferenceSample | None = None):
    """Total time derivative of :func:`velocity_field` along a motion with body twist ``Vb``."""
    ref = reference_trajectory(spec, t) if sample is None else sample
    R, p = g.rotation, g.position
    Rd, pd = ref.pose.rotation, ref.pose.position
    v, w = np.asarray(Vb[:3], dtype=float), np.asarray(Vb[3:], dtype=float)
    W = hat3(w)
    Rt = R.T
    dp = p - pd
    pdot = R @ v
    Rdd, Rddd = ref.Rdot, ref.Rddot

    # feedforward part: A = R^T Rd' Rd^T R (angular), B = R^T Rd' Rd^T dp + R^T pd' (linear)
    A = Rt @ Rdd @ Rd.T @ R
    Adot = -W @ A + Rt @ Rddd @ Rd.T @ R + Rt @ Rdd @ Rdd.T @ R + A @ W
    K = Rt @ Rdd @ Rd.T
    Bdot = (-W @ K @ dp + Rt @ Rddd @ Rd.T @ dp + Rt @ Rdd @ Rdd.T @ dp
            + K @ (pdot - ref.pdot) - W @ Rt @ ref.pdot + Rt @ ref.pddot)

    # error part: E = Rd^T R - R^T Rd (angular), D = R^T dp (linear)
    RdtR = Rd.T @ R
    Edot = Rdd.T @ R + RdtR @ W + W @ RdtR.T - Rt @ Rdd
    Ddot = -W @ Rt @ dp + v - Rt @ ref.pdot

    return np.concatenate([Bdot - zeta * Ddot, _vee(Adot) - zeta * _vee(Edot)])


@dataclass(frozen=True)
class ForceFieldSpec:
    """Constant desired wrench, given in the current tool frame or the desired frame."""

    wrench: np.ndarray
    frame: str = "current"

    def __post_init__(self):
        w = np.array(self.wrench, dtype=float).reshape(6)
        if not np.all(np.isfinite(w)):
            raise ValueError("desired wrench must be finite")
        if self.frame not in ("current", "desired"):
            raise ValueError("force field frame must be 'current' or 'desired'")
        w.flags.writeable = False
        object.__setattr__(self, "wrench", w)


def force_field(t, g: Pose, spec: ForceFieldSpec, gd: Pose | None = None):
    """Desired wrench expressed in the body frame of ``g``."""
    if spec.frame == "current" or gd is None:
        return spec.wrench.copy()
    ged = g.inverse() @ gd
    return coadjoint_transform(ged.inverse(), spec.wrench)
