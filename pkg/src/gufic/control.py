"""Impedance, force-tracking and tank-augmented controllers on SE(3).

Three laws share one interface:

* ``gic``   geometric impedance control tracking the reference directly;
* ``naive`` the same impedance term plus a force PID, with no energy bookkeeping;
* ``gufic`` both terms routed through energy tanks so the closed loop stays
  passive at the interaction port; the motion reference is a pose-dependent
  velocity field integrated into a modified setpoint ``gd_prime``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .fields import (ForceFieldSpec, TrajectorySpec, force_field, reference_trajectory,
                     velocity_field, velocity_field_rate)
from .geometry import (Pose, StiffnessGains, adjoint_apply, elastic_wrench, error_function,
                       exp_se3)
from .robot_model import OperationalTerms

T_FLOOR = 1e-6


@dataclass(frozen=True)
class ImpedanceGains:
    stiffness: StiffnessGains
    Kd: np.ndarray

    def __post_init__(self):
        Kd = np.array(self.Kd, dtype=float)
        if Kd.ndim == 0:
            Kd = float(Kd) * np.eye(6)
        elif Kd.ndim == 1:
            Kd = np.diag(Kd)
        if Kd.shape != (6, 6) or not np.allclose(Kd, Kd.T, atol=1e-12):
            raise ValueError("Kd must be a symmetric 6x6 matrix")
        if np.linalg.eigvalsh(Kd).min() <= 0:
            raise ValueError("Kd must be positive definite")
        Kd.flags.writeable = False
        object.__setattr__(self, "Kd", Kd)


@dataclass(frozen=True)
class ForcePIDGains:
    kp: float = 1.0
    ki: float = 0.5
    kd: float = 4.0
    integral_limit: float = 50.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("PID gains must be nonnegative")
        if not self.integral_limit > 0:
            raise ValueError("integral limit must be positive")


@dataclass(frozen=True)
class TankParams:
    upper: float
    lower: float
    margin: float
    initial: float

    def __post_init__(self):
        if not (0 < self.lower < self.lower + self.margin < self.upper):
            raise ValueError("tank limits must satisfy 0 < lower < lower + margin < upper")
        if not (self.lower <= self.initial <= self.upper):
            raise ValueError("initial tank level must lie within [lower, upper]")


@dataclass(frozen=True)
class TankState:
    """Tank coordinate ``x``; the stored energy is ``x**2 / 2``."""

    x: float

    @classmethod
    def from_level(cls, T):
        return cls(float(np.sqrt(2.0 * max(T, T_FLOOR))))

    @property
    def level(self):
        return 0.5 * self.x * self.x


@dataclass(frozen=True)
class PIDState:
    integral: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prev_error: np.ndarray | None = None


@dataclass(frozen=True)
class ShapingConfig:
    """Optional attenuation of the force term once the pose error grows large."""

    enabled: bool = False
    psi0: float = 0.05
    sigma: float = 0.05


@dataclass(frozen=True)
class Switching:
    gamma: float
    beta: float
    alpha: float


NO_SWITCH = Switching(np.nan, np.nan, np.nan)


@dataclass(frozen=True)
class HeldInterval:
    """Commands and gate decisions held over the last sampling interval.

    The tanks are charged for an interval once it has elapsed, with the work the
    held commands did at the mean of the body twists measured at its two ends.
    """

    dt: float
    Vb: np.ndarray
    Ff: np.ndarray
    force_switch: Switching
    Vd_prime: np.ndarray
    port: float
    Kd_eV: np.ndarray
    impedance_switch: Switching
    scale: float


@dataclass(frozen=True)
class GUFICState:
    force_tank: TankState
    impedance_tank: TankState
    pid: PIDState
    gd_prime: Pose
    force_switch: Switching = NO_SWITCH
    impedance_switch: Switching = NO_SWITCH
    held: HeldInterval | None = None
    scale_i: float = 1.0


@dataclass(frozen=True)
class ControllerConfig:
    kind: str
    trajectory: TrajectorySpec
    force: ForceFieldSpec
    impedance: ImpedanceGains
    pid: ForcePIDGains
    zeta: float
    force_tank: TankParams | None = None
    impedance_tank: TankParams | None = None
    shaping: ShapingConfig = ShapingConfig()
    tank_force_signal: str = "raw"

    def __post_init__(self):
        if self.kind not in ("gufic", "gic", "naive"):
            raise ValueError(f"unknown controller {self.kind!r}")
        if self.kind == "gufic" and (self.force_tank is None or self.impedance_tank is None):
            raise ValueError("gufic needs both tank parameter sets")
        if self.zeta < 0 or (self.kind != "gic" and not self.zeta > 0):
            raise ValueError("zeta must be positive")
        if self.tank_force_signal not in ("raw", "filtered"):
            raise ValueError("tank_force_signal must be 'raw' or 'filtered'")


@dataclass(frozen=True)
class ControlOutput:
    torque: np.ndarray
    Fd: np.ndarray
    Ff: np.ndarray
    Ff_prime: np.ndarray
    Fi_prime: np.ndarray
    Vd_star: np.ndarray
    Vd_star_prime: np.ndarray
    eV_prime: np.ndarray
    gd_used: Pose
    scale_i: float = np.nan
    force_switch: Switching = NO_SWITCH
    impedance_switch: Switching = NO_SWITCH
    tank_f: float = 0.0
    tank_i: float = 0.0
    caps: tuple = (0.0, 0.0, 0.0)


def switching_alpha(T, params: TankParams):
    """Smooth gate: 1 above ``lower + margin``, 0 below ``lower``, cosine blend between."""
    if T >= params.lower + params.margin:
        return 1.0
    if T >= params.lower:
        return 0.5 * (1.0 - np.cos((T - params.lower) / params.margin * np.pi))
    return 0.0


def _advance(state: TankState, rate, dt):
    # Explicit Euler on the level T = x^2/2 (equivalently x' = rate/x), floored.
    return TankState.from_level(state.level + rate * dt)


def force_pid(sensed, Fd, state: PIDState, gains: ForcePIDGains, dt):
    """PID on the force error ``-sensed - Fd`` plus feedforward ``Fd``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    e = -np.asarray(sensed, dtype=float) - Fd
    if state.prev_error is None:
        integral = state.integral
        de = np.zeros(6)
    else:
        integral = state.integral + 0.5 * (e + state.prev_error) * dt
        de = (e - state.prev_error) / dt
    integral = np.clip(integral, -gains.integral_limit, gains.integral_limit)
    Ff = -gains.kp * e - gains.kd * de - gains.ki * integral + Fd
    return Ff, PIDState(integral, e)


def force_tank_switching(T, power, params: TankParams) -> Switching:
    """Gate decisions for the force tank given its level and the command power ``Vb.Ff``."""
    return Switching(1.0 if power < 0.0 else 0.0, 1.0 if T <= params.upper else 0.0,
                     switching_alpha(T, params))


def force_tank_rate(power, sw: Switching):
    return -sw.beta * sw.gamma * power + sw.alpha * (sw.gamma - 1.0) * power


def force_tank_step(state: TankState, Vb, Ff, params: TankParams, dt):
    """Gate the force command by the force tank; returns ``(Ff', new_state, switching)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    power = float(np.dot(Vb, Ff))
    sw = force_tank_switching(state.level, power, params)
    scale = sw.gamma + sw.alpha * (1.0 - sw.gamma)
    return scale * np.asarray(Ff, dtype=float), _advance(state, force_tank_rate(power, sw), dt), sw


def impedance_tank_switching(T, port, params: TankParams) -> Switching:
    """Gate decisions for the impedance tank given its level and the field port power."""
    return Switching(1.0 if port > 0.0 else 0.0, 1.0 if T <= params.upper else 0.0,
                     switching_alpha(T, params))


def impedance_tank_rate(port, diss, sw: Switching, scale=None):
    """Impedance tank inflow; ``scale`` is the field scale actually applied.

    With the gated scale ``gamma + alpha*(1 - gamma)`` this is the usual
    ``beta*(gamma*port + diss) + alpha*(1 - gamma)*port``.
    """
    s = sw.gamma + sw.alpha * (1.0 - sw.gamma) if scale is None else scale
    return s * port + diss - (1.0 - sw.beta) * (sw.gamma * port + diss)


def fund_scale_change(s_prev, s_target, Vb, Vd_star, Mt, budget):
    """Field scale reachable from ``s_prev`` toward ``s_target`` within ``budget``.

    Rescaling the field moves the kinetic error storage
    ``K(s) = (Vb - s*Vd)^T Mt (Vb - s*Vd) / 2`` by ``c(s) = K(s) - K(s_prev)``.
    Returns ``(s, c(s))`` with ``s = s_target`` when ``c(s_target) <= budget``,
    otherwise the point nearest ``s_target`` on the segment whose cost equals
    the budget. ``budget`` must be nonnegative.
    """
    Vb = np.asarray(Vb, dtype=float)
    Vd_star = np.asarray(Vd_star, dtype=float)
    a = 0.5 * float(Vd_star @ Mt @ Vd_star)
    b = -float(Vb @ Mt @ Vd_star)

    def cost(s):
        return (s - s_prev) * (a * (s + s_prev) + b)

    c = cost(s_target)
    if c <= budget or s_target == s_prev:
        return s_target, c
    # c is a convex quadratic with c(s_prev) = 0 <= budget: take the crossing
    # of c(s) = budget between s_prev and s_target.
    c0 = -(a * s_prev * s_prev + b * s_prev) - budget
    if a <= 0.0:
        return s_prev, 0.0
    disc = np.sqrt(max(b * b - 4.0 * a * c0, 0.0))
    lo, hi = sorted((s_prev, s_target))
    roots = [r for r in ((-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)) if lo <= r <= hi]
    if not roots:
        return s_prev, 0.0
    s = min(roots, key=lambda r: abs(r - s_target))
    return s, min(cost(s), budget)


def impedance_tank_step(state: TankState, Vd_star, Ff_prime, Fe, Vb, Kd, params: TankParams, dt):
    """Scale for the velocity field from the impedance tank.

    Returns ``(s_i, eV_prime, new_state, switching)`` where the modified field
    is ``s_i * Vd_star`` and ``eV_prime = Vb - s_i * Vd_star``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    port = float(np.dot(Vd_star, np.asarray(Ff_prime) + np.asarray(Fe)))
    sw = impedance_tank_switching(state.level, port, params)
    s = sw.gamma + sw.alpha * (1.0 - sw.gamma)
    eV = np.asarray(Vb, dtype=float) - s * np.asarray(Vd_star, dtype=float)
    diss = float(eV @ Kd @ eV)
    return s, eV, _advance(state, impedance_tank_rate(port, diss, sw), dt), sw


def integrate_setpoint(gd_prime: Pose, g: Pose, Vd_star_prime, dt):
    """Advance the modified setpoint by the field velocity re-expressed in its own frame."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    ged_inv = gd_prime.inverse() @ g
    Vdb = adjoint_apply(ged_inv, Vd_star_prime)
    if not np.any(Vdb):
        return gd_prime
    return (gd_prime @ exp_se3(Vdb, dt)).normalized()


def gic_wrench(g: Pose, gd: Pose, Vb, Vd_star, Vd_star_dot, op: OperationalTerms,
               gains: ImpedanceGains):
    """Impedance wrench: inertial feedforward, gravity, elastic pull and damping."""
    eV = np.asarray(Vb, dtype=float) - Vd_star
    return (op.Mt @ Vd_star_dot + op.Ct @ Vd_star + op.Gt
            - elastic_wrench(g, gd, gains.stiffness) - gains.Kd @ eV)


modified_gic = gic_wrench


def shaping_rho(g: Pose, gd_prime: Pose, config: ShapingConfig):
    if not config.enabled:
        return 1.0
    excess = max(0.0, error_function(g, gd_prime) - config.psi0)
    return float(np.exp(-(excess / config.sigma) ** 2))


def initial_state(cfg: ControllerConfig, g0: Pose) -> GUFICState:
    """Controller state at start-up; the modified setpoint starts at the robot pose."""
    ft = cfg.force_tank.initial if cfg.force_tank else 0.0
    it = cfg.impedance_tank.initial if cfg.impedance_tank else 0.0
    return GUFICState(TankState.from_level(ft), TankState.from_level(it), PIDState(), g0)


def settle_tanks(state: GUFICState, Vb) -> tuple[TankState, TankState]:
    """Tank levels after charging the elapsed interval, given the twist measured now."""
    h = state.held
    if h is None:
        return state.force_tank, state.impedance_tank
    Vmid = 0.5 * (h.Vb + np.asarray(Vb, dtype=float))
    ft = _advance(state.force_tank, force_tank_rate(float(Vmid @ h.Ff), h.force_switch), h.dt)
    diss = float(h.Kd_eV @ (Vmid - h.Vd_prime))
    it = _advance(state.impedance_tank,
                  impedance_tank_rate(h.port, diss, h.impedance_switch, h.scale), h.dt)
    return ft, it


def gufic_step(state: GUFICState, t, g: Pose, Vb, op: OperationalTerms, Fe_sensed,
               cfg: ControllerConfig, dt, Fe_raw=None):
    """One tank-augmented control update; returns ``(ControlOutput, new_state)``."""
    Vb = np.asarray(Vb, dtype=float)
    ftank, itank = settle_tanks(state, Vb)
    ref = reference_trajectory(cfg.trajectory, t)
    Vd = velocity_field(t, g, cfg.trajectory, cfg.zeta, ref)
    Vd_dot = velocity_field_rate(t, g, Vb, cfg.trajectory, cfg.zeta, ref)
    Fd = force_field(t, g, cfg.force, state.gd_prime)
    Ff, pid = force_pid(Fe_sensed, Fd, state.pid, cfg.pid, dt)
    Ff = shaping_rho(g, state.gd_prime, cfg.shaping) * Ff

    power_f = float(Vb @ Ff)
    sw_f = force_tank_switching(ftank.level, power_f, cfg.force_tank)
    Ff_p = (sw_f.gamma + sw_f.alpha * (1.0 - sw_f.gamma)) * Ff
    Fe_tank = Fe_sensed if (Fe_raw is None or cfg.tank_force_signal == "filtered") else Fe_raw
    port_i = float(Vd @ (Ff_p + Fe_tank))
    sw_i = impedance_tank_switching(itank.level, port_i, cfg.impedance_tank)
    s_gate = sw_i.gamma + sw_i.alpha * (1.0 - sw_i.gamma)
    # Raising the scale is paid from the energy above the lower bound; lowering it
    # (toward the frozen setpoint) may also spend the reserve below it.
    floor = cfg.impedance_tank.lower if s_gate > state.scale_i else 2.0 * T_FLOOR
    budget = max(itank.level - floor, 0.0)
    s, cost = fund_scale_change(state.scale_i, s_gate, Vb, Vd, op.Mt, budget)
    if cost:
        itank = TankState.from_level(itank.level - cost)
    Vd_p = s * Vd
    eV = Vb - Vd_p
    Kd_eV = cfg.impedance.Kd @ eV
    gd_new = integrate_setpoint(state.gd_prime, g, Vd_p, dt)
    Fi_p = gic_wrench(g, gd_new, Vb, Vd_p, s * Vd_dot, op, cfg.impedance)
    torque = op.Jb.T @ (Ff_p + Fi_p)

    caps = (sw_f.gamma * (1.0 - sw_f.beta) * power_f,
            (sw_i.beta - 1.0) * float(eV @ Kd_eV),
            sw_i.gamma * (sw_i.beta - 1.0) * port_i)
    out = ControlOutput(torque, Fd, Ff, Ff_p, Fi_p, Vd, Vd_p, eV, gd_new, s, sw_f, sw_i,
                        ftank.level, itank.level, caps)
    held = HeldInterval(dt, Vb, Ff, sw_f, Vd_p, port_i, Kd_eV, sw_i, s)
    return out, GUFICState(ftank, itank, pid, gd_new, sw_f, sw_i, held, s)


def naive_step(state: GUFICState, t, g: Pose, Vb, op: OperationalTerms, Fe_sensed,
               cfg: ControllerConfig, dt, Fe_raw=None):
    """Impedance term against the raw reference plus the force PID, unguarded."""
    Vb = np.asarray(Vb, dtype=float)
    ref = reference_trajectory(cfg.trajectory, t)
    Vd = velocity_field(t, g, cfg.trajectory, cfg.zeta, ref)
    Vd_dot = velocity_field_rate(t, g, Vb, cfg.trajectory, cfg.zeta, ref)
    Fi = gic_wrench(g, ref.pose, Vb, Vd, Vd_dot, op, cfg.impedance)
    if cfg.kind == "gic":
        Fd = np.zeros(6)
        Ff = np.zeros(6)
        pid = state.pid
    else:
        Fd = force_field(t, g, cfg.force, ref.pose)
        Ff, pid = force_pid(Fe_sensed, Fd, state.pid, cfg.pid, dt)
    torque = op.Jb.T @ (Ff + Fi)
    out = ControlOutput(torque, Fd, Ff, Ff, Fi, Vd, Vd, Vb - Vd, ref.pose)
    return out, replace(state, pid=pid)


def control_step(state, t, g, Vb, op, Fe_sensed, cfg: ControllerConfig, dt, Fe_raw=None):
    step = gufic_step if cfg.kind == "gufic" else naive_step
    return step(state, t, g, Vb, op, Fe_sensed, cfg, dt, Fe_raw)
