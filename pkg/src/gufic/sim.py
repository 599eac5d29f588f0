"""Closed-loop simulation: arm dynamics, penalty contact, sensor, controller, log."""
from __future__ import annotations

import logging

import numpy as np

from .config import ScenarioConfig
from .control import control_step, initial_state
from .energy_audit import cumulative_trapezoid, kinetic_energy
from .environment import FTSensorState, contact_wrench, ft_filter_step
from .errors import NearSingular
from .fields import reference_trajectory
from .geometry import Pose, error_function, potential_energy
from .robot_model import inverse_kinematics, operational_from, snapshot
from .simlog import COLUMNS, INDEX, SimLog

log = logging.getLogger(__name__)


def start_pose(cfg: ScenarioConfig) -> Pose:
    """Reference pose at t = 0, backed off along the tool axis by the start offset."""
    g = reference_trajectory(cfg.controller.trajectory, 0.0).pose
    return g @ Pose(np.eye(3), [0.0, 0.0, -cfg.start_offset])


def initial_configuration(cfg: ScenarioConfig):
    return inverse_kinematics(cfg.model, start_pose(cfg), cfg.ik_seed)


def _flat(pose: Pose):
    return np.concatenate([pose.rotation.ravel(), pose.position])


def simulate(cfg: ScenarioConfig, q0=None, qd0=None) -> SimLog:
    """Integrate the closed loop for ``cfg.duration`` seconds at ``cfg.timestep``.

    Semi-implicit Euler on the joint state; controller, sensor and tanks run
    at the same rate. Row k holds the state at ``t = k*dt`` with the control
    computed from it and tank levels before that step's update. ``q0`` and
    ``qd0`` override the initial joint state (default: inverse kinematics of
    the start pose, at rest).
    """
    dt = cfg.timestep
    n_steps = cfg.steps
    model = cfg.model
    ctrl = cfg.controller
    K = ctrl.impedance.stiffness

    q = initial_configuration(cfg) if q0 is None else np.array(q0, dtype=float)
    qd = np.zeros(6) if qd0 is None else np.array(qd0, dtype=float)
    sensor = FTSensorState(cfg.sensor_cutoff, dt)
    state = initial_state(ctrl, snapshot(model, q, qd).pose)
    data = np.empty((n_steps, len(COLUMNS)))
    ix = INDEX
    log.info("simulating %s (%s) for %d steps", cfg.name, ctrl.kind, n_steps)

    for k in range(n_steps):
        t = k * dt
        snap = snapshot(model, q, qd)
        try:
            op = operational_from(snap.Jb, snap.Jbdot, snap.joint)
        except NearSingular as exc:
            raise NearSingular(exc.sigma_min, k) from None
        g = snap.pose
        Vb = snap.Jb @ qd
        Fe = contact_wrench(cfg.surface, g, Vb, cfg.contact)
        Fe_bar = ft_filter_step(sensor, Fe)
        out, state = control_step(state, t, g, Vb, op, Fe_bar, ctrl, dt, Fe_raw=Fe)
        ref = reference_trajectory(ctrl.trajectory, t).pose

        row = data[k]
        row[0] = t
        row[ix["q0"]:ix["q0"] + 6] = q
        row[ix["qd0"]:ix["qd0"] + 6] = qd
        row[ix["g_R00"]:ix["g_R00"] + 12] = _flat(g)
        row[ix["gbar_R00"]:ix["gbar_R00"] + 12] = _flat(ref)
        row[ix["gdp_R00"]:ix["gdp_R00"] + 12] = _flat(out.gd_used)
        for name, vec in (("Vb", Vb), ("Vds", out.Vd_star), ("Vdsp", out.Vd_star_prime),
                          ("Fe", Fe), ("Febar", Fe_bar), ("Fd", out.Fd), ("Ff", out.Ff),
                          ("Ffp", out.Ff_prime), ("Fip", out.Fi_prime), ("tau", out.torque)):
            row[ix[name + "0"]:ix[name + "0"] + 6] = vec
        sf, si = out.force_switch, out.impedance_switch
        row[ix["gamma_f"]:ix["gamma_f"] + 7] = (sf.gamma, sf.beta, sf.alpha,
                                                si.gamma, si.beta, si.alpha, out.scale_i)
        kin = kinetic_energy(out.eV_prime, op.Mt)
        pot = potential_energy(g, out.gd_used, K)
        row[ix["T_f"]] = out.tank_f
        row[ix["T_i"]] = out.tank_i
        row[ix["psi"]] = error_function(g, out.gd_used)
        row[ix["kinetic"]] = kin
        row[ix["potential"]] = pot
        row[ix["storage"]] = kin + pot + out.tank_f + out.tank_i
        row[ix["port_power"]] = float(Vb @ Fe)
        row[ix["cap_f"]:ix["cap_f"] + 3] = out.caps

        qdd = np.linalg.solve(snap.joint.M, out.torque + snap.Jb.T @ Fe
                              - snap.joint.C @ qd - snap.joint.G)
        qd = qd + qdd * dt
        q = q + qd * dt
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
            raise FloatingPointError(f"state diverged at step {k}")

    if n_steps:
        data[:, ix["port_energy"]] = cumulative_trapezoid(data[:, 0], data[:, ix["port_power"]])
    return SimLog(data, COLUMNS, meta={"name": cfg.name, "controller": ctrl.kind})
