import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gufic import _kernels_py, kernels
from gufic.errors import ConfigError, NearSingular, NoConvergence
from gufic.geometry import Pose, error_function, exp_se3, rot_z, vee6
from gufic.robot_model import (JointState, RobotDescription, body_jacobian, default_model_path,
                               forward_dynamics, forward_kinematics, inverse_dynamics,
                               inverse_kinematics, jacobian_rate, joint_space_terms, load_model,
                               operational_from, operational_terms, snapshot)

MODEL = load_model(default_model_path())
joint_angles = st.lists(st.floats(-2.5, 2.5), min_size=6, max_size=6).map(np.array)


def nonsingular(q, model=MODEL):
    return np.linalg.svd(body_jacobian(model, q), compute_uv=False)[-1] > 1e-2


def test_home_pose_matches_description():
    g = forward_kinematics(MODEL, np.zeros(6))
    assert np.allclose(g.matrix, MODEL.ee_home.matrix, atol=1e-15)


def test_single_revolute_quarter_turn():
    """Only the first joint moves: the tool frame turns pi/2 about that joint's axis."""
    q = np.array([np.pi / 2, 0, 0, 0, 0, 0])
    g0 = forward_kinematics(MODEL, np.zeros(6))
    g = forward_kinematics(MODEL, q)
    a, o = MODEL.axes[0], MODEL.origins[0]
    assert np.allclose(a, [0, 0, 1])
    R = rot_z(np.pi / 2)
    assert np.allclose(g.rotation, R @ g0.rotation, atol=1e-12)
    assert np.allclose(g.position, R @ (g0.position - o) + o, atol=1e-12)


def test_forward_kinematics_composes_joint_by_joint():
    rng = np.random.default_rng(0)
    q = rng.uniform(-2, 2, 6)
    T = np.eye(4)
    for i in range(6):
        xi = np.concatenate([-np.cross(MODEL.axes[i], MODEL.origins[i]), MODEL.axes[i]])
        T = T @ exp_se3(xi, q[i]).matrix
    T = T @ MODEL.ee_home.matrix
    assert np.allclose(forward_kinematics(MODEL, q).matrix, T, atol=1e-12)


@settings(max_examples=30)
@given(joint_angles)
def test_body_jacobian_columns_by_finite_difference(q):
    h = 1e-6
    J = body_jacobian(MODEL, q)
    g = forward_kinematics(MODEL, q)
    for i in range(6):
        dq = np.zeros(6)
        dq[i] = h
        dg = (forward_kinematics(MODEL, q + dq).matrix - forward_kinematics(MODEL, q - dq).matrix) / (2 * h)
        Xi = g.inverse().matrix @ dg
        Xi[:3, :3] = 0.5 * (Xi[:3, :3] - Xi[:3, :3].T)
        col = vee6(Xi)
        assert np.linalg.norm(J[:, i] - col) <= 1e-5 * max(np.linalg.norm(col), 1.0)


def test_body_jacobian_gives_body_velocity_of_joint_motion():
    q = np.array([0.1, 0.4, 1.0, -0.3, 0.9, 0.2])
    h = 1e-6
    J = body_jacobian(MODEL, q)
    for i in range(6):
        e = np.zeros(6)
        e[i] = 1.0
        g = forward_kinematics(MODEL, q)
        g1 = forward_kinematics(MODEL, q + h * e)
        V = vee6(_log_se3_small(g.inverse() @ g1)) / h
        assert np.allclose(J @ e, V, atol=1e-5)


def _log_se3_small(g):
    X = g.matrix - np.eye(4)
    X[:3, :3] = 0.5 * (X[:3, :3] - X[:3, :3].T)
    X[3] = 0.0
    return X


@settings(max_examples=30)
@given(joint_angles, st.lists(st.floats(-2, 2), min_size=6, max_size=6).map(np.array))
def test_jacobian_rate_by_finite_difference(q, qd):
    h = 1e-6
    Jd = jacobian_rate(MODEL, q, qd)
    fd = (body_jacobian(MODEL, q + qd * h) - body_jacobian(MODEL, q - qd * h)) / (2 * h)
    assert np.linalg.norm(Jd - fd) <= 1e-4 * max(np.linalg.norm(fd), 1e-3)
    assert np.allclose(jacobian_rate(MODEL, q, 2 * qd), 2 * Jd, atol=1e-12)


@settings(max_examples=30)
@given(joint_angles, st.lists(st.floats(-2, 2), min_size=6, max_size=6).map(np.array))
def test_coriolis_matches_newton_euler(q, qd):
    terms = joint_space_terms(MODEL, q, qd)
    c_rnea = inverse_dynamics(MODEL, q, qd, np.zeros(6)) - terms.G
    Cqd = terms.C @ qd
    assert np.linalg.norm(Cqd - c_rnea) <= 1e-6 * max(np.linalg.norm(c_rnea), 1e-3)


@settings(max_examples=30)
@given(joint_angles, st.lists(st.floats(-3, 3), min_size=6, max_size=6).map(np.array))
def test_mass_matrix_matches_newton_euler_columns(q, qdd):
    M = joint_space_terms(MODEL, q, np.zeros(6)).M
    G = inverse_dynamics(MODEL, q, np.zeros(6), np.zeros(6))
    tau = inverse_dynamics(MODEL, q, np.zeros(6), qdd)
    assert np.allclose(M @ qdd, tau - G, atol=1e-9 * max(1.0, np.abs(tau).max()))


def test_mdot_minus_2c_is_skew():
    rng = np.random.default_rng(4)
    h = 1e-6
    for _ in range(20):
        q, qd = rng.uniform(-2, 2, 6), rng.uniform(-1.5, 1.5, 6)
        C = joint_space_terms(MODEL, q, qd).C
        Mdot = (joint_space_terms(MODEL, q + h * qd, qd).M - joint_space_terms(MODEL, q - h * qd, qd).M) / (2 * h)
        N = Mdot - 2 * C
        assert np.linalg.norm(N + N.T) <= 1e-5 * max(np.linalg.norm(Mdot), 1.0)


def test_operational_inertia_spd_and_equivalent_to_joint_space():
    rng = np.random.default_rng(6)
    seen = 0
    while seen < 100:
        q = rng.uniform(-2.5, 2.5, 6)
        if not nonsingular(q):
            continue
        seen += 1
        qd, qdd = rng.uniform(-1, 1, 6), rng.uniform(-2, 2, 6)
        op = operational_terms(MODEL, q, qd)
        assert np.allclose(op.Mt, op.Mt.T, atol=1e-12)
        assert np.linalg.eigvalsh(op.Mt).min() > 0
        V = op.Jb @ qd
        Vdot = op.Jbdot @ qd + op.Jb @ qdd
        lhs = op.Jb.T @ (op.Mt @ Vdot + op.Ct @ V + op.Gt)
        terms = joint_space_terms(MODEL, q, qd)
        rhs = terms.M @ qdd + terms.C @ qd + terms.G
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(np.linalg.norm(rhs), 1.0)


def test_operational_terms_reject_singular_jacobian():
    with pytest.raises(NearSingular):
        operational_from(np.zeros((6, 6)), np.zeros((6, 6)), joint_space_terms(MODEL, np.zeros(6), np.zeros(6)))


def _rk4_free_motion(model, q, qd, dt, n):
    def f(x):
        s = JointState(x[:6], x[6:])
        return np.concatenate([x[6:], forward_dynamics(model, s, np.zeros(6), np.zeros(6))])
    x = np.concatenate([q, qd])
    for _ in range(n):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x[:6], x[6:]


def test_bare_dynamics_conserve_energy():
    model = MODEL.without_gravity()
    rng = np.random.default_rng(1)
    q, qd = rng.uniform(-1, 1, 6), rng.uniform(-1, 1, 6)

    def energy(q, qd):
        return 0.5 * qd @ joint_space_terms(model, q, qd).M @ qd

    E0 = energy(q, qd)
    q1, qd1 = _rk4_free_motion(model, q, qd, 1e-3, 1000)
    assert abs(energy(q1, qd1) - E0) <= 1e-5 * E0


def test_forward_dynamics_is_affine_in_torque():
    rng = np.random.default_rng(8)
    s = JointState(rng.uniform(-1, 1, 6), rng.uniform(-1, 1, 6))
    T1, T2, Fe = rng.normal(size=6), rng.normal(size=6), np.zeros(6)
    fd = lambda T: forward_dynamics(MODEL, s, T, Fe)  # noqa: E731
    assert np.allclose(fd(T1 + T2) - fd(T1) - fd(T2) + fd(np.zeros(6)), 0.0, atol=1e-10)


def test_snapshot_is_consistent_with_separate_calls():
    q, qd = np.array([0.2, 0.5, 1.1, 0.1, 0.8, -0.4]), np.array([0.3, -0.2, 0.1, 0.5, -0.6, 0.2])
    snap = snapshot(MODEL, q, qd)
    assert np.allclose(snap.pose.matrix, forward_kinematics(MODEL, q).matrix, atol=1e-14)
    assert np.allclose(snap.Jb, body_jacobian(MODEL, q), atol=1e-14)
    assert np.allclose(snap.joint.M, joint_space_terms(MODEL, q, qd).M, atol=1e-12)


def test_inverse_kinematics_roundtrip():
    rng = np.random.default_rng(12)
    done = 0
    while done < 20:
        q_star = rng.uniform(-1.5, 1.5, 6)
        if not nonsingular(q_star, MODEL) or np.linalg.svd(body_jacobian(MODEL, q_star), compute_uv=False)[-1] < 0.05:
            continue
        done += 1
        target = forward_kinematics(MODEL, q_star)
        q = inverse_kinematics(MODEL, target, q_star + rng.uniform(-0.1, 0.1, 6))
        assert error_function(forward_kinematics(MODEL, q), target) <= 1e-8


def test_inverse_kinematics_unreachable_raises():
    with pytest.raises(NoConvergence):
        inverse_kinematics(MODEL, Pose(np.eye(3), [5.0, 0.0, 0.0]), np.zeros(6), max_iter=50)


def test_base_placement_moves_the_tool():
    h = Pose(rot_z(0.7), [0.3, -0.2, 0.1])
    moved = MODEL.with_base(h)
    q = np.array([0.2, 0.5, 1.1, 0.1, 0.8, -0.4])
    assert np.allclose(forward_kinematics(moved, q).matrix, (h @ forward_kinematics(MODEL, q)).matrix, atol=1e-13)


def test_model_validation():
    with pytest.raises(ConfigError):
        RobotDescription(MODEL.axes, MODEL.origins, -MODEL.masses, MODEL.coms, MODEL.inertias, MODEL.ee_home)


def test_model_file_schema_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"joints": [], "links": [], "end_effector": {"position": [0,0,0], "rotation": [[1,0,0],[0,1,0],[0,0,1]]}}')
    with pytest.raises(ConfigError):
        load_model(p)


@pytest.mark.skipif(kernels.BACKEND_NAME != "cython", reason="compiled kernel not built")
def test_compiled_kernel_agrees_with_python_reference():
    from gufic import _ckernels
    rng = np.random.default_rng(13)
    m = MODEL
    for _ in range(20):
        q, qd, qdd = rng.uniform(-2, 2, 6), rng.uniform(-2, 2, 6), rng.uniform(-2, 2, 6)
        args = (m.A, m.Mrel, m.Mee)
        assert np.allclose(_ckernels.forward_kinematics(*args, q), _kernels_py.forward_kinematics(*args, q), atol=1e-13)
        J = _kernels_py.body_jacobian(*args, q)
        assert np.allclose(_ckernels.body_jacobian(*args, q), J, atol=1e-13)
        assert np.allclose(_ckernels.jacobian_rate(J, qd), _kernels_py.jacobian_rate(J, qd), atol=1e-12)
        dyn = (m.A, m.Mrel, m.G, m.armature)
        assert np.allclose(_ckernels.mass_matrix(*dyn, q), _kernels_py.mass_matrix(*dyn, q), atol=1e-12)
        assert np.allclose(_ckernels.rnea(*dyn, m.gravity_base, q, qd, qdd),
                           _kernels_py.rnea(*dyn, m.gravity_base, q, qd, qdd), atol=1e-10)
        assert np.allclose(_ckernels.coriolis_matrix(*dyn, q, qd), _kernels_py.coriolis_matrix(*dyn, q, qd), atol=1e-7)
        for a, b in zip(_ckernels.dynamics(m.A, m.Mrel, m.Mee, m.G, m.armature, m.gravity_base, q, qd),
                        _kernels_py.dynamics(m.A, m.Mrel, m.Mee, m.G, m.armature, m.gravity_base, q, qd)):
            assert np.allclose(a, b, atol=1e-7)
