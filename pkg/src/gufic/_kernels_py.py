"""Pure-NumPy rigid-body kernels.

Reference implementation of the hot loops; ``_ckernels`` mirrors this API
function by function. Arrays describing the arm (all float64):

``A``      (n, 6)     joint screw axes expressed in their own link frame
``Mrel``   (n, 4, 4)  home pose of link i in link i-1 (link -1 is the base)
``Mee``    (4, 4)     home pose of the end-effector in the last link frame
``G``      (n, 6, 6)  spatial inertia of each link in its link frame
``arm``    (n,)       reflected rotor inertia added on the joint diagonal
``grav``   (3,)       gravity vector in base coordinates
"""
import numpy as np


def _hat(w):
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def _exp_screw(a, theta):
    """Homogeneous ``expm(hat6(a) * theta)`` for a unit-rotation screw axis."""
    w = a[3:]
    v = a[:3]
    W = _hat(w)
    W2 = W @ W
    s, c = np.sin(theta), np.cos(theta)
    T = np.eye(4)
    T[:3, :3] = np.eye(3) + s * W + (1.0 - c) * W2
    T[:3, 3] = (theta * np.eye(3) + (1.0 - c) * W + (theta - s) * W2) @ v
    return T


def _inv(T):
    Ti = np.eye(4)
    Rt = T[:3, :3].T
    Ti[:3, :3] = Rt
    Ti[:3, 3] = -Rt @ T[:3, 3]
    return Ti


def _Ad(T):
    R = T[:3, :3]
    X = np.zeros((6, 6))
    X[:3, :3] = R
    X[3:, 3:] = R
    X[:3, 3:] = _hat(T[:3, 3]) @ R
    return X


def _ad(V):
    m = np.zeros((6, 6))
    W = _hat(V[3:])
    m[:3, :3] = W
    m[3:, 3:] = W
    m[:3, 3:] = _hat(V[:3])
    return m


def relative_transforms(A, Mrel, q):
    """``T[i]`` = pose of link i in link i-1 at configuration ``q``."""
    return [Mrel[i] @ _exp_screw(A[i], q[i]) for i in range(len(q))]


def forward_kinematics(A, Mrel, Mee, q):
    T = np.eye(4)
    for Ti in relative_transforms(A, Mrel, q):
        T = T @ Ti
    return T @ Mee


def link_poses(A, Mrel, q):
    out = []
    T = np.eye(4)
    for Ti in relative_transforms(A, Mrel, q):
        T = T @ Ti
        out.append(T)
    return out


def body_jacobian(A, Mrel, Mee, q):
    n = len(q)
    rel = relative_transforms(A, Mrel, q)
    J = np.zeros((6, n))
    X = _Ad(_inv(Mee))
    for i in range(n - 1, -1, -1):
        J[:, i] = X @ A[i]
        X = X @ _Ad(_inv(rel[i]))
    return J


def jacobian_rate(J, qd):
    n = J.shape[1]
    Jd = np.zeros_like(J)
    tail = np.zeros(6)
    for i in range(n - 1, -1, -1):
        Jd[:, i] = _ad(J[:, i]) @ tail
        tail = tail + J[:, i] * qd[i]
    return Jd


def mass_matrix(A, Mrel, G, arm, q):
    n = len(q)
    rel = relative_transforms(A, Mrel, q)
    X = [_Ad(_inv(T)) for T in rel]  # twist in link i-1 -> link i
    Ic = [G[i].copy() for i in range(n)]
    for i in range(n - 1, 0, -1):
        Ic[i - 1] += X[i].T @ Ic[i] @ X[i]
    M = np.zeros((n, n))
    for i in range(n):
        F = Ic[i] @ A[i]
        M[i, i] = A[i] @ F + arm[i]
        for j in range(i - 1, -1, -1):
            F = X[j + 1].T @ F
            M[i, j] = M[j, i] = A[j] @ F
    return M


def rnea(A, Mrel, G, arm, grav, q, qd, qdd):
    n = len(q)
    rel = relative_transforms(A, Mrel, q)
    X = [_Ad(_inv(T)) for T in rel]
    V = np.zeros(6)
    Vd = np.concatenate([-np.asarray(grav, dtype=float), np.zeros(3)])
    Vs, Vds = [], []
    for i in range(n):
        V = X[i] @ V + A[i] * qd[i]
        Vd = X[i] @ Vd + _ad(V) @ A[i] * qd[i] + A[i] * qdd[i]
        Vs.append(V)
        Vds.append(Vd)
    tau = np.zeros(n)
    F = np.zeros(6)
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            F = X[i + 1].T @ F
        F = F + G[i] @ Vds[i] - _ad(Vs[i]).T @ (G[i] @ Vs[i])
        tau[i] = A[i] @ F + arm[i] * qdd[i]
    return tau


def coriolis_matrix(A, Mrel, G, arm, q, qd, h=1e-6):
    """Christoffel-symbol Coriolis matrix from central differences of M(q)."""
    n = len(q)
    D = np.empty((n, n, n))
    for k in range(n):
        dq = np.zeros(n)
        dq[k] = h
        D[k] = (mass_matrix(A, Mrel, G, arm, q + dq) - mass_matrix(A, Mrel, G, arm, q - dq)) / (2.0 * h)
    t1 = np.einsum("kij,k->ij", D, qd)
    t2 = np.einsum("jik,k->ij", D, qd)
    t3 = np.einsum("ijk,k->ij", D, qd)
    return 0.5 * (t1 + t2 - t3)


def dynamics(A, Mrel, Mee, G, arm, grav, q, qd, h=1e-6):
    """All state-dependent terms at once: (T_ee, Jb, Jbdot, M, C, g)."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    T = forward_kinematics(A, Mrel, Mee, q)
    J = body_jacobian(A, Mrel, Mee, q)
    Jd = jacobian_rate(J, qd)
    M = mass_matrix(A, Mrel, G, arm, q)
    C = coriolis_matrix(A, Mrel, G, arm, q, qd, h)
    g = rnea(A, Mrel, G, arm, grav, q, np.zeros_like(q), np.zeros_like(q))
    return T, J, Jd, M, C, g
