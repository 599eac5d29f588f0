# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled rigid-body kernels; same API and array layout as ``_kernels_py``."""
from libc.math cimport sin, cos

import numpy as np

DEF NMAX = 16


cdef struct Tf:
    double R[9]
    double p[3]


cdef inline void tf_from(const double[:, :] T, Tf* out) noexcept nogil:
    cdef int i, j
    for i in range(3):
        for j in range(3):
            out.R[3 * i + j] = T[i, j]
        out.p[i] = T[i, 3]


cdef inline void tf_mul(const Tf* a, const Tf* b, Tf* out) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += a.R[3 * i + k] * b.R[3 * k + j]
            out.R[3 * i + j] = s
        s = a.p[i]
        for k in range(3):
            s += a.R[3 * i + k] * b.p[k]
        out.p[i] = s


cdef inline void tf_inv(const Tf* a, Tf* out) noexcept nogil:
    cdef int i, j
    for i in range(3):
        for j in range(3):
            out.R[3 * i + j] = a.R[3 * j + i]
    for i in range(3):
        out.p[i] = -(out.R[3 * i] * a.p[0] + out.R[3 * i + 1] * a.p[1] + out.R[3 * i + 2] * a.p[2])


cdef inline void exp_screw(const double* a, double th, Tf* out) noexcept nogil:
    cdef double wx = a[3], wy = a[4], wz = a[5]
    cdef double s = sin(th), c = cos(th), c1 = 1.0 - c, ts = th - s
    cdef double W[9]
    cdef double W2[9]
    cdef int i, j, k
    W[0] = 0.0; W[1] = -wz; W[2] = wy
    W[3] = wz; W[4] = 0.0; W[5] = -wx
    W[6] = -wy; W[7] = wx; W[8] = 0.0
    for i in range(3):
        for j in range(3):
            W2[3 * i + j] = W[3 * i] * W[j] + W[3 * i + 1] * W[3 + j] + W[3 * i + 2] * W[6 + j]
    for i in range(9):
        out.R[i] = s * W[i] + c1 * W2[i]
    out.R[0] += 1.0
    out.R[4] += 1.0
    out.R[8] += 1.0
    for i in range(3):
        out.p[i] = th * a[i]
        for k in range(3):
            out.p[i] += (c1 * W[3 * i + k] + ts * W2[3 * i + k]) * a[k]


cdef inline void cross(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void Ad_apply(const Tf* T, const double* V, double* out) noexcept nogil:
    # [R v + p x (R w); R w]
    cdef double Rw[3]
    cdef double pxRw[3]
    cdef int i
    for i in range(3):
        Rw[i] = T.R[3 * i] * V[3] + T.R[3 * i + 1] * V[4] + T.R[3 * i + 2] * V[5]
    cross(T.p, Rw, pxRw)
    for i in range(3):
        out[i] = T.R[3 * i] * V[0] + T.R[3 * i + 1] * V[1] + T.R[3 * i + 2] * V[2] + pxRw[i]
        out[3 + i] = Rw[i]


cdef inline void AdT_apply(const Tf* T, const double* F, double* out) noexcept nogil:
    # Ad(T)^T F = [R^T f; R^T (tau - p x f)]
    cdef double pxf[3]
    cdef double t[3]
    cdef int i
    cross(T.p, F, pxf)
    for i in range(3):
        t[i] = F[3 + i] - pxf[i]
    for i in range(3):
        out[i] = T.R[i] * F[0] + T.R[3 + i] * F[1] + T.R[6 + i] * F[2]
        out[3 + i] = T.R[i] * t[0] + T.R[3 + i] * t[1] + T.R[6 + i] * t[2]


cdef inline void Ad_mat(const Tf* T, double* X) noexcept nogil:
    cdef int i, j, k
    cdef double P[9]
    P[0] = 0.0; P[1] = -T.p[2]; P[2] = T.p[1]
    P[3] = T.p[2]; P[4] = 0.0; P[5] = -T.p[0]
    P[6] = -T.p[1]; P[7] = T.p[0]; P[8] = 0.0
    for i in range(36):
        X[i] = 0.0
    for i in range(3):
        for j in range(3):
            X[6 * i + j] = T.R[3 * i + j]
            X[6 * (i + 3) + j + 3] = T.R[3 * i + j]
            X[6 * i + j + 3] = P[3 * i] * T.R[j] + P[3 * i + 1] * T.R[3 + j] + P[3 * i + 2] * T.R[6 + j]


cdef inline void ad_apply(const double* V, const double* W, double* out) noexcept nogil:
    # [w x Wv + v x Ww; w x Ww]
    cdef double a[3]
    cdef double b[3]
    cross(&V[3], W, a)
    cross(V, &W[3], b)
    out[0] = a[0] + b[0]
    out[1] = a[1] + b[1]
    out[2] = a[2] + b[2]
    cross(&V[3], &W[3], &out[3])


cdef inline void adT_apply(const double* V, const double* F, double* out) noexcept nogil:
    # ad(V)^T F = [-w x f; -v x f - w x tau]
    cdef double a[3]
    cdef double b[3]
    cross(&V[3], F, out)
    out[0] = -out[0]
    out[1] = -out[1]
    out[2] = -out[2]
    cross(V, F, a)
    cross(&V[3], &F[3], b)
    out[3] = -a[0] - b[0]
    out[4] = -a[1] - b[1]
    out[5] = -a[2] - b[2]


cdef inline void mat6_vec(const double* G, const double* v, double* out) noexcept nogil:
    cdef int i, j
    cdef double s
    for i in range(6):
        s = 0.0
        for j in range(6):
            s += G[6 * i + j] * v[j]
        out[i] = s


cdef inline double dot6(const double* a, const double* b) noexcept nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] + a[4] * b[4] + a[5] * b[5]


cdef void rel_transforms(const double[:, :] A, const double[:, :, :] Mrel,
                         const double* q, int n, Tf* rel) noexcept nogil:
    cdef Tf M, E
    cdef int i
    cdef double a[6]
    cdef int k
    for i in range(n):
        tf_from(Mrel[i], &M)
        for k in range(6):
            a[k] = A[i, k]
        exp_screw(a, q[i], &E)
        tf_mul(&M, &E, &rel[i])


cdef void c_mass_matrix(const double[:, :] A, const double[:, :, :] Mrel,
                        const double[:, :, :] G, const double[:] arm,
                        const double* q, int n, double* M) noexcept nogil:
    cdef Tf rel[NMAX]
    cdef Tf inv[NMAX]
    cdef double Ic[NMAX][36]
    cdef double X[36]
    cdef double tmp[36]
    cdef double F[6]
    cdef double F2[6]
    cdef double a[6]
    cdef int i, j, k, r, c
    cdef double s
    rel_transforms(A, Mrel, q, n, rel)
    for i in range(n):
        tf_inv(&rel[i], &inv[i])
        for r in range(6):
            for c in range(6):
                Ic[i][6 * r + c] = G[i, r, c]
    for i in range(n - 1, 0, -1):
        Ad_mat(&inv[i], X)
        # tmp = Ic[i] X
        for r in range(6):
            for c in range(6):
                s = 0.0
                for k in range(6):
                    s += Ic[i][6 * r + k] * X[6 * k + c]
                tmp[6 * r + c] = s
        # Ic[i-1] += X^T tmp
        for r in range(6):
            for c in range(6):
                s = 0.0
                for k in range(6):
                    s += X[6 * k + r] * tmp[6 * k + c]
                Ic[i - 1][6 * r + c] += s
    for i in range(n):
        for k in range(6):
            a[k] = A[i, k]
        mat6_vec(Ic[i], a, F)
        M[n * i + i] = dot6(a, F) + arm[i]
        for j in range(i - 1, -1, -1):
            AdT_apply(&inv[j + 1], F, F2)
            for k in range(6):
                F[k] = F2[k]
                a[k] = A[j, k]
            s = dot6(a, F)
            M[n * i + j] = s
            M[n * j + i] = s


cdef void c_rnea(const double[:, :] A, const double[:, :, :] Mrel,
                 const double[:, :, :] G, const double[:] arm, const double[:] grav,
                 const double* q, const double* qd, const double* qdd, int n,
                 double* tau) noexcept nogil:
    cdef Tf rel[NMAX]
    cdef Tf inv[NMAX]
    cdef double V[NMAX][6]
    cdef double Vd[NMAX][6]
    cdef double prevV[6]
    cdef double prevVd[6]
    cdef double t1[6]
    cdef double t2[6]
    cdef double a[6]
    cdef double Gm[36]
    cdef double F[6]
    cdef double F2[6]
    cdef int i, k, r, c
    rel_transforms(A, Mrel, q, n, rel)
    for k in range(6):
        prevV[k] = 0.0
        prevVd[k] = 0.0
    prevVd[0] = -grav[0]
    prevVd[1] = -grav[1]
    prevVd[2] = -grav[2]
    for i in range(n):
        tf_inv(&rel[i], &inv[i])
        for k in range(6):
            a[k] = A[i, k]
        Ad_apply(&inv[i], prevV, V[i])
        for k in range(6):
            V[i][k] += a[k] * qd[i]
        Ad_apply(&inv[i], prevVd, Vd[i])
        ad_apply(V[i], a, t1)
        for k in range(6):
            Vd[i][k] += t1[k] * qd[i] + a[k] * qdd[i]
            prevV[k] = V[i][k]
            prevVd[k] = Vd[i][k]
    for k in range(6):
        F[k] = 0.0
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            AdT_apply(&inv[i + 1], F, F2)
            for k in range(6):
                F[k] = F2[k]
        for r in range(6):
            for c in range(6):
                Gm[6 * r + c] = G[i, r, c]
        mat6_vec(Gm, Vd[i], t1)
        mat6_vec(Gm, V[i], t2)
        adT_apply(V[i], t2, F2)
        for k in range(6):
            F[k] += t1[k] - F2[k]
            a[k] = A[i, k]
        tau[i] = dot6(a, F) + arm[i] * qdd[i]


cdef void c_fk_jac(const double[:, :] A, const double[:, :, :] Mrel, const double[:, :] Mee,
                   const double* q, int n, Tf* Tee, double* J) noexcept nogil:
    # J is 6 x n row-major
    cdef Tf rel[NMAX]
    cdef Tf T, tmp, Me, Xt, inv
    cdef double a[6]
    cdef double col[6]
    cdef int i, k
    rel_transforms(A, Mrel, q, n, rel)
    for k in range(9):
        T.R[k] = 0.0
    T.R[0] = 1.0; T.R[4] = 1.0; T.R[8] = 1.0
    T.p[0] = 0.0; T.p[1] = 0.0; T.p[2] = 0.0
    for i in range(n):
        tf_mul(&T, &rel[i], &tmp)
        T = tmp
    tf_from(Mee, &Me)
    tf_mul(&T, &Me, Tee)
    # Xt = pose of link frame i seen from the end-effector
    tf_inv(&Me, &Xt)
    for i in range(n - 1, -1, -1):
        for k in range(6):
            a[k] = A[i, k]
        Ad_apply(&Xt, a, col)
        for k in range(6):
            J[n * k + i] = col[k]
        tf_inv(&rel[i], &inv)
        tf_mul(&Xt, &inv, &tmp)
        Xt = tmp


cdef void c_jacobian_rate(const double* J, const double* qd, int n, double* Jd) noexcept nogil:
    cdef double tail[6]
    cdef double col[6]
    cdef double out[6]
    cdef int i, k
    for k in range(6):
        tail[k] = 0.0
    for i in range(n - 1, -1, -1):
        for k in range(6):
            col[k] = J[n * k + i]
        ad_apply(col, tail, out)
        for k in range(6):
            Jd[n * k + i] = out[k]
            tail[k] += col[k] * qd[i]


def _as(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def forward_kinematics(A, Mrel, Mee, q):
    cdef const double[::1] qv = _as(q)
    cdef int n = qv.shape[0]
    cdef Tf T
    cdef double[::1] J = np.empty(6 * n)
    c_fk_jac(_as(A), _as(Mrel), _as(Mee), &qv[0], n, &T, &J[0])
    out = np.eye(4)
    cdef double[:, ::1] o = out
    cdef int i, j
    for i in range(3):
        for j in range(3):
            o[i, j] = T.R[3 * i + j]
        o[i, 3] = T.p[i]
    return out


def body_jacobian(A, Mrel, Mee, q):
    cdef const double[::1] qv = _as(q)
    cdef int n = qv.shape[0]
    cdef Tf T
    out = np.empty((6, n))
    cdef double[:, ::1] J = out
    c_fk_jac(_as(A), _as(Mrel), _as(Mee), &qv[0], n, &T, &J[0, 0])
    return out


def jacobian_rate(J, qd):
    cdef const double[:, ::1] Jv = _as(J)
    cdef const double[::1] qdv = _as(qd)
    cdef int n = qdv.shape[0]
    out = np.empty((6, n))
    cdef double[:, ::1] o = out
    c_jacobian_rate(&Jv[0, 0], &qdv[0], n, &o[0, 0])
    return out


def mass_matrix(A, Mrel, G, arm, q):
    cdef const double[::1] qv = _as(q)
    cdef int n = qv.shape[0]
    out = np.empty((n, n))
    cdef double[:, ::1] M = out
    c_mass_matrix(_as(A), _as(Mrel), _as(G), _as(arm), &qv[0], n, &M[0, 0])
    return out


def rnea(A, Mrel, G, arm, grav, q, qd, qdd):
    cdef const double[::1] qv = _as(q)
    cdef const double[::1] qdv = _as(qd)
    cdef const double[::1] qddv = _as(qdd)
    cdef int n = qv.shape[0]
    out = np.empty(n)
    cdef double[::1] tau = out
    c_rnea(_as(A), _as(Mrel), _as(G), _as(arm), _as(grav), &qv[0], &qdv[0], &qddv[0], n, &tau[0])
    return out


cdef void c_coriolis(const double[:, :] A, const double[:, :, :] Mrel,
                     const double[:, :, :] G, const double[:] arm,
                     const double* q, const double* qd, int n, double h,
                     double* C) noexcept nogil:
    cdef double D[NMAX * NMAX * NMAX]
    cdef double Mp[NMAX * NMAX]
    cdef double Mm[NMAX * NMAX]
    cdef double qq[NMAX]
    cdef int i, j, k, m
    cdef double s
    for k in range(n):
        for m in range(n):
            qq[m] = q[m]
        qq[k] = q[k] + h
        c_mass_matrix(A, Mrel, G, arm, qq, n, Mp)
        qq[k] = q[k] - h
        c_mass_matrix(A, Mrel, G, arm, qq, n, Mm)
        for i in range(n * n):
            D[k * n * n + i] = (Mp[i] - Mm[i]) / (2.0 * h)
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                s += (D[k * n * n + i * n + j] + D[j * n * n + i * n + k]
                      - D[i * n * n + j * n + k]) * qd[k]
            C[i * n + j] = 0.5 * s


def coriolis_matrix(A, Mrel, G, arm, q, qd, double h=1e-6):
    cdef const double[::1] qv = _as(q)
    cdef const double[::1] qdv = _as(qd)
    cdef int n = qv.shape[0]
    out = np.empty((n, n))
    cdef double[:, ::1] C = out
    c_coriolis(_as(A), _as(Mrel), _as(G), _as(arm), &qv[0], &qdv[0], n, h, &C[0, 0])
    return out


def dynamics(A, Mrel, Mee, G, arm, grav, q, qd, double h=1e-6):
    """All state-dependent terms at once: (T_ee, Jb, Jbdot, M, C, g)."""
    cdef const double[:, ::1] Av = _as(A)
    cdef const double[:, :, ::1] Mv = _as(Mrel)
    cdef const double[:, ::1] Me = _as(Mee)
    cdef const double[:, :, ::1] Gv = _as(G)
    cdef const double[::1] armv = _as(arm)
    cdef const double[::1] gv = _as(grav)
    cdef const double[::1] qv = _as(q)
    cdef const double[::1] qdv = _as(qd)
    cdef int n = qv.shape[0]
    cdef Tf T
    cdef double zeros[NMAX]
    cdef int i, j
    for i in range(n):
        zeros[i] = 0.0
    T_out = np.eye(4)
    J_out = np.empty((6, n))
    Jd_out = np.empty((6, n))
    M_out = np.empty((n, n))
    C_out = np.empty((n, n))
    g_out = np.empty(n)
    cdef double[:, ::1] To = T_out
    cdef double[:, ::1] Jo = J_out
    cdef double[:, ::1] Jdo = Jd_out
    cdef double[:, ::1] Mo = M_out
    cdef double[:, ::1] Co = C_out
    cdef double[::1] go = g_out
    with nogil:
        c_fk_jac(Av, Mv, Me, &qv[0], n, &T, &Jo[0, 0])
        c_jacobian_rate(&Jo[0, 0], &qdv[0], n, &Jdo[0, 0])
        c_mass_matrix(Av, Mv, Gv, armv, &qv[0], n, &Mo[0, 0])
        c_coriolis(Av, Mv, Gv, armv, &qv[0], &qdv[0], n, h, &Co[0, 0])
        c_rnea(Av, Mv, Gv, armv, gv, &qv[0], zeros, zeros, n, &go[0])
    for i in range(3):
        for j in range(3):
            To[i, j] = T.R[3 * i + j]
        To[i, 3] = T.p[i]
    return T_out, J_out, Jd_out, M_out, C_out, g_out
