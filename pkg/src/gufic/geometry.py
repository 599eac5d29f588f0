"""Rigid-body transforms on SE(3) and the error metrics built on them.

Twists are stacked ``[v; w]`` (linear first) and wrenches ``[f; tau]``; every
6x6 block matrix in the package follows that order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSkew

_SKEW_TOL = 1e-8
_ORTHO_TOL = 1e-9
_SMALL_ANGLE = 1e-8


def hat3(w):
    """Skew matrix such that ``hat3(w) @ u == cross(w, u)``."""
    return np.array([[0.0, -w[2], w[1]],
                     [w[2], 0.0, -w[0]],
                     [-w[1], w[0], 0.0]])


def vee3(S):
    """Inverse of :func:`hat3`. The input is symmetrized before extraction."""
    S = np.asarray(S, dtype=float)
    if np.linalg.norm(S + S.T) > _SKEW_TOL:
        raise NotSkew(f"matrix is not skew-symmetric (|S + S^T| = {np.linalg.norm(S + S.T):.3e})")
    A = 0.5 * (S - S.T)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def hat6(xi):
    """4x4 se(3) matrix of a twist ``[v; w]``."""
    X = np.zeros((4, 4))
    X[:3, :3] = hat3(xi[3:])
    X[:3, 3] = xi[:3]
    return X


def vee6(X):
    X = np.asarray(X, dtype=float)
    return np.concatenate([X[:3, 3], vee3(X[:3, :3])])


def reorthonormalize(R):
    """Nearest rotation matrix (polar decomposition via SVD)."""
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] = -U[:, -1]
        Q = U @ Vt
    return Q


def orthonormality_error(R):
    return float(np.linalg.norm(R.T @ R - np.eye(3)))


@dataclass(frozen=True)
class Pose:
    """Element of SE(3) stored as rotation matrix and position."""

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        p = np.array(self.position, dtype=float).reshape(3)
        R.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "position", p)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T):
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3], T[:3, 3])

    @property
    def matrix(self):
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.position
        return T

    def inverse(self):
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.position)

    def __matmul__(self, other):
        if isinstance(other, Pose):
            return Pose(self.rotation @ other.rotation,
                        self.rotation @ other.position + self.position)
        return NotImplemented

    def is_valid(self, tol=_ORTHO_TOL):
        R = self.rotation
        return (orthonormality_error(R) <= tol and abs(np.linalg.det(R) - 1.0) <= tol
                and bool(np.all(np.isfinite(self.position))))

    def normalized(self):
        """Copy with the rotation projected back onto SO(3) if it drifted."""
        if orthonormality_error(self.rotation) <= _ORTHO_TOL:
            return self
        return Pose(reorthonormalize(self.rotation), self.position)


@dataclass(frozen=True)
class StiffnessGains:
    """Translational (``Kp``) and rotational (``KR``) stiffness, both SPD."""

    Kp: np.ndarray
    KR: np.ndarray

    def __post_init__(self):
        for name in ("Kp", "KR"):
            K = np.array(getattr(self, name), dtype=float)
            if K.ndim == 1:
                K = np.diag(K)
            if K.shape != (3, 3):
                raise ValueError(f"{name} must be 3x3 or a 3-vector diagonal")
            if not np.allclose(K, K.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(K).min() <= 0:
                raise ValueError(f"{name} must be positive definite")
            K.flags.writeable = False
            object.__setattr__(self, name, K)


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def exp_so3(w):
    """Rodrigues formula for ``expm(hat3(w))``."""
    th = np.linalg.norm(w)
    W = hat3(w)
    if th < _SMALL_ANGLE:
        return np.eye(3) + W + 0.5 * W @ W
    return np.eye(3) + (np.sin(th) / th) * W + ((1.0 - np.cos(th)) / th**2) * W @ W


def exp_se3(xi, dt=1.0):
    """Group exponential of ``hat6(xi * dt)`` in closed form."""
    xi = np.asarray(xi, dtype=float) * dt
    v, w = xi[:3], xi[3:]
    th = np.linalg.norm(w)
    W = hat3(w)
    W2 = W @ W
    if th < _SMALL_ANGLE:
        R = np.eye(3) + W + 0.5 * W2
        V = np.eye(3) + 0.5 * W + W2 / 6.0
    else:
        s, c = np.sin(th), np.cos(th)
        R = np.eye(3) + (s / th) * W + ((1.0 - c) / th**2) * W2
        V = np.eye(3) + ((1.0 - c) / th**2) * W + ((th - s) / th**3) * W2
    return Pose(R, V @ v)


def adjoint(g):
    """6x6 adjoint ``[[R, p^ R], [0, R]]``."""
    R, p = g.rotation, g.position
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[3:, 3:] = R
    Ad[:3, 3:] = hat3(p) @ R
    return Ad


def adjoint_apply(g, xi):
    """``adjoint(g) @ xi`` without forming the matrix."""
    Rw = g.rotation @ xi[3:]
    return np.concatenate([g.rotation @ xi[:3] + np.cross(g.position, Rw), Rw])


def coadjoint_transform(g, F):
    """Dual adjoint ``adjoint(g).T @ F`` for a wrench ``[f; tau]``."""
    R, p = g.rotation, g.position
    F = np.asarray(F, dtype=float)
    return np.concatenate([R.T @ F[:3], R.T @ (F[3:] - np.cross(p, F[:3]))])


def ad(xi):
    """Small adjoint ``[[w^, v^], [0, w^]]`` (Lie bracket with ``xi``)."""
    m = np.zeros((6, 6))
    W = hat3(xi[3:])
    m[:3, :3] = W
    m[3:, 3:] = W
    m[:3, 3:] = hat3(xi[:3])
    return m


def error_function(g, gd):
    """Distance-like error ``tr(I - Rd^T R) + |p - pd|^2 / 2``; zero iff ``g == gd``."""
    dp = g.position - gd.position
    return float(3.0 - np.trace(gd.rotation.T @ g.rotation) + 0.5 * dp @ dp)


def gcev(g, gd):
    """Gradient of :func:`error_function` in the body frame of ``g``."""
    R, Rd = g.rotation, gd.rotation
    RdtR = Rd.T @ R
    E = RdtR - RdtR.T
    return np.concatenate([R.T @ (g.position - gd.position),
                           [E[2, 1], E[0, 2], E[1, 0]]])


def elastic_wrench(g, gd, K):
    """Spring wrench on SE(3) pulling ``g`` toward ``gd``, in the body frame of ``g``."""
    R, Rd = g.rotation, gd.rotation
    RdtR = Rd.T @ R
    f_p = R.T @ Rd @ K.Kp @ Rd.T @ (g.position - gd.position)
    A = K.KR @ RdtR
    S = A - A.T
    return np.concatenate([f_p, [S[2, 1], S[0, 2], S[1, 0]]])


def potential_energy(g, gd, K):
    """Elastic energy whose body-frame gradient is :func:`elastic_wrench`."""
    R, Rd = g.rotation, gd.rotation
    dp = g.position - gd.position
    q = Rd.T @ dp
    return float(np.trace(K.KR @ (np.eye(3) - Rd.T @ R)) + 0.5 * q @ K.Kp @ q)


def left_act(h, g):
    """``h * g``; used to re-express poses in a transformed spatial frame."""
    return h @ g
