"""Contact surfaces, penalty contact wrench, and the force/torque sensor filter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .geometry import Pose

DEFAULT_STIFFNESS = 1e5
DEFAULT_DAMPING = 200.0


@dataclass(frozen=True)
class SurfaceModel:
    """Rigid obstacle the tool point presses against.

    ``plane``: ``center`` is a point on the plane and ``normal`` points out of
    the material. ``sphere``: the tool touches the outer surface of a ball of
    ``radius`` around ``center``.
    """

    kind: str
    center: np.ndarray
    normal: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(3)
        object.__setattr__(self, "center", c)
        if self.kind == "plane":
            n = np.array(self.normal, dtype=float).reshape(3)
            if abs(np.linalg.norm(n) - 1.0) > 1e-12:
                raise ValueError("plane normal must be unit length")
            object.__setattr__(self, "normal", n)
        elif self.kind == "sphere":
            if self.radius is None or not self.radius > 0:
                raise ValueError("sphere radius must be positive")
            object.__setattr__(self, "radius", float(self.radius))
        else:
            raise ValueError(f"unknown surface kind {self.kind!r}")

    @classmethod
    def plane(cls, center, normal):
        n = np.asarray(normal, dtype=float)
        return cls("plane", center, n / np.linalg.norm(n))

    @classmethod
    def sphere(cls, center, radius):
        return cls("sphere", center, radius=radius)

    def depth(self, p):
        """Penetration depth of point ``p`` and the outward unit normal there."""
        if self.kind == "plane":
            return float(self.normal @ (self.center - p)), self.normal
        d = p - self.center
        r = np.linalg.norm(d)
        n = d / r if r > 0 else np.array([0.0, 0.0, 1.0])
        return float(self.radius - r), n

    def transformed(self, h: Pose) -> "SurfaceModel":
        """The same obstacle re-expressed after a rigid motion ``h`` of the world frame."""
        c = h.rotation @ self.center + h.position
        if self.kind == "plane":
            return SurfaceModel("plane", c, h.rotation @ self.normal)
        return SurfaceModel("sphere", c, radius=self.radius)


@dataclass(frozen=True)
class ContactParams:
    stiffness: float = DEFAULT_STIFFNESS
    damping: float = DEFAULT_DAMPING
    tangential_damping: float = 0.0

    def __post_init__(self):
        if min(self.stiffness, self.damping, self.tangential_damping) < 0:
            raise ValueError("contact parameters must be nonnegative")


def contact_wrench(surface: SurfaceModel, g: Pose, V, params: ContactParams):
    """Body-frame wrench the surface exerts on the tool point at the origin of ``g``.

    Spring-damper along the normal, clamped so it only pushes, plus optional
    viscous drag along the surface while in contact. No torque (point tool).
    """
    p = g.position
    depth, n = surface.depth(p)
    if depth <= 0.0:
        return np.zeros(6)
    R = g.rotation
    v = R @ np.asarray(V[:3], dtype=float)  # world-frame tool velocity
    vn = float(n @ v)
    fn = params.stiffness * depth - params.damping * vn  # depth rate is -vn
    if fn <= 0.0:
        return np.zeros(6)
    f = fn * n - params.tangential_damping * (v - vn * n)
    return np.concatenate([R.T @ f, np.zeros(3)])


class FTSensorState:
    """Second-order Butterworth low-pass on each of the six wrench channels.

    Coefficients come from the bilinear transform with prewarping at the
    cutoff; the per-channel state is the transposed direct-form-II pair.
    """

    def __init__(self, cutoff=5.0, dt=1e-3, channels=6):
        if not cutoff > 0:
            raise ValueError("cutoff must be positive")
        if not 0 < cutoff < 0.5 / dt:
            raise ValueError("cutoff must lie below the Nyquist frequency")
        self.cutoff = float(cutoff)
        self.dt = float(dt)
        self.b, self.a = signal.butter(2, cutoff, btype="low", fs=1.0 / dt)
        if np.any(np.abs(np.roots(self.a)) >= 1.0):
            raise ValueError("discretized filter is unstable")
        self.z = np.zeros((2, channels))
        self.primed = False

    def reset(self, value=None):
        """Zero the state, or preload it so a constant ``value`` passes unchanged."""
        if value is None:
            self.z[:] = 0.0
            return
        zi = signal.lfilter_zi(self.b, self.a)
        self.z = np.outer(zi, np.asarray(value, dtype=float))

    def copy(self):
        other = FTSensorState.__new__(FTSensorState)
        other.__dict__.update(self.__dict__)
        other.z = self.z.copy()
        return other


def ft_filter_step(state: FTSensorState, raw):
    """Filter one sample; updates ``state`` in place and returns the output."""
    b, a, z = state.b, state.a, state.z
    x = np.asarray(raw, dtype=float)
    y = b[0] * x + z[0]
    z[0] = b[1] * x - a[1] * y + z[1]
    z[1] = b[2] * x - a[2] * y
    return y
