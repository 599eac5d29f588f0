"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
NumPy reference in ``_kernels_py``. ``GUFIC_PURE_PYTHON=1`` forces the latter.
"""
import os

from . import _kernels_py

backend = _kernels_py
BACKEND_NAME = "python"

if os.environ.get("GUFIC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as backend  # type: ignore[no-redef]
        BACKEND_NAME = "cython"
    except ImportError:  # extension not built
        backend = _kernels_py

forward_kinematics = backend.forward_kinematics
body_jacobian = backend.body_jacobian
jacobian_rate = backend.jacobian_rate
mass_matrix = backend.mass_matrix
rnea = backend.rnea
coriolis_matrix = backend.coriolis_matrix
dynamics = backend.dynamics
