"""Per-call timings of the dynamics kernels and of one closed-loop run.

    python benchmarks/bench_kernels.py [--steps N]

Compares the compiled kernel (when built) with the NumPy reference.
"""
import argparse
import time
import timeit

import numpy as np

from gufic import _kernels_py, kernels
from gufic.config import load_config, scenario_dir
from gufic.robot_model import default_model_path, load_model
from gufic.sim import simulate


def kernel_timings(backend, model, q, qd, number=2000):
    m = model
    calls = {
        "forward_kinematics": lambda: backend.forward_kinematics(m.A, m.Mrel, m.Mee, q),
        "mass_matrix": lambda: backend.mass_matrix(m.A, m.Mrel, m.G, m.armature, q),
        "rnea": lambda: backend.rnea(m.A, m.Mrel, m.G, m.armature, m.gravity_base, q, qd, qd),
        "dynamics": lambda: backend.dynamics(m.A, m.Mrel, m.Mee, m.G, m.armature,
                                             m.gravity_base, q, qd),
    }
    return {name: timeit.timeit(fn, number=number) / number * 1e6 for name, fn in calls.items()}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2000, help="closed-loop steps to time")
    args = parser.parse_args()

    model = load_model(default_model_path())
    rng = np.random.default_rng(0)
    q, qd = rng.uniform(-1, 1, 6), rng.uniform(-1, 1, 6)
    backends = {"python": _kernels_py}
    if kernels.BACKEND_NAME == "cython":
        backends["cython"] = kernels.backend
    results = {name: kernel_timings(b, model, q, qd) for name, b in backends.items()}
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in results) + "   (us per call)")
    for kernel in next(iter(results.values())):
        print(f"{kernel:<20}" + "".join(f"{r[kernel]:>12.1f}" for r in results.values()))

    cfg = load_config(scenario_dir() / "circle.json").with_duration(args.steps * 1e-3)
    t0 = time.perf_counter()
    simulate(cfg)
    elapsed = time.perf_counter() - t0
    print(f"closed loop ({kernels.BACKEND_NAME}): {args.steps} steps in {elapsed:.2f} s, "
          f"{elapsed / args.steps * 1e6:.0f} us per step")


if __name__ == "__main__":
    main()
