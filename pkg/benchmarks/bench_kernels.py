"""Benchmark the compiled kernels against the pure numpy fallback.

Runs the same rolling scenario through both backends and reports steps/s:

    python3 benchmarks/bench_kernels.py [steps]
"""

import sys
import time

import numpy as np

from amphibori.engine import terrain
from amphibori.engine.kernels import backends
from amphibori.engine.rigid import make_body, rolling_pose
from amphibori.geometry import default_robot_pattern
from amphibori.magnetics import FieldCommand, field_at


def bench(impl, body, prims, steps: int) -> tuple[float, np.ndarray]:
    from amphibori.engine.kernels import quat_to_matrix

    cmd = FieldCommand.rotating(np.array([0.0, 1.0, 0.0]), 0.01, 4.0)
    state = np.zeros(13)
    state[0:3] = [0.0, 0.0, 0.004]
    state[3:7] = rolling_pose(0.3)
    gravity = np.array([0.0, 0.0, -9.81 * body.mass])
    moment = body.plates.volume * body.plates.magnetization
    t0 = time.perf_counter()
    for k in range(steps):
        b = field_at(cmd, k * 1e-4)
        rot = quat_to_matrix(state[3:7])
        torque = np.cross(rot @ moment, b)
        pts = impl.transform_points(state[3:7], state[0:3], body.hull_body)
        fc, tc, _ = impl.contact_forces(pts, state[7:10], state[10:13], state[0:3],
                                        prims, 200.0, 0.05, 0.8, 1e-3, 5e-6)
        state = impl.integrate_rigid(state, gravity + fc, torque + tc, body.mass,
                                     body.inertia_body, body.inv_inertia_body, 1e-4)
    return time.perf_counter() - t0, state


def main() -> None:
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000
    body = make_body(default_robot_pattern())
    prims = terrain.pack([terrain.ground(0.0), terrain.wall(0.08, 9e-3)])
    impls = backends()
    results = {}
    for name, impl in sorted(impls.items()):
        elapsed, state = bench(impl, body, prims, steps)
        results[name] = (elapsed, state)
        print(f"{name:9s}: {steps / elapsed:10.0f} steps/s  ({elapsed:.2f}s for {steps} steps)  "
              f"final x = {state[0] * 1e3:.2f} mm")
    if len(results) == 2:
        speedup = results["pure"][0] / results["compiled"][0]
        # chaotic contact amplifies rounding differences; position agreement
        # at the sub-mm scale is the meaningful check over long horizons
        dpos = np.linalg.norm(results["pure"][1][0:3] - results["compiled"][1][0:3])
        print(f"speedup: {speedup:.1f}x   final position divergence: {dpos * 1e3:.3f} mm")


if __name__ == "__main__":
    main()
