#!/usr/bin/env python3
"""Benchmark the compiled step kernels against the pure-Python fallback.

Builds a contact-heavy world (a rain of mixed bodies settling on the seabed),
steps it with each backend, and reports steps/second plus the speedup. Run:

    python benchmarks/bench_backends.py [--bodies 40] [--steps 600]
"""

import argparse
import hashlib
import random
import time

from marun2 import kernels
from marun2.frames import Pose, Quat, Vec3
from marun2.physics import Box, Capsule, HalfSpace, HydroParams, Sphere, World


def build_world(backend: str, n_bodies: int) -> World:
    rng = random.Random(1234)
    w = World(dt=0.02, backend=backend)
    w.add_body("seabed", HalfSpace(), kinematic=True, pose=Pose(Vec3(0, 0, -1.0)))
    for k in range(n_bodies):
        kind = k % 3
        if kind == 0:
            shape = Sphere(rng.uniform(0.05, 0.12))
        elif kind == 1:
            shape = Capsule(rng.uniform(0.08, 0.2), rng.uniform(0.03, 0.06))
        else:
            shape = Box(Vec3(rng.uniform(0.05, 0.15), rng.uniform(0.05, 0.15),
                             rng.uniform(0.05, 0.15)))
        axis = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
        q = Quat.from_axis_angle(axis, rng.uniform(-2, 2)) if axis.norm() > 1e-6 else Quat.identity()
        mass = rng.uniform(0.5, 4.0)
        w.add_body(
            f"b{k}", shape, mass=mass,
            pose=Pose(Vec3(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                           rng.uniform(-0.8, 1.0)), q),
            velocity=Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                          rng.uniform(-0.3, 0.3)),
            hydro=HydroParams(displaced_volume=mass / 1300.0,
                              added_mass_diag=Vec3(0.2, 0.2, 0.2),
                              linear_drag_diag=Vec3(1, 1, 1),
                              quadratic_drag_diag=Vec3(3, 3, 3),
                              angular_drag_diag=Vec3(0.1, 0.1, 0.1)),
            restitution=rng.uniform(0.0, 0.5),
            friction=rng.uniform(0.2, 0.8),
        )
    return w


def run(backend: str, n_bodies: int, steps: int) -> tuple[float, str]:
    w = build_world(backend, n_bodies)
    w.step()  # warm up (array build)
    t0 = time.perf_counter()
    for _ in range(steps):
        w.step()
    elapsed = time.perf_counter() - t0
    digest = hashlib.sha256(w.state_bytes()).hexdigest()[:16]
    return elapsed, digest


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bodies", type=int, default=40)
    ap.add_argument("--steps", type=int, default=600)
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"backends available: {backends}")
    print(f"world: {args.bodies} bodies + seabed, {args.steps} steps at dt=0.02\n")
    results = {}
    for backend in backends:
        elapsed, digest = run(backend, args.bodies, args.steps)
        rate = args.steps / elapsed
        results[backend] = (elapsed, rate, digest)
        print(f"  {backend:>6}: {elapsed:7.3f} s  {rate:9.1f} steps/s  "
              f"({elapsed / args.steps * 1e3:6.3f} ms/step)  state:{digest}")
    if "native" in results and "pure" in results:
        speedup = results["pure"][0] / results["native"][0]
        same = results["pure"][2] == results["native"][2]
        print(f"\n  speedup: {speedup:.1f}x   trajectories bit-identical: {same}")


if __name__ == "__main__":
    main()
