#!/usr/bin/env python3
"""Benchmark the delivery event-loop kernels: compiled extension vs the
pure-Python fallback, over a grid of workload shapes.

Usage: python benchmarks/bench_event_loop.py [--repeats N]

Every timed pair is also checked for bit-identical outputs, so the
benchmark doubles as an equivalence smoke test.
"""

import argparse
import time

import numpy as np

from d2drange._kernels import available_backends, get_backend
from d2drange.layout import NetworkLayout, generate_ue_field
from d2drange.traffic import ContentClass, sample_request_time

WORKLOADS = [
    # (popularity, timeout_s, r_max_m)
    (0.2, 0.0, 30.0),
    (0.8, 0.0, 30.0),
    (0.8, 0.0, 120.0),
    (0.4, 1800.0, 50.0),
    (0.8, 3600.0, 100.0),
    (1.0, 3600.0, 300.0),
]


def build_inputs(phi, timeout_s, seed=20260811):
    layout = NetworkLayout.from_inner_radius(300.0, ue_density=1.1e-3)
    cls = ContentClass(popularity=phi, scale_s=900.0, shape=5.0, timeout_s=timeout_s)
    rng = np.random.default_rng(seed)
    field = generate_ue_field(layout, rng)
    idx = np.flatnonzero(rng.random(len(field)) < phi)
    t_req = np.atleast_1d(sample_request_time(cls, rng, size=len(idx)))
    return (
        field.positions[idx, 0].copy(),
        field.positions[idx, 1].copy(),
        t_req,
        field.bs_distance_m[idx].copy(),
    )


def time_backend(kernel, args, timeout_s, r_max, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel.deliver_events(*args, timeout_s, r_max)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    opts = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled kernel not built; timing the python fallback only")

    header = f"{'workload':<34} {'n UEs':>6}" + "".join(
        f" {name + ' (ms)':>14}" for name in backends
    )
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for phi, timeout_s, r_max in WORKLOADS:
        args = build_inputs(phi, timeout_s)
        label = f"phi={phi:<4} timeout={timeout_s:<6.0f} r={r_max:<5.0f}"
        times, outputs = {}, {}
        for name in backends:
            times[name], outputs[name] = time_backend(
                get_backend(name), args, timeout_s, r_max, opts.repeats
            )
        if len(backends) == 2:
            for a, b in zip(outputs["compiled"], outputs["python"]):
                assert np.array_equal(a, b), "backend outputs diverged"
        row = f"{label:<34} {len(args[0]):>6}" + "".join(
            f" {times[name] * 1e3:>14.3f}" for name in backends
        )
        if len(backends) == 2:
            row += f" {times['python'] / times['compiled']:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
