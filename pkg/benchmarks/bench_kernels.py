#!/usr/bin/env python3
"""Compare the compiled kernel backend against the NumPy fallback.

Usage: python3 benchmarks/bench_kernels.py [beads ...]
"""

import sys
import time

import numpy as np

from knotdyn.curves import resample_uniform, torus_knot_curve
from knotdyn.kernels import _project, _ref

try:
    from knotdyn.kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, repeats=7):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best * 1000


def main(sizes):
    if _fast is None:
        print("compiled backend unavailable; showing NumPy fallback only")
    header = f"{'kernel':<24}{'beads':>7}{'numpy ms':>12}{'cython ms':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for beads in sizes:
        curve = resample_uniform(torus_knot_curve(2, 3, beads), beads)
        pos = curve.points
        rest = curve.total_length() / beads
        moved = pos + 1e-5 * np.random.default_rng(0).normal(size=pos.shape)
        forces = _ref.repulsion_forces(pos)
        cases = {
            "simon_energy": lambda impl: impl.simon_energy(pos),
            "repulsion_forces": lambda impl: impl.repulsion_forces(pos),
            "repulsion_potential": lambda impl: impl.repulsion_potential(pos),
            "min_segment_gap": lambda impl: impl.min_segment_gap(pos),
            "segment_clearances": lambda impl: impl.segment_clearances(pos),
            "swept_crossing": lambda impl: impl.swept_crossing(pos, moved),
        }
        for name, call in cases.items():
            ref_ms = timeit(lambda: call(_ref))
            if _fast is not None:
                fast_ms = timeit(lambda: call(_fast))
                print(f"{name:<24}{beads:>7}{ref_ms:>12.3f}{fast_ms:>12.3f}{ref_ms / fast_ms:>8.1f}x")
            else:
                print(f"{name:<24}{beads:>7}{ref_ms:>12.3f}{'-':>12}{'-':>9}")
        proj_cases = {
            "project_edges": lambda impl: impl.project_edges(moved, rest),
            "tangent_project": lambda impl: impl.tangent_project_forces(pos, forces),
        }
        for name, call in proj_cases.items():
            ref_ms = timeit(lambda: call(_project))
            if _fast is not None:
                fast_ms = timeit(lambda: call(_fast))
                print(f"{name:<24}{beads:>7}{ref_ms:>12.3f}{fast_ms:>12.3f}{ref_ms / fast_ms:>8.1f}x")
            else:
                print(f"{name:<24}{beads:>7}{ref_ms:>12.3f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    sizes = [int(x) for x in sys.argv[1:]] or [100, 200, 400, 800]
    main(sizes)
