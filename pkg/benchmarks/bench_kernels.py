"""Time the per-node kernels on the compiled and the pure-Python backend.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N] [--resolution NS NT NP]``

Both backends see the same inputs, built from a seeded Fourier test map on a
product grid, and the script also prints the largest difference between their outputs.
"""

import argparse
import timeit

import numpy as np

from contactskyrme import kernels
from contactskyrme.maps import fourier_test_map, push_frame
from contactskyrme.s3geom import build_grid


def inputs(resolution):
    grid = build_grid(*resolution)
    images, pushed = push_frame(fourier_test_map(7), grid.points)
    coupling = 1.5 + grid.points[:, 0] ** 2
    return grid, images, pushed, coupling


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--resolution", type=int, nargs=3, default=(32, 24, 24))
    args = ap.parse_args(argv)
    grid, images, pushed, coupling = inputs(args.resolution)
    backends = kernels.available_backends()
    print(f"{grid.size} nodes, best of {args.repeat} runs; backends: {', '.join(backends)}")
    results = {}
    cases = {
        "frame_vectors": lambda m: m.frame_vectors(grid.points),
        "pullback_components": lambda m: m.pullback_components(images, pushed),
        "energy_degree": lambda m: m.energy_degree(images, pushed, coupling, grid.weights),
    }
    print(f"{'kernel':<22}" + "".join(f"{b + ' (ms)':>16}" for b in backends) + f"{'speedup':>10}")
    for name, call in cases.items():
        times = []
        for b in backends:
            mod = kernels.load_backend(b)
            results[(name, b)] = call(mod)
            times.append(min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat)) * 1e3)
        speed = f"{times[-1] / times[0]:.1f}x" if len(times) == 2 else "-"
        print(f"{name:<22}" + "".join(f"{t:>16.3f}" for t in times) + f"{speed:>10}")
    if len(backends) == 2:
        diff = 0.0
        for name in cases:
            a = np.concatenate([np.ravel(x) for x in np.atleast_1d(results[(name, backends[0])])])
            b = np.concatenate([np.ravel(x) for x in np.atleast_1d(results[(name, backends[1])])])
            diff = max(diff, float(np.max(np.abs(a - b))))
        print(f"max |cython - python| over all outputs: {diff:.2e}")


if __name__ == "__main__":
    main()
