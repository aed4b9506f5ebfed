"""Compare the compiled and numpy tally kernels on typical workloads.

    python3 benchmarks/bench_kernels.py [--motions 20000] [--repeat 3]

Prints motions per second for each backend, the speedup, and the largest
disagreement in inside length (should sit at rounding level).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kinemetrica import backend
from kinemetrica import bodies as B
from kinemetrica import curves as C
from kinemetrica import kinematics as K


def cases(rng):
    walk = C.StepLengthLaw.exponential(0.1)
    return {
        "segment / disk": (B.ball(1.0), C.make_segment(2.0)),
        "walk 50 steps / annulus": (B.annulus(0.5, 1.0), C.make_pearson_walk(rng, walk, 5.0)),
        "walk 2000 steps / disk": (B.ball(1.0), C.make_pearson_walk(rng, walk, 200.0)),
        "tree 5 branches / box": (B.box([2.0, 3.0]), C.make_ramified_tree(rng, 5, C.StepLengthLaw.exponential(1.0))),
        "walk 50 steps / L-polygon": (B.polygon([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]),
                                      C.make_pearson_walk(rng, walk, 5.0)),
        "walk 50 steps / shell": (B.spherical_shell(0.5, 1.0), C.make_pearson_walk(rng, walk, 5.0, 3)),
    }


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--motions", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    names = backend.available()
    if "compiled" not in names:
        print("compiled kernel not built; only the numpy backend is timed")
    rng = np.random.default_rng(args.seed)
    header = f"{'case':<28}" + "".join(f"{n + ' [motions/s]':>24}" for n in names) + f"{'speedup':>10}{'max |dL|':>12}"
    print(header)
    for label, (body, curve) in cases(rng).items():
        rots, trans = K.draw_candidates(rng, body, curve, args.motions)
        rates, outs = {}, {}
        for name in names:
            kernel = backend.get(name)
            dt, outs[name] = best_time(lambda: K.tally(body, curve, rots, trans, kernel=kernel), args.repeat)
            rates[name] = args.motions / dt
        row = f"{label:<28}" + "".join(f"{rates[n]:>24,.0f}" for n in names)
        if "compiled" in rates:
            diff = np.max(np.abs(outs["compiled"].inside_length - outs["python"].inside_length))
            row += f"{rates['compiled'] / rates['python']:>10.1f}{diff:>12.2e}"
        print(row)


if __name__ == "__main__":
    main()
