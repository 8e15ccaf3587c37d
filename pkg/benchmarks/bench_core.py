"""Compare the compiled and pure-Python cores on boundary reduction and bottleneck matching.

Usage: python3 benchmarks/bench_core.py [--points 30] [--features 40] [--repeat 3]
"""
import argparse
import itertools
import time

import numpy as np

from pdkde import PointCloud, _pycore, cech_filtration

try:
    from pdkde import _ccore
except ImportError:
    _ccore = None


def boundaries(n_points: int, seed: int) -> list[list[int]]:
    cloud = PointCloud(np.random.default_rng(seed).uniform(size=(n_points, 2)))
    index, out = {}, []
    for j, s in enumerate(cech_filtration(cloud, max_dim=2).simplices):
        faces = itertools.combinations(s.vertices, s.dim) if s.dim else ()
        out.append(sorted(index[f] for f in faces))
        index[s.vertices] = j
    return out


def diagrams(n_features: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(2):
        b = rng.uniform(0, 1, n_features)
        out.append(np.column_stack([b, b + rng.exponential(0.2, n_features)]))
    return out[0], out[1]


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=30, help="cloud size for the reduction benchmark")
    ap.add_argument("--features", type=int, default=40, help="diagram size for the bottleneck benchmark")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    bd = boundaries(args.points, 0)
    a, b = diagrams(args.features, 1)
    cases = [
        (f"reduce_boundary ({len(bd)} columns)", lambda core: core.reduce_boundary(bd)),
        (f"bottleneck_distance ({args.features} vs {args.features})", lambda core: core.bottleneck_distance(a, b)),
    ]
    print(f"{'case':<40} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name, run in cases:
        t_py = best_of(lambda: run(_pycore), args.repeat)
        if _ccore is None:
            print(f"{name:<40} {t_py:>11.4f} {'n/a':>11} {'n/a':>8}")
            continue
        if not np.array_equal(np.asarray(run(_ccore)), np.asarray(run(_pycore))):
            raise SystemExit(f"{name}: backends disagree")
        t_c = best_of(lambda: run(_ccore), args.repeat)
        print(f"{name:<40} {t_py:>11.4f} {t_c:>11.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
