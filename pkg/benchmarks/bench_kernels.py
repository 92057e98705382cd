"""Compare the numba and numpy backends on the batched kernels and the full step loop.

    python3 benchmarks/bench_kernels.py --agents 5 20 100 --steps 2000
"""

import argparse
import time

import numpy as np

from dqconsensus import kernels
from dqconsensus.graph import laplacian, random_spanning_tree_graph
from dqconsensus.sim import circular_formation_deltas, random_pose


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n, steps, repeat, seed=0):
    rng = np.random.default_rng(seed)
    lap = np.ascontiguousarray(laplacian(random_spanning_tree_graph(n, rng=rng)))
    x = np.array([random_pose(rng) for _ in range(n)])
    delta = np.array([d.vec8() for d in circular_formation_deltas(n)])
    ddot = np.zeros((n, 8))
    active = np.ones(n, dtype=bool)
    record = np.array([0, steps], dtype=np.int64)
    zeros4 = np.zeros((n, 4))
    rows = []
    for name, mod in kernels.backends().items():
        y, _, _ = mod.formation_outputs(x, delta)
        s = lap @ y
        _, xi = mod.formation_rates(x, delta, ddot, s, active)  # warm up / compile

        def loop():
            mod.run_free(x, lap, active, delta, zeros4, zeros4, 0.0, 0.0, False, 1e-3,
                         steps, record, False)

        loop()
        rates = _best(lambda: mod.formation_rates(x, delta, ddot, s, active), repeat)
        step = _best(lambda: mod.exp_step(x, xi, 1e-3), repeat)
        full = _best(loop, max(1, repeat // 10))
        rows.append((name, n, rates * 1e6, step * 1e6, full / steps * 1e6))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--agents", type=int, nargs="+", default=[5, 20, 100])
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()
    print(f"{'backend':8s} {'n':>5s} {'rates us':>10s} {'exp_step us':>12s} {'loop us/step':>13s}")
    for n in args.agents:
        for name, n_, r, e, f in bench(n, args.steps, args.repeat):
            print(f"{name:8s} {n_:5d} {r:10.2f} {e:12.2f} {f:13.2f}")


if __name__ == "__main__":
    main()
