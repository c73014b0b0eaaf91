"""Compare the compiled and pure-Python simulation kernels.

    python benchmarks/bench_kernels.py --n 20000 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from markov_bandits import kernels
from markov_bandits.harness import ExperimentConfig, run_once
from markov_bandits.presets import preset

CASES = (("ucbm", "S2"), ("rcam", "S2"), ("rcam-adaptive", "S4"))


def best_time(cfg, backend, repeat):
    times = []
    for r in range(repeat):
        t0 = time.perf_counter()
        trace = run_once(cfg, r, backend)
        times.append(time.perf_counter() - t0)
    return min(times), trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000, help="horizon in slots")
    ap.add_argument("--M", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if kernels.compiled_simulate is None:
        raise SystemExit("compiled kernel is not built; reinstall with Cython available")

    print(f"horizon {args.n}, M {args.M}, best of {args.repeat}")
    print(f"{'policy':<14}{'env':<5}{'compiled s':>12}{'python s':>12}{'speedup':>10}{'slots/s (C)':>14}  identical")
    for policy, env in CASES:
        cfg = ExperimentConfig(arms=preset(env), policy=policy, M=args.M, L=1.0, horizon=args.n, seed=1)
        tc, a = best_time(cfg, "compiled", args.repeat)
        tp, b = best_time(cfg, "python", args.repeat)
        same = np.array_equal(a.reward, b.reward) and np.array_equal(a.plays, b.plays)
        print(f"{policy:<14}{env:<5}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x{args.n / tc:>14.3g}  {same}")


if __name__ == "__main__":
    main()
