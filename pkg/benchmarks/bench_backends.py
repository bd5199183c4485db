"""Compare the compiled and pure-numpy simulation backends.

Runs the same Monte Carlo workload on each available backend, checks the
outputs agree, and prints wall-clock timings.

    python benchmarks/bench_backends.py [--trials 2048] [--steps 4000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from oucap import ChannelParams, SimConfig, abel_for_channel, integrate_abel, run_sk_scheme
from oucap.backends import available_backends


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=2048)
    ap.add_argument("--steps", type=int, default=4000)
    ap.add_argument("--horizon", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=20260815)
    args = ap.parse_args()

    params = ChannelParams(lam=-1.0, kappa=1.0, power=2.0)
    cfg = SimConfig(horizon=args.horizon, steps=args.steps, trials=args.trials,
                    master_seed=args.seed)
    traj = integrate_abel(abel_for_channel(params), horizon=cfg.horizon,
                          step=cfg.horizon / 1000.0)

    reports = {}
    for name in available_backends():
        t0 = time.perf_counter()
        reports[name] = run_sk_scheme(params, cfg, traj, backend=name)
        elapsed = time.perf_counter() - t0
        rate = args.trials * args.steps / elapsed
        print(f"{name:>7}: {elapsed:8.3f} s   ({rate:.3g} trial-steps/s)")

    names = list(reports)
    if len(names) == 2:
        a, b = (reports[n] for n in names)
        same = np.array_equal(a.mmse_emp, b.mmse_emp) and np.array_equal(
            a.power_emp, b.power_emp
        )
        print(f"backends bit-identical: {same}")
        if not same:
            print(f"  max |mmse diff| = {np.max(np.abs(a.mmse_emp - b.mmse_emp)):.3g}")
    else:
        print("only one backend available; build the extension to compare")


if __name__ == "__main__":
    main()
