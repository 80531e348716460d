"""Compare the compiled step kernels against the pure-Python fallback.

Both paths consume the same random stream, so each pair of runs must return
identical records; the script checks that before reporting throughput.

    python3 benchmarks/bench_kernels.py --evals 200000
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ntsearch import HAVE_KERNELS, lrp, smtwtp
from ntsearch.core import SearchConfig, run_nts


def smtwtp_case(n: int, seed: int) -> smtwtp.SmtwtpInstance:
    g = np.random.default_rng(seed)
    p = g.integers(1, 101, n)
    total = int(p.sum())
    return smtwtp.SmtwtpInstance(p, g.integers(1, 11, n), g.integers(int(0.2 * total), int(0.6 * total), n))


def timed(adapter, cfg):
    start = time.perf_counter()
    rec = run_nts(adapter, cfg)
    return rec, time.perf_counter() - start


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--evals", type=int, default=200_000, help="evaluation budget per run")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    if not HAVE_KERNELS:
        print("compiled kernels are not built; nothing to compare")
        return 1

    cases = [
        ("smtwtp n=40 FI", lambda acc: smtwtp.SmtwtpAdapter(smtwtp_case(40, args.seed), acc), "fi"),
        ("smtwtp n=100 FI", lambda acc: smtwtp.SmtwtpAdapter(smtwtp_case(100, args.seed), acc), "fi"),
        ("smtwtp n=100 BD", lambda acc: smtwtp.SmtwtpAdapter(smtwtp_case(100, args.seed), acc), "bd"),
        ("lrp n=20 m=5 FD", lambda acc: lrp.LrpAdapter(lrp.random_instance(20, 5, args.seed), acc), "fd"),
        ("lrp n=50 m=10 FI", lambda acc: lrp.LrpAdapter(lrp.random_instance(50, 10, args.seed), acc), "fi"),
    ]
    print(f"{'case':<20}{'evals':>10}{'python s':>11}{'compiled s':>12}{'speedup':>9}  identical")
    for label, build, step in cases:
        cfg = SearchConfig(step, "aa", "br", args.evals, args.seed)
        slow, t_slow = timed(build(False), cfg)
        fast, t_fast = timed(build(True), cfg)
        same = slow == fast
        print(f"{label:<20}{fast.evals_total:>10}{t_slow:>11.2f}{t_fast:>12.3f}{t_slow / t_fast:>8.1f}x  {same}")
        if not same:
            return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
