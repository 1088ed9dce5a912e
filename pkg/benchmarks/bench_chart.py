"""Time the projective chart kernel: compiled extension vs pure Python.

    python benchmarks/bench_chart.py [--sizes 10,20,40,60] [--k 5] [--repeat 3]

Reports the fill kernel alone and the whole chart build (link matrix and
array setup included, which is numpy work shared by both backends).
"""
import argparse
import sys
import timeit

import numpy as np

from spanqa.decoder import build_chart, kernels
from spanqa.decoder.projective import kernel_inputs
from spanqa.linking import retrieve_parents
from spanqa.proposal import propose
from spanqa.scorer import random_tables


def instance(n, k, rng):
    t = random_tables(n, ["a", "b"], [], rng, lazy=True)
    cands = retrieve_parents(t, propose(t, None, k))
    t.ensure(cands.spans())  # link rows are built once, outside the timing
    return t, cands


def best_ms(fn, repeat):
    return 1e3 * min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="10,20,40,60")
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    py, cy = kernels.fill_chart_python, kernels.fill_chart_compiled
    if cy is None:
        print("compiled kernel not available; build with `pip install --no-build-isolation -e .`")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>4} {'spans':>6} {'kernel py ms':>13} {'kernel cy ms':>13} {'speedup':>8} "
          f"{'build py ms':>12} {'build cy ms':>12}")
    for n in (int(x) for x in args.sizes.split(",")):
        t, cands = instance(n, args.k, rng)
        kargs = kernel_inputs(cands, t, 1.0)[3]
        assert all(np.array_equal(x, y) for x, y in zip(py(*kargs), cy(*kargs)))
        kp, kc = best_ms(lambda: py(*kargs), args.repeat), best_ms(lambda: cy(*kargs), args.repeat)
        bp = best_ms(lambda: build_chart(cands, t, 1.0, kernel=py), args.repeat)
        bc = best_ms(lambda: build_chart(cands, t, 1.0, kernel=cy), args.repeat)
        print(f"{n:>4} {len(cands):>6} {kp:>13.2f} {kc:>13.3f} {kp / kc:>7.0f}x {bp:>12.2f} {bc:>12.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
