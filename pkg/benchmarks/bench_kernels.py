"""Time the compiled kernels against their numpy twins on a default-profile frame.

    python benchmarks/bench_kernels.py [--repeat 5] [--signal x4]

Both backends run in this process; ``HSCT_NO_NUMBA`` only changes the
default, not what is measured here.  The first compiled call is timed
separately so JIT (or cache load) cost does not leak into the steady state.
"""

import argparse
import time

import numpy as np

from hsct import _accel
from hsct._kernels import accumulate, slice_ingredients
from hsct.estimators import Thresholds
from hsct.squeeze import Transform, TransformParams
from hsct.synth import builtin, gen
from hsct.transport import transport


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--signal", default="x4")
    args = ap.parse_args()
    if not _accel.numba_enabled():
        print("numba unavailable or disabled; only the numpy path is timed")

    s, _ = gen(builtin(args.signal))
    tr = Transform.configure(s, TransformParams())
    eng = tr.engine
    T = eng.stack(300)
    ref = float(np.abs(T[0]).max())
    th = Thresholds()
    g = tr.grids
    mu2, om2, _, mu3, om3, flags = slice_ingredients(T, eng.xi, eng.lams, th, ref, False)
    keep = (np.abs(T[0]) > th.thres * ref) & ((flags & 1) != 0)

    def ingredients(use):
        return lambda: slice_ingredients(T, eng.xi, eng.lams, th, ref, use)

    def accum(use):
        def run():
            out = np.zeros((g.sq_freq.count, g.sq_chirp.count), complex)
            accumulate(T[0], om3, mu3, keep, tr.weight, g.sq_freq.df, g.sq_chirp.dc,
                       g.sq_chirp.half, out, np.zeros(3, np.int64), use)
        return run

    rng = np.random.default_rng(0)
    a, b = rng.random(200), rng.random(200)
    b *= a.sum() / b.sum()
    M = rng.random((200, 200))

    rows = []
    backends = [True, False] if _accel.numba_enabled() else [False]
    for label, make in (("ingredients", ingredients), ("accumulate", accum)):
        timing = {}
        for use in backends:
            fn = make(use)
            t0 = time.perf_counter()
            fn()
            first = time.perf_counter() - t0
            timing[use] = (first, best_of(fn, args.repeat))
        rows.append((label, timing))

    print(f"frame: {T.shape[1]} chirps x {T.shape[2]} bins, {int(keep.sum())} kept")
    print(f"{'kernel':<12} {'backend':<8} {'first':>10} {'best':>10}")
    for label, timing in rows:
        for use, (first, best) in timing.items():
            print(f"{label:<12} {'numba' if use else 'numpy':<8} {first:10.4f} {best:10.4f}")
        if len(timing) == 2:
            print(f"{'':<12} speed-up {timing[False][1] / timing[True][1]:.1f}x")
    t0 = time.perf_counter()
    transport(a, b, M)
    print(f"transport 200x200 (compiled solver): {time.perf_counter() - t0:.4f} s")


if __name__ == "__main__":
    main()
