"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from hermite_bmo import _pykernels

try:
    from hermite_bmo import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(rng):
    x = np.linspace(-40.0, 40.0, 4001)
    f1 = rng.standard_normal(4097)
    f2 = rng.standard_normal((129, 129))
    yield "hermite_table k=512 P=4001", lambda k: k.hermite_table(512, x)
    yield "hermite_last_two k=16384 P=4001", lambda k: k.hermite_last_two(16384, x)
    for w in (65, 1025):
        means = _pykernels.window_means(f1, w)
        yield f"scan 1-d M=4097 w={w}", lambda k, m=means, w=w: k.mean_oscillation_scan(f1, m, w)
    for w in (9, 33):
        means = _pykernels.window_means(f2, w)
        yield f"scan 2-d M=129 w={w}", lambda k, m=means, w=w: k.mean_oscillation_scan(f2, m, w)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", help="write timings to this file")
    args = parser.parse_args()
    if _ckernels is None:
        parser.error("compiled extension not available; build with `pip install --no-build-isolation -e .`")

    rows = []
    print(f"{'case':36s} {'cython [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases(np.random.default_rng(0)):
        tc, oc = best_of(lambda: fn(_ckernels), args.repeat)
        tp, op = best_of(lambda: fn(_pykernels), args.repeat)
        diff = max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) for a, b in
                   zip(oc if isinstance(oc, tuple) else (oc,), op if isinstance(op, tuple) else (op,)))
        rows.append({"case": name, "cython": tc, "numpy": tp, "speedup": tp / tc, "max_diff": diff})
        print(f"{name:36s} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f} {diff:10.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
