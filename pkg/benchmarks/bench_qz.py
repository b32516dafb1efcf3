"""Time the compiled and pure-Python QZ kernels on random pencils.

Usage::

    python3 benchmarks/bench_qz.py [--sizes 5,10,20,40] [--repeats 5]

For each size and field, the median time of ``qz_decompose`` with each
backend is printed, along with the largest difference between the two
Schur forms as a consistency check.
"""
import argparse
import statistics
import time

import numpy as np

from cpdqz.linalg import _backend, qz_decompose


def random_pencil(n: int, field: str, rng: np.random.Generator):
    if field == "complex":
        return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)),
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    # real pencil with real eigenvalues: a congruence of two diagonals
    a, b = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    return a @ np.diag(rng.standard_normal(n)) @ b, a @ np.diag(rng.uniform(0.5, 2.0, n)) @ b


def time_backend(kernels, m1, m2, repeats: int):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = qz_decompose(m1, m2, kernels=kernels)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), res


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="5,10,20,40")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    names = _backend.available()
    if "compiled" not in names:
        print("compiled kernels not built; only the pure-Python backend is timed")
    backends = {name: _backend.load(name) for name in names}
    rng = np.random.default_rng(args.seed)
    print(f"{'field':8s} {'n':>4s} " + " ".join(f"{n + ' [ms]':>14s}" for n in names) + f" {'speedup':>8s} {'max |dS|':>10s}")
    for fld in ("real", "complex"):
        for n in (int(s) for s in args.sizes.split(",")):
            m1, m2 = random_pencil(n, fld, rng)
            out = {name: time_backend(k, m1, m2, args.repeats) for name, k in backends.items()}
            row = " ".join(f"{1e3 * out[name][0]:14.3f}" for name in names)
            if len(names) == 2:
                speed = out["python"][0] / out["compiled"][0]
                diff = np.max(np.abs(out["python"][1].s - out["compiled"][1].s)) / np.linalg.norm(m1)
                print(f"{fld:8s} {n:4d} {row} {speed:8.1f} {diff:10.2e}")
            else:
                print(f"{fld:8s} {n:4d} {row}")


if __name__ == "__main__":
    main()
