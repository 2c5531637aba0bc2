"""Compare the compiled and pure-Python filtering kernels.

Usage:
    python3 benchmarks/bench_kernels.py [--states N] [--length T] [--repeats R]

Times `forward` and `forward_backward` on random Gaussian-HMM problems and
reports the per-call wall time of each backend plus the speedup, after
asserting the outputs agree.
"""

import argparse
import time

import numpy as np

from qoehandoff.hmm import _kernels_py

try:
    from qoehandoff.hmm import _kernels_c
except ImportError:
    _kernels_c = None


def make_problem(n_states, length, rng):
    prior = rng.dirichlet(np.ones(n_states))
    tm = rng.dirichlet(np.ones(n_states), size=n_states)
    means = np.sort(rng.uniform(0.0, 1.0, n_states))[::-1]
    variances = rng.uniform(0.005, 0.1, n_states)
    obs = rng.uniform(0.0, 1.0, length)
    diff = obs[:, None] - means[None, :]
    flp = -0.5 * (diff * diff / variances + np.log(2.0 * np.pi * variances))
    return flp, prior, tm


def time_call(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--states", type=int, default=3)
    parser.add_argument("--length", type=int, default=5000)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    flp, prior, tm = make_problem(args.states, args.length, rng)
    print(f"problem: {args.states} states, {args.length} frames, "
          f"best of {args.repeats} runs")

    if _kernels_c is None:
        print("compiled backend not built; showing pure-Python times only")

    for name, py_fn, c_fn in [
        ("forward", _kernels_py.forward,
         _kernels_c.forward if _kernels_c else None),
        ("forward_backward", _kernels_py.forward_backward,
         _kernels_c.forward_backward if _kernels_c else None),
    ]:
        t_py = time_call(py_fn, (flp, prior, tm), args.repeats)
        line = f"{name:>17}: python {1e3 * t_py:8.3f} ms"
        if c_fn is not None:
            out_py = py_fn(flp, prior, tm)
            out_c = c_fn(flp, prior, tm)
            for a, b in zip(out_py, out_c):
                assert np.abs(np.asarray(a) - np.asarray(b)).max() <= 1e-9
            t_c = time_call(c_fn, (flp, prior, tm), args.repeats)
            line += f"  cython {1e3 * t_c:8.3f} ms  speedup {t_py / t_c:5.2f}x"
        print(line)


if __name__ == "__main__":
    main()
