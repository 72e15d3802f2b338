"""Compare the compiled and pure-Python kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times single kernels and whole runs on both backends and prints the
speed-up.  Both backends consume the same noise, so the final means are
also compared.
"""

import argparse
import math
import timeit

import numpy as np

from cbotrunc import backend as cbo_backend
from cbotrunc.core import CboParams, InitLaw, run
from cbotrunc.objectives import make_objective


def kernel_cases(d=15, n=600):
    rng = np.random.default_rng(0)
    spec = make_objective("rastrigin", d)
    x = rng.normal(size=(n, d))
    f = spec.eval_batch(x)
    point = x.mean(axis=0)
    noise = rng.normal(size=(n, d)) * 0.1
    return {
        "evaluate": lambda k: k.evaluate(spec.code, x, spec.shift_vector),
        "consensus": lambda k: k.consensus(x, f, 1e5),
        "step": lambda k: k.step(x, point, point, noise, 1.0, 0.02, 0.3, 1.0, False),
    }


def run_cases():
    cases = {}
    for name, d, n, k, mode in [
        ("ackley iso d=15 N=300 K=200", 15, 300, 200, "isotropic"),
        ("rastrigin aniso d=20 N=600 K=200", 20, 600, 200, "anisotropic"),
        ("ackley_fig1 d=4 N=100 K=2000", 4, 100, 2000, "isotropic"),
    ]:
        obj = "ackley_fig1" if "fig1" in name else name.split()[0]
        params = CboParams(lam=1.0, sigma=0.3, alpha=1e5, dt=0.02 if k < 2000 else 0.01,
                           n_particles=n, n_steps=k, init=InitLaw.isotropic(d),
                           trunc_m=1.0, noise_mode=mode)
        cases[name] = (params, make_objective(obj, d))
    return cases


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    names = cbo_backend.available()
    kernels = {n: cbo_backend.get(n) for n in names}
    print(f"backends: {', '.join(names)}")
    if "compiled" not in names:
        print("compiled extension not built; only the fallback is timed")

    header = f"{'case':40s}" + "".join(f"{n:>12s}" for n in names) + f"{'speed-up':>10s}"
    print(header)
    print("-" * len(header))
    for label, fn in kernel_cases().items():
        t = {n: best_of(lambda: fn(k), args.repeat * 20) for n, k in kernels.items()}
        _row(f"kernel {label} (N=600, d=15)", t)
    for label, (params, spec) in run_cases().items():
        t, means = {}, {}
        for n in names:
            t[n] = best_of(lambda: run(params, spec, seed=1, backend=n), args.repeat)
            means[n] = run(params, spec, seed=1, backend=n).final_mean
        _row(f"run {label}", t)
        if len(means) == 2:
            dev = float(np.max(np.abs(means["compiled"] - means["python"])))
            print(f"{'':40s}max |mean difference| = {dev:.2e}")


def _row(label, times):
    cells = "".join(f"{1e3 * v:10.2f}ms" for v in times.values())
    speed = times["python"] / times["compiled"] if "compiled" in times else math.nan
    print(f"{label:40s}{cells}{speed:9.1f}x")


if __name__ == "__main__":
    main()
