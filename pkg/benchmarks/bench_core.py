"""Time the compiled core against the numpy fallback on batched kernels.

    python benchmarks/bench_core.py [--n 20000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from phasefem import backend


def _cases(n, rng):
    a = rng.normal(size=(n, 3, 3)) * 1e-3
    eps = 0.5 * (a + a.transpose(0, 2, 1))
    eqps = rng.uniform(0.0, 0.01, n)
    ne = max(n // 4, 1)
    G = rng.normal(size=(ne, 4, 4, 2))
    dV = rng.random((ne, 4))
    N = rng.random((4, 4))
    scalar = (N, G, dV, rng.normal(size=(ne, 4)), rng.normal(size=(ne, 4, 2)), rng.normal(size=(ne, 4, 2)),
              rng.normal(size=(ne, 4, 2, 2)), rng.normal(size=(ne, 4)), rng.normal(size=(ne, 4, 2)))
    vector = (G, dV, rng.normal(size=(ne, 4, 3, 3)), rng.normal(size=(ne, 4, 3)))
    return {
        "no_tension_split": lambda m: m.no_tension_split(eps, 2.0e5, 0.3),
        "j2_return_map": lambda m: m.j2_return_map(3.0 * eps, eqps, 1.9e5, 0.3, 520.0, 0.067),
        "scalar_element_matrices": lambda m: m.scalar_element_matrices(*scalar),
        "vector_element_matrices": lambda m: m.vector_element_matrices(*vector),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20000, help="integration points per batch")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    impls = {"numpy": backend.numpy_impl}
    if backend.compiled_impl is not None:
        impls["compiled"] = backend.compiled_impl
    cases = _cases(args.n, np.random.default_rng(0))
    print(f"{'kernel':26s}" + "".join(f"{k:>12s}" for k in impls) + "     speedup")
    for name, fn in cases.items():
        times = {k: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for k, m in impls.items()}
        row = f"{name:26s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times.values())
        if "compiled" in times:
            row += f"  {times['numpy'] / times['compiled']:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
