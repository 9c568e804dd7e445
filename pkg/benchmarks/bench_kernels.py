"""Time the compiled spectral kernel against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends see the same inputs; their outputs are compared before timing.
"""
import argparse
import timeit

import numpy as np

from ncq import _kernels
from ncq._kernels import ENTROPY, MAXEIG, PPOWER, _spectral_py, layout

CASES = {
    "kac-paljutkin (1,1,1,1,2)": ((1, 1, 1, 1, 2), (1 / 8,) * 4 + (1 / 4,)),
    "M_4": ((4,), (0.25,)),
    "M_8": ((8,), (0.125,)),
    "VN(S3) (1,1,2)": ((1, 1, 2), (1 / 6, 1 / 6, 1 / 3)),
    "tensor (2,4,4,8)": ((2, 4, 4, 8), (0.1, 0.05, 0.05, 0.025)),
}
MODES = {"entropy": (ENTROPY, 1.0), "p=2.5": (PPOWER, 2.5), "max-eig": (MAXEIG, 1.0)}


def random_positive(sizes, rng):
    parts = []
    for n in sizes:
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        parts.append((a @ a.conj().T + 0.1 * np.eye(n)).reshape(-1))
    return np.concatenate(parts)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    if _kernels._compiled is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return
    rng = np.random.default_rng(0)
    print(f"{'layout':28s} {'mode':8s} {'cython us':>10s} {'numpy us':>10s} {'speedup':>8s}")
    for name, (sizes, weights) in CASES.items():
        lay = layout(sizes, weights)
        y = random_positive(sizes, rng)
        for mname, (mode, p) in MODES.items():
            fast = lambda: _kernels._compiled.block_spectral(y, *lay, mode, p)  # noqa: E731
            slow = lambda: _spectral_py.block_spectral(y, *lay, mode, p)  # noqa: E731
            (v1, g1), (v2, g2) = fast(), slow()
            assert abs(v1 - v2) <= 1e-10 * max(1, abs(v2)) and np.allclose(g1, g2, atol=1e-9)
            t_fast = min(timeit.repeat(fast, number=args.repeat, repeat=3)) / args.repeat * 1e6
            t_slow = min(timeit.repeat(slow, number=args.repeat, repeat=3)) / args.repeat * 1e6
            print(f"{name:28s} {mname:8s} {t_fast:10.2f} {t_slow:10.2f} {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
