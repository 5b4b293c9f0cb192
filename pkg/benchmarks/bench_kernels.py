"""Time the compiled kernels against the numpy fallback on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is checked for
identical output before timing.
"""

import time

import numpy as np

from poalab.kernels import backend_module


def _time(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng):
    bids = rng.random((200_000, 3, 4))
    mask = rng.random((100_000, 27)) < 0.3
    proj = np.arange(27) % 9
    A = rng.random((300, 300))
    B = rng.random((300, 300))
    x0 = np.full(300, 1 / 300)
    pa0, pb0 = A @ x0, x0 @ B
    return {
        "winners (200k x 3 x 4)": lambda k: k.winners(bids, 2),
        "projection_counts (100k x 27)": lambda k: k.projection_counts(mask.astype(np.uint8), proj, 9),
        "fictitious_play (300x300, 2000 it)": lambda k: k.fictitious_play(A, B, x0, x0, pa0.copy(), pb0.copy(), 2000),
        "best_response_dynamics (300x300)": lambda k: k.best_response_dynamics(A, B, 0, 0, 10_000),
    }


def main():
    rng = np.random.default_rng(0)
    py = backend_module("python")
    try:
        cc = backend_module("compiled")
    except ImportError:
        print("compiled kernels not built; nothing to compare")
        return
    print(f"{'kernel':38s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        a, b = fn(cc), fn(py)
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        assert all(np.array_equal(np.asarray(u), np.asarray(v)) for u, v in zip(a, b)), name
        tc, tp = _time(lambda: fn(cc)), _time(lambda: fn(py))
        print(f"{name:38s} {tc * 1e3:9.2f}ms {tp * 1e3:9.2f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
