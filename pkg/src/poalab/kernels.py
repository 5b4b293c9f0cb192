"""Kernel dispatch: the compiled extension when importable, else the numpy fallback.

Set ``POALAB_PURE=1`` to force the fallback (used by the benchmark and by
the backend-equivalence tests).
"""

import os

import numpy as np

from poalab import _kernels_py

_compiled = None
if os.environ.get("POALAB_PURE") != "1":
    try:
        from poalab import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def winners(bids, favor=-1):
    """Winner index per (draw, item) for bids shaped (draws, players, items)."""
    return _impl.winners(np.ascontiguousarray(bids, dtype=np.float64), int(favor))


def projection_counts(mask, proj, nproj):
    """Distinct projection residues covered by each row of a boolean item mask."""
    return _impl.projection_counts(
        np.ascontiguousarray(mask, dtype=np.uint8),
        np.ascontiguousarray(proj, dtype=np.int64),
        int(nproj),
    )


def fictitious_play(A, B, x0, y0, iters):
    """Empirical mixtures of a two-player bimatrix game after fictitious play."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    pa0 = np.ascontiguousarray(A @ y0)
    pb0 = np.ascontiguousarray(x0 @ B)
    return _impl.fictitious_play(A, B, x0, y0, pa0, pb0, int(iters))


def best_response_dynamics(A, B, i0, j0, max_iter):
    """Alternating pure best responses from (i0, j0); returns (i, j, status, steps)."""
    i, j, status, t = _impl.best_response_dynamics(
        np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(B, dtype=np.float64),
        int(i0),
        int(j0),
        int(max_iter),
    )
    return int(i), int(j), int(status), int(t)


def backend_module(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if _compiled is None:
        raise ImportError("compiled kernels are not built")
    return _compiled
