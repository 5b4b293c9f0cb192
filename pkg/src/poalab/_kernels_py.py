"""Pure numpy versions of the compiled kernels, used when the extension is absent."""

import numpy as np


def winners(bids, favor):
    """Index of the highest bidder per (draw, item); ties go to ``favor``, else lowest index."""
    bids = np.asarray(bids, dtype=np.float64)
    arg = np.argmax(bids, axis=1).astype(np.int32)
    if favor >= 0:
        best = np.max(bids, axis=1)
        arg[bids[:, favor, :] == best] = favor
    return arg


def projection_counts(mask, proj, nproj):
    """Number of distinct projection residues hit by each row of ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    hit = np.zeros((mask.shape[0], int(nproj)), dtype=bool)
    hit[rows, np.asarray(proj)[cols]] = True
    return hit.sum(axis=1).astype(np.int64)


def fictitious_play(A, Bm, x0, y0, pa0, pb0, iters):
    """Empirical mixtures after ``iters`` rounds of simultaneous fictitious play.

    ``pa0 = A @ y0`` and ``pb0 = x0 @ Bm`` are updated by one column/row per round.
    """
    cx = np.array(x0, dtype=np.float64, copy=True)
    cy = np.array(y0, dtype=np.float64, copy=True)
    pa = np.array(pa0, dtype=np.float64, copy=True)
    pb = np.array(pb0, dtype=np.float64, copy=True)
    for _ in range(int(iters)):
        ba = int(np.argmax(pa))
        bb = int(np.argmax(pb))
        cx[ba] += 1.0
        cy[bb] += 1.0
        pa += A[:, bb]
        pb += Bm[ba, :]
    return cx / cx.sum(), cy / cy.sum()


def best_response_dynamics(A, Bm, i0, j0, max_iter):
    """Alternating pure best responses; status 1 = fixed point, 2 = cycle, 0 = cap hit."""
    A = np.asarray(A)
    Bm = np.asarray(Bm)
    visited = np.zeros(A.shape, dtype=bool)
    i, j, t, status = int(i0), int(j0), 0, 0
    while t < max_iter:
        if visited[i, j]:
            status = 2
            break
        visited[i, j] = True
        ni = _first_max(A[:, j], i)
        nj = _first_max(Bm[ni, :], j)
        t += 1
        if ni == i and nj == j:
            status = 1
            break
        i, j = ni, nj
    return i, j, status, t


def _first_max(vec, current):
    # matches the compiled scan: strict improvements only, earliest index wins
    best = vec[current]
    arg = current
    for a in range(vec.shape[0]):
        if vec[a] > best:
            best = vec[a]
            arg = a
    return arg
