import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poalab import kernels

try:
    compiled = kernels.backend_module("compiled")
except ImportError:  # the extension is optional
    compiled = None
python = kernels.backend_module("python")
needs_ext = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


@needs_ext
@settings(max_examples=60, deadline=None)
@given(st.integers(1, 50), st.integers(2, 4), st.integers(1, 6), st.integers(-1, 3), st.integers(0, 2**31))
def test_winners_agree(draws, n, m, favor, seed):
    favor = min(favor, n - 1)
    rng = np.random.default_rng(seed)
    bids = rng.choice([0.0, 0.25, 0.5], size=(draws, n, m))  # coarse values force ties
    assert np.array_equal(compiled.winners(bids, favor), python.winners(bids, favor))


def test_winners_reference():
    bids = np.array([[[0.1, 0.5], [0.3, 0.5], [0.3, 0.2]]])
    assert python.winners(bids, -1).tolist() == [[1, 0]]
    assert python.winners(bids, 2).tolist() == [[2, 0]]


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(2, 3), st.integers(0, 2**31))
def test_projection_counts_agree(rows, n, seed):
    rng = np.random.default_rng(seed)
    m = n * n
    mask = (rng.random((rows, m)) < 0.4).astype(np.uint8)
    proj = np.arange(m) % n
    a = compiled.projection_counts(mask, proj, n)
    b = python.projection_counts(mask, proj, n)
    assert np.array_equal(a, b)
    ref = [len(set(proj[np.flatnonzero(r)])) for r in mask]
    assert np.asarray(b).tolist() == ref


@needs_ext
@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.integers(1, 200), st.integers(0, 2**31))
def test_fictitious_play_agrees(ra, rb, iters, seed):
    rng = np.random.default_rng(seed)
    A = np.round(rng.random((ra, rb)), 2)
    B = np.round(rng.random((ra, rb)), 2)
    x0 = rng.dirichlet(np.ones(ra))
    y0 = rng.dirichlet(np.ones(rb))
    pa0, pb0 = A @ y0, x0 @ B
    xa, ya = compiled.fictitious_play(A, B, x0, y0, pa0.copy(), pb0.copy(), iters)
    xb, yb = python.fictitious_play(A, B, x0, y0, pa0.copy(), pb0.copy(), iters)
    assert np.array_equal(xa, xb) and np.array_equal(ya, yb)
    assert np.isclose(np.sum(xa), 1.0) and np.isclose(np.sum(ya), 1.0)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(2, 15), st.integers(0, 2**31))
def test_best_response_dynamics_agree(k, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 4, (k, k)).astype(float)
    B = rng.integers(0, 4, (k, k)).astype(float)
    assert tuple(compiled.best_response_dynamics(A, B, 0, 0, 100)) == tuple(python.best_response_dynamics(A, B, 0, 0, 100))


def test_fallback_is_selected_by_environment():
    env = dict(os.environ, POALAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from poalab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
