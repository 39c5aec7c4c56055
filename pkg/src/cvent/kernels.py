"""Hot loops of the sampler: biquad cascade filtering and per-block moments.

Each kernel has a numba version and a numpy/scipy version with the same
contract. ``block_moments`` uses numba when :data:`cvent._accel.NUMBA_AVAILABLE`
is set. ``sosfilt`` always uses scipy's compiled cascade, which benchmarks
faster than the jitted loop (see ``benchmarks/bench_kernels.py``). The explicit
``*_numba`` and ``*_numpy`` variants stay importable for benchmarking and
cross-checks.
"""
import numpy as np
from scipy import signal

from ._accel import NUMBA_AVAILABLE, njit

__all__ = [
    "sosfilt", "sosfilt_numpy", "sosfilt_numba",
    "block_moments", "block_moments_numpy", "block_moments_numba",
    "block_edges", "N_MOMENTS",
]

# per-block columns: count, sum x, sum y, sum x^2, sum y^2, sum xy
N_MOMENTS = 6


def _sosfilt_loop(sos, x):
    # transposed direct form II, zero initial state
    n_sections = sos.shape[0]
    y = x.copy()
    for s in range(n_sections):
        b0 = sos[s, 0] / sos[s, 3]
        b1 = sos[s, 1] / sos[s, 3]
        b2 = sos[s, 2] / sos[s, 3]
        a1 = sos[s, 4] / sos[s, 3]
        a2 = sos[s, 5] / sos[s, 3]
        z1 = 0.0
        z2 = 0.0
        for i in range(y.shape[0]):
            xi = y[i]
            yi = b0 * xi + z1
            z1 = b1 * xi - a1 * yi + z2
            z2 = b2 * xi - a2 * yi
            y[i] = yi
    return y


def _block_moments_loop(x, y, edges):
    n_blocks = edges.shape[0] - 1
    out = np.zeros((n_blocks, 6))
    for b in range(n_blocks):
        sx = 0.0
        sy = 0.0
        sxx = 0.0
        syy = 0.0
        sxy = 0.0
        for i in range(edges[b], edges[b + 1]):
            xi = x[i]
            yi = y[i]
            sx += xi
            sy += yi
            sxx += xi * xi
            syy += yi * yi
            sxy += xi * yi
        out[b, 0] = edges[b + 1] - edges[b]
        out[b, 1] = sx
        out[b, 2] = sy
        out[b, 3] = sxx
        out[b, 4] = syy
        out[b, 5] = sxy
    return out


if NUMBA_AVAILABLE:
    _sosfilt_jit = njit(cache=True)(_sosfilt_loop)
    _block_moments_jit = njit(cache=True)(_block_moments_loop)
else:
    _sosfilt_jit = None
    _block_moments_jit = None


def sosfilt_numpy(sos, x):
    return signal.sosfilt(np.asarray(sos, dtype=float), np.asarray(x, dtype=float))


def sosfilt_numba(sos, x):
    if _sosfilt_jit is None:
        raise RuntimeError("numba backend is not available")
    return _sosfilt_jit(np.ascontiguousarray(sos, dtype=float), np.ascontiguousarray(x, dtype=float))


def sosfilt(sos, x):
    """Filter ``x`` through the cascade of second-order sections ``sos``.

    ``sos`` has scipy's layout, one row ``(b0, b1, b2, a0, a1, a2)`` per
    section. Initial conditions are zero and the output has the input's
    length.
    """
    return sosfilt_numpy(sos, x)


def block_edges(n, n_blocks):
    """Contiguous block boundaries splitting ``n`` samples into ``n_blocks``."""
    return np.linspace(0, n, n_blocks + 1).astype(np.int64)


def block_moments_numpy(x, y, edges):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    starts = edges[:-1]
    cols = (x, y, x * x, y * y, x * y)
    out = np.empty((len(starts), N_MOMENTS))
    out[:, 0] = np.diff(edges)
    for k, col in enumerate(cols, start=1):
        out[:, k] = np.add.reduceat(col, starts)
    return out


def block_moments_numba(x, y, edges):
    if _block_moments_jit is None:
        raise RuntimeError("numba backend is not available")
    return _block_moments_jit(
        np.ascontiguousarray(x, dtype=float),
        np.ascontiguousarray(y, dtype=float),
        np.ascontiguousarray(edges, dtype=np.int64),
    )


def block_moments(x, y, edges):
    """Raw first and second moments of ``(x, y)`` over contiguous blocks.

    Returns an array of shape ``(len(edges) - 1, 6)`` holding count, sum x,
    sum y, sum x^2, sum y^2 and sum xy for each block. Blocks must be
    non-empty.
    """
    edges = np.asarray(edges, dtype=np.int64)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("blocks must be non-empty")
    if NUMBA_AVAILABLE:
        return block_moments_numba(x, y, edges)
    return block_moments_numpy(x, y, edges)
