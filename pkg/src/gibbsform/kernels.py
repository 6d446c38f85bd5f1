"""Batched array kernels.

Each kernel exists as a plain loop (compiled with numba when available) and
as a vectorized numpy version.  The module-level names pick one according
to ``gibbsform._accel.USE_NUMBA``.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

MASK_CHUNK = 1 << 16


def _subset_sums_loop(terms, masks):
    m, n = terms.shape
    out = np.zeros((m, masks.shape[0]))
    for r in range(m):
        for c in range(masks.shape[0]):
            mask = masks[c]
            acc = 0.0
            for k in range(n):
                if (mask >> k) & 1:
                    acc += terms[r, k]
            out[r, c] = acc
    return out


def _subset_sums_numpy(terms, masks):
    m, n = terms.shape
    out = np.empty((m, masks.shape[0]))
    shifts = np.arange(n, dtype=np.int64)
    for lo in range(0, masks.shape[0], MASK_CHUNK):
        block = masks[lo : lo + MASK_CHUNK]
        bits = ((block[:, None] >> shifts) & 1).astype(float)
        out[:, lo : lo + MASK_CHUNK] = terms @ bits.T
    return out


def _polyline_work_loop(xs, ps):
    # Exact ∫ p·dx along straight segments: trapezoid in each coordinate.
    m, n = xs.shape
    total = 0.0
    for r in range(m - 1):
        for k in range(n):
            total += 0.5 * (ps[r, k] + ps[r + 1, k]) * (xs[r + 1, k] - xs[r, k])
    return total


def _polyline_work_numpy(xs, ps):
    return float(np.sum(0.5 * (ps[1:] + ps[:-1]) * np.diff(xs, axis=0)))


def _max_abs_pairing_loop(a, b):
    m, n = a.shape
    best = 0.0
    arg = 0
    for r in range(m):
        acc = 0.0
        for k in range(n):
            acc += a[r, k] * b[r, k]
        if abs(acc) > best:
            best = abs(acc)
            arg = r
    return best, arg


def _max_abs_pairing_numpy(a, b):
    vals = np.abs(np.einsum("ij,ij->i", a, b))
    arg = int(np.argmax(vals)) if vals.size else 0
    return (float(vals[arg]) if vals.size else 0.0), arg


subset_sums_nb = njit(_subset_sums_loop)
polyline_work_nb = njit(_polyline_work_loop)
max_abs_pairing_nb = njit(_max_abs_pairing_loop)


def subset_sums(terms, masks):
    """Sums of ``terms[:, k]`` over the bits of each mask.

    ``terms`` is ``(m, n)`` float, ``masks`` is ``(K,)`` int64 with bit ``k``
    selecting column ``k``.  Returns ``(m, K)``.
    """
    terms = np.ascontiguousarray(terms, dtype=float)
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if USE_NUMBA:
        return subset_sums_nb(terms, masks)
    return _subset_sums_numpy(terms, masks)


def polyline_work(xs, ps):
    """Line integral of ``p_i dx^i`` along the polyline through the rows."""
    xs = np.ascontiguousarray(xs, dtype=float)
    ps = np.ascontiguousarray(ps, dtype=float)
    if xs.shape != ps.shape or xs.ndim != 2:
        raise ValueError("xs and ps must be (m, n) arrays of equal shape")
    if USE_NUMBA:
        return float(polyline_work_nb(xs, ps))
    return _polyline_work_numpy(xs, ps)


def max_abs_pairing(a, b):
    """``max_r |a[r]·b[r]|`` and its row index."""
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    if USE_NUMBA:
        best, arg = max_abs_pairing_nb(a, b)
        return float(best), int(arg)
    return _max_abs_pairing_numpy(a, b)
