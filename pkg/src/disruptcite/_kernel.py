"""Compiled citation-partition kernel.

For each focal paper the citers are stamped into a shared marker array and
the citers of every reference are swept once; a citer of a reference that
already carries the focal stamp is a consolidating citer, any other unseen
paper lands in ``RC \\ C``.  Stamps grow monotonically, so the marker array
never needs clearing.
"""

import warnings

import numba
import numpy as np

# the bundled TBB is too old for numba; it falls back to another layer
warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)


@numba.njit(cache=True, nogil=True)
def _partition_block(ref_indptr, ref_indices, cit_indptr, cit_indices,
                     focal, lo, hi, mark, out):
    for k in range(lo, hi):
        fp = focal[k]
        base = 3 * (k - lo + 1)
        in_c = base + 1
        seen = base + 2
        c0 = cit_indptr[fp]
        c1 = cit_indptr[fp + 1]
        for j in range(c0, c1):
            mark[cit_indices[j]] = in_c
        cc = 0
        nr = 0
        for j in range(ref_indptr[fp], ref_indptr[fp + 1]):
            r = ref_indices[j]
            for t in range(cit_indptr[r], cit_indptr[r + 1]):
                x = cit_indices[t]
                if x == fp:
                    continue
                m = mark[x]
                if m == in_c:
                    cc += 1
                    mark[x] = seen
                elif m < in_c:
                    nr += 1
                    mark[x] = seen
        c = c1 - c0
        out[k, 0] = c
        out[k, 1] = cc
        out[k, 2] = c - cc
        out[k, 3] = nr
        out[k, 4] = cc + nr
        out[k, 5] = ref_indptr[fp + 1] - ref_indptr[fp]


@numba.njit(cache=True, parallel=True)
def partition_counts(ref_indptr, ref_indices, cit_indptr, cit_indices,
                     focal, n_nodes, n_blocks):
    """Return an ``(len(focal), 6)`` array: c, cc, dc, n_r, rc_total, |R|."""
    m = focal.shape[0]
    out = np.zeros((m, 6), dtype=np.int64)
    step = (m + n_blocks - 1) // n_blocks if n_blocks > 0 else m
    for b in numba.prange(n_blocks):
        lo = b * step
        hi = min(m, lo + step)
        if lo < hi:
            mark = np.zeros(n_nodes, dtype=np.int64)
            _partition_block(ref_indptr, ref_indices, cit_indptr, cit_indices,
                             focal, lo, hi, mark, out)
    return out
