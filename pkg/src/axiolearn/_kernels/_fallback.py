"""Numpy implementations of the hot kernels.

Same contracts as the compiled module (_native.pyx); results are
bit-identical because both evaluate the same IEEE operations per cell.
"""

import numpy as np


def minplus_block(g, i0, i1, out):
    """Fill rows [i0, i1) of the symmetric min-plus self-product of g.

    out[i, j] = min over t of g[i, t] + g[j, t], for j >= i, mirrored into
    out[j, i].  Rows of g may contain +inf (unreachable meeting points).
    """
    for i in range(i0, i1):
        sums = g[i] + g[i:]
        mins = sums.min(axis=1)
        out[i, i:] = mins
        out[i:, i] = mins


def pair_rect(v, al, ar, bl, br, symmetric_kind, use_min, out):
    """Pairwise axiom similarity block: rows index (al, ar), columns (bl, br).

    v is a symmetric concept-similarity matrix; al/ar/bl/br are index arrays
    of left/right concepts.  For symmetric axiom kinds the crossed comparison
    is taken as well and the maximum of the two aggregates wins.
    """
    s_l = v[np.ix_(al, bl)]
    s_r = v[np.ix_(ar, br)]
    if use_min:
        s1 = np.minimum(s_l, s_r)
    else:
        s1 = (s_l + s_r) * 0.5
    if symmetric_kind:
        x_l = v[np.ix_(al, br)]
        x_r = v[np.ix_(ar, bl)]
        if use_min:
            s2 = np.minimum(x_l, x_r)
        else:
            s2 = (x_l + x_r) * 0.5
        np.maximum(s1, s2, out=s1)
    out[:, :] = s1


def pair_matrix_block(v, li, ri, symmetric_kind, use_min, i0, i1, out):
    """Rows [i0, i1) of the square axiom-pair similarity matrix.

    Writes full rows; the result is symmetric because v is, so no mirroring
    pass is needed and concurrent blocks never overlap.
    """
    pair_rect(v, li[i0:i1], ri[i0:i1], li, ri, symmetric_kind, use_min, out[i0:i1])
