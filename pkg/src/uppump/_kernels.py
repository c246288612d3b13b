"""Compiled inner loop of the master-equation right-hand side."""

import numpy as np
from numba import njit

_TILE = 64


@njit(cache=True, fastmath=True, error_model="numpy")
def assemble_rhs(y, rho, loss, shifts, w_down, w_up, out):
    """Lindblad right-hand side of a Hermitian ``rho`` given ``y = H rho``.

    ``loss[i]`` is the diagonal of sum_j L_j^dag L_j.  ``w_down[k, i]`` is
    sqrt(rate) * sqrt(n_k(i) + 1) (zero on the top level) and pairs with
    ``rho[i + s_k, j + s_k]``; ``w_up[k, i]`` is sqrt(rate) * sqrt(n_k(i))
    and pairs with ``rho[i - s_k, j - s_k]``.  Tiled so the transposed read
    of ``y`` stays in cache.
    """
    d = y.shape[0]
    n = shifts.shape[0]
    for ib in range(0, d, _TILE):
        i_hi = min(ib + _TILE, d)
        for jb in range(0, d, _TILE):
            j_hi = min(jb + _TILE, d)
            for i in range(ib, i_hi):
                li = loss[i]
                for j in range(jb, j_hi):
                    out[i, j] = (-1j * (y[i, j] - np.conj(y[j, i]))
                                 - 0.5 * (li + loss[j]) * rho[i, j])
                for k in range(n):
                    s = shifts[k]
                    # non-zero weights guarantee the shifted row is in range
                    a = w_down[k, i]
                    if a != 0.0:
                        for j in range(jb, min(j_hi, d - s)):
                            out[i, j] += a * w_down[k, j] * rho[i + s, j + s]
                    b = w_up[k, i]
                    if b != 0.0:
                        for j in range(max(jb, s), j_hi):
                            out[i, j] += b * w_up[k, j] * rho[i - s, j - s]
    return out
