"""Pure-numpy twin of the compiled convolution loops.

Same punctured cyclic convolution as ``_kernels``, evaluated as a direct
roll-and-accumulate sum.  Selected at import time by ``frakolm.kernel`` when
the compiled extension is unavailable (or forced via FRAKOLM_PURE_PYTHON=1).
"""

import itertools

import numpy as np


def convolve(table, u):
    """Cyclic convolution out[j] = sum_d table[d] * u[j - d mod N]."""
    if table.shape != u.shape:
        raise ValueError("table/field shape mismatch")
    out = np.zeros_like(u)
    ndim = u.ndim
    n_last = u.shape[-1]
    # python loop over the leading offsets only; the trailing axis is
    # accumulated with whole-array shift sums
    for d_lead in itertools.product(*(range(n) for n in u.shape[:-1])):
        rolled = u
        for ax, d in enumerate(d_lead):
            rolled = np.roll(rolled, d, axis=ax)
        trow = table[d_lead]
        for d in range(n_last):
            if trow[d] != 0.0:
                out += trow[d] * np.roll(rolled, d, axis=ndim - 1)
    return out
