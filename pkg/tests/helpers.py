"""Slow, loop-based reference implementations used as independent oracles.

Nothing here may call the structured code paths it is used to check.
"""
from __future__ import annotations

from functools import reduce
from itertools import product

import numpy as np

from sfett.dense import DenseTensor
from sfett.format import SfEttTensor


def naive_matricize(x: DenseTensor, mode: int) -> np.ndarray:
    """Entry-by-entry matricization via the explicit column-index formula."""
    dims = x.dims
    rest = [dims[k] for k in range(len(dims)) if k != mode]
    out = np.zeros((dims[mode], int(np.prod(rest))))
    arr = x.array
    for idx in product(*[range(n) for n in dims]):
        col = 0
        stride = 1
        for nu in range(len(dims)):
            if nu == mode:
                continue
            col += idx[nu] * stride
            stride *= dims[nu]
        out[idx[mode], col] = arr[idx]
    return out


def naive_inner(x: DenseTensor, y: DenseTensor) -> float:
    total = 0.0
    for a, b in zip(x.array.ravel(), y.array.ravel()):
        total += a * b
    return total


def naive_multilinear(g: DenseTensor, mats: list[np.ndarray]) -> np.ndarray:
    """Direct summation over all core indices."""
    out_dims = tuple(m.shape[0] for m in mats)
    out = np.zeros(out_dims)
    garr = g.array
    for out_idx in product(*[range(n) for n in out_dims]):
        total = 0.0
        for in_idx in product(*[range(n) for n in g.dims]):
            term = garr[in_idx]
            for k in range(len(mats)):
                term *= mats[k][out_idx[k], in_idx[k]]
            total += term
        out[out_idx] = total
    return out


def naive_tt_entry(cores: list[np.ndarray], idx: tuple[int, ...]) -> float:
    m = cores[0][:, idx[0], :]
    for k in range(1, len(cores)):
        m = m @ cores[k][:, idx[k], :]
    return float(m[0, 0])


def naive_sfett_dense(x: SfEttTensor) -> np.ndarray:
    """Element-by-element contraction of the whole format."""
    dims = x.dims
    factors = x.all_factors()
    out = np.zeros(dims)
    ranks = [f.shape[1] for f in factors]
    for idx in product(*[range(n) for n in dims]):
        total = 0.0
        for jdx in product(*[range(r) for r in ranks]):
            term = naive_tt_entry(x.cores, jdx)
            for k in range(len(dims)):
                term *= factors[k][idx[k], jdx[k]]
            total += term
        out[idx] = total
    return out


def kron_sum_dense(mats: list[np.ndarray]) -> np.ndarray:
    """Kronecker sum with mode 1 as the fastest vec index."""
    d = len(mats)
    n = [m.shape[0] for m in mats]
    total = np.zeros((int(np.prod(n)), int(np.prod(n))))
    for k in range(d):
        factors = [np.eye(n[j]) for j in range(d)]
        factors[k] = mats[k]
        total += reduce(np.kron, factors[::-1])
    return total
