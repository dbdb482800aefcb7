"""Independent brute-force references: full unfolding/matricization spectra
with Eckart-Young tails, finite-difference gradients, and a dense smallest
eigenpair.

Deliberately simple and slow; these functions keep their own reshape and
contraction code so the operations they check never share a code path with
them.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .dense import DenseTensor
from .format import SfEttRank

__all__ = ["SpectraReport", "unfolding_spectra", "fd_gradient", "dense_min_eig"]


@dataclass(frozen=True)
class SpectraReport:
    """Singular values of every matrix whose rank appears in the rank
    characterization: all unfoldings, the distinct-mode matricizations, and
    the concatenated shared-mode matricizations."""

    unfoldings: list[np.ndarray]
    matricizations: list[np.ndarray]
    shared_concat: np.ndarray
    d_t: int

    def ranks(self, tol: float = 1e-10) -> SfEttRank:
        def numrank(s: np.ndarray) -> int:
            top = s[0] if s.size else 0.0
            return max(int(np.sum(s > tol * top)), 1)

        return SfEttRank(
            tt=tuple(numrank(s) for s in self.unfoldings),
            tucker=tuple(numrank(s) for s in self.matricizations),
            shared=numrank(self.shared_concat),
        )

    def lower_bound(self, ranks: SfEttRank) -> float:
        """Largest Eckart-Young singular-value tail over all named matrices
        at the given rank tuple: a lower bound on the best approximation
        error at that tuple, since every feasible competitor obeys each
        matrix rank bound.

        The concatenated shared-mode tail is divided by sqrt(d_s): a
        competitor's error appears once per block there, so the matrix
        Eckart-Young bound controls sqrt(d_s) times the tensor error.
        """

        def tail(s: np.ndarray, r: int) -> float:
            return float(np.sqrt(np.sum(s[r:] ** 2)))

        d_s = len(self.unfoldings) + 1 - self.d_t
        bounds = [tail(s, r) for s, r in zip(self.unfoldings, ranks.tt)]
        bounds += [tail(s, r) for s, r in zip(self.matricizations, ranks.tucker)]
        bounds.append(tail(self.shared_concat, ranks.shared) / np.sqrt(d_s))
        return max(bounds)


def unfolding_spectra(x: DenseTensor, d_t: int) -> SpectraReport:
    d = x.ndim
    if not 1 <= d_t < d:
        raise ValueError(f"need 1 <= d_t < d, got d_t={d_t}")
    if len(set(x.dims[d_t:])) != 1:
        raise ValueError(f"last {d - d_t} modes must be equal-sized, got {x.dims[d_t:]}")
    arr = x.data.reshape(x.dims, order="F")
    unfoldings = []
    for k in range(1, d):
        m = x.data.reshape(prod(x.dims[:k]), -1, order="F")
        unfoldings.append(np.linalg.svd(m, compute_uv=False))
    mats = []
    for i in range(d_t):
        m = np.moveaxis(arr, i, 0).reshape(x.dims[i], -1, order="F")
        mats.append(np.linalg.svd(m, compute_uv=False))
    blocks = [
        np.moveaxis(arr, k, 0).reshape(x.dims[k], -1, order="F") for k in range(d_t, d)
    ]
    shared = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return SpectraReport(unfoldings, mats, shared, d_t)


def fd_gradient(f, x: DenseTensor, h: float = 1e-5) -> DenseTensor:
    """Central-difference gradient of a scalar function of dense tensors;
    O(h^2) for smooth f."""
    base = x.data.copy()
    out = np.empty_like(base)
    for k in range(base.size):
        plus = base.copy()
        plus[k] += h
        minus = base.copy()
        minus[k] -= h
        fp = f(DenseTensor(x.dims, plus))
        fm = f(DenseTensor(x.dims, minus))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError("non-finite sample in finite differences")
        out[k] = (fp - fm) / (2.0 * h)
    return DenseTensor(x.dims, out)


def dense_min_eig(h: np.ndarray, sym_tol: float = 1e-8, max_size: int = 4096):
    """Smallest eigenpair of a dense symmetric matrix via the dense
    symmetric eigensolver."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("need a square matrix")
    if h.shape[0] > max_size:
        raise ValueError(f"matrix size {h.shape[0]} exceeds cap {max_size}")
    scale = np.linalg.norm(h)
    if scale > 0 and np.linalg.norm(h - h.T) > sym_tol * scale:
        raise ValueError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (h + h.T))
    return float(vals[0]), vecs[:, 0]
