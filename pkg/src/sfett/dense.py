"""Dense tensors, matricizations/unfoldings, multilinear products, and the
truncated-SVD kernel.

All dense data is kept in first-index-fastest (Fortran) layout: the flat
offset of entry ``(i_1, ..., i_d)`` is ``sum(i_k * prod(dims[:k]))``.  With
this layout every unfolding is a metadata-only reshape and ``vec``-stacking
matches the identity ``vec(A X B^T) = (B kron A) vec(X)`` with the fast
operand on the right, which the tangent-space formulas rely on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

__all__ = [
    "DenseTensor",
    "SvdResult",
    "matricize",
    "dematricize",
    "unfold",
    "fold",
    "multilinear_product",
    "inner",
    "norm",
    "truncated_svd",
]


@dataclass(frozen=True)
class DenseTensor:
    """Explicit multidimensional array with a fixed index-to-offset layout.

    Parameters
    ----------
    dims : tuple of int
        Mode sizes ``n_1, ..., n_d``, each >= 1.
    data : np.ndarray
        Flat array of length ``prod(dims)``, first index fastest.
    """

    dims: tuple[int, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 1 or any(n < 1 for n in dims):
            raise ValueError(f"invalid dims {dims}: need d >= 1 and every n_i >= 1")
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64).ravel(order="F"))
        if data.size != prod(dims):
            raise ValueError(f"data length {data.size} != prod(dims) = {prod(dims)}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "DenseTensor":
        array = np.asarray(array, dtype=np.float64)
        return cls(array.shape, array.ravel(order="F"))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def array(self) -> np.ndarray:
        """The data as an ndarray of shape ``dims`` (zero-copy view)."""
        return self.data.reshape(self.dims, order="F")

    def __getitem__(self, idx):
        return self.array[idx]


@dataclass(frozen=True)
class SvdResult:
    """Truncated SVD ``M ~ left @ diag(singular) @ right.T``.

    ``tail_energy`` is the sum of squares of the discarded singular values,
    i.e. the squared Frobenius reconstruction error (Eckart-Young).
    """

    left: np.ndarray
    singular: np.ndarray
    right: np.ndarray
    tail_energy: float

    @property
    def rank(self) -> int:
        return len(self.singular)


def matricize(x: DenseTensor, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization: rows indexed by ``i_mode``, columns by the
    remaining indices in original order, first fastest.  0-based mode."""
    d = x.ndim
    if not 0 <= mode < d:
        raise ValueError(f"mode {mode} out of range for order-{d} tensor")
    moved = np.moveaxis(x.array, mode, 0)
    return moved.reshape(x.dims[mode], -1, order="F")


def dematricize(m: np.ndarray, mode: int, dims: tuple[int, ...]) -> DenseTensor:
    """Inverse of :func:`matricize`; bit-exact roundtrip."""
    d = len(dims)
    if not 0 <= mode < d:
        raise ValueError(f"mode {mode} out of range for order-{d} tensor")
    rest = tuple(dims[k] for k in range(d) if k != mode)
    moved = np.asarray(m).reshape((dims[mode],) + rest, order="F")
    return DenseTensor.from_array(np.moveaxis(moved, 0, mode))


def unfold(x: DenseTensor, split: int) -> np.ndarray:
    """``split``-th unfolding: first ``split`` modes as rows, rest as columns.

    ``split`` is a count in ``1..d-1`` (for order-3 cores, ``unfold(., 2)`` is
    the left unfolding and ``unfold(., 1)`` the right one).  Zero-copy.
    """
    d = x.ndim
    if not 1 <= split <= d - 1:
        raise ValueError(f"split {split} out of range 1..{d - 1}")
    return x.data.reshape(prod(x.dims[:split]), -1, order="F")


def fold(m: np.ndarray, dims: tuple[int, ...]) -> DenseTensor:
    """Inverse of :func:`unfold` for the given full dims."""
    return DenseTensor(tuple(dims), np.asarray(m).ravel(order="F"))


def mode_product(array: np.ndarray, matrix: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` product of an ndarray with a matrix (rows index output)."""
    out = np.tensordot(matrix, array, axes=(1, mode))
    return np.moveaxis(out, 0, mode)


def multilinear_product(x: DenseTensor, mats: list[np.ndarray | None]) -> DenseTensor:
    """Contract one matrix per mode: result dims are the matrices' row counts.

    ``None`` entries act as identities.  Matches the Tucker matricization
    identity ``Y_(k) = A_k X_(k) (A_d kron ... kron A_1, skipping k)^T``.
    """
    if len(mats) != x.ndim:
        raise ValueError(f"need {x.ndim} matrices, got {len(mats)}")
    out = x.array
    for k, a in enumerate(mats):
        if a is None:
            continue
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] != out.shape[k]:
            raise ValueError(
                f"mode {k}: matrix shape {a.shape} does not match mode size {out.shape[k]}"
            )
        out = mode_product(out, a, k)
    return DenseTensor.from_array(out)


def inner(x: DenseTensor, y: DenseTensor) -> float:
    if x.dims != y.dims:
        raise ValueError(f"dims mismatch: {x.dims} vs {y.dims}")
    return float(np.dot(x.data, y.data))


def norm(x: DenseTensor) -> float:
    return float(np.linalg.norm(x.data))


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Deterministic convention: largest-magnitude entry of each left singular
    # vector is made non-negative.
    for k in range(u.shape[1]):
        j = int(np.argmax(np.abs(u[:, k])))
        if u[j, k] < 0:
            u[:, k] = -u[:, k]
            vt[k, :] = -vt[k, :]
    return u, vt


def truncated_svd(
    m: np.ndarray, rank: int | None = None, tol: float | None = None
) -> SvdResult:
    """Best rank-``rank`` factorization in Frobenius norm, or smallest rank
    whose discarded tail satisfies ``sqrt(tail_energy) <= tol``.

    Exactly one of ``rank``/``tol`` must be given.  Ties in singular values
    are broken by retaining the earlier index; signs are fixed so the
    largest-magnitude entry of each left singular vector is non-negative.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("truncated_svd expects a matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite entries in matrix")
    if (rank is None) == (tol is None):
        raise ValueError("give exactly one of rank= or tol=")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if rank is not None:
        if not 1 <= rank <= min(m.shape):
            raise ValueError(f"rank {rank} out of range 1..{min(m.shape)}")
        r = int(rank)
    else:
        if tol < 0:
            raise ValueError("tol must be >= 0")
        tails = np.concatenate([np.cumsum((s**2)[::-1])[::-1][1:], [0.0]])
        feasible = np.nonzero(tails <= tol**2)[0]
        r = int(feasible[0]) + 1 if feasible.size else len(s)
        r = max(r, 1)
    tail = float(np.sum(s[r:] ** 2))
    u, vt = _fix_signs(u[:, :r].copy(), vt[:r, :].copy())
    return SvdResult(left=u, singular=s[:r].copy(), right=vt.T, tail_energy=tail)
