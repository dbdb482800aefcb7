"""Tensor-train vectors and operators: TT-SVD, orthogonalization sweeps,
rounding, interface matrices, and operator application."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .dense import DenseTensor, truncated_svd

__all__ = [
    "TTTensor",
    "TTOperator",
    "tt_svd",
    "tt_to_dense",
    "tt_orthogonalize",
    "tt_round",
    "tt_interfaces",
    "interface_left",
    "interface_right",
    "tt_add",
    "tt_scale",
    "tt_inner",
    "ttop_apply",
    "ttop_add",
    "ttop_to_matrix",
]


def _left_mat(core: np.ndarray) -> np.ndarray:
    """Left unfolding L(W): rows (bond_in, mode) with bond_in fastest."""
    r0, n, r1 = core.shape
    return core.reshape(r0 * n, r1, order="F")


def _right_mat(core: np.ndarray) -> np.ndarray:
    """Right unfolding R(W): columns (mode, bond_out) with mode fastest."""
    r0, n, r1 = core.shape
    return core.reshape(r0, n * r1, order="F")


def _fold_left(m: np.ndarray, r0: int, n: int) -> np.ndarray:
    return m.reshape(r0, n, -1, order="F")


def _fold_right(m: np.ndarray, n: int, r1: int) -> np.ndarray:
    return m.reshape(-1, n, r1, order="F")


@dataclass
class TTTensor:
    """Chain of order-3 cores of shapes ``(r_{k-1}, n_k, r_k)``, boundary
    ranks 1.

    ``orth_center`` (0-based), when set, asserts cores left of it are
    left-orthogonal and cores right of it right-orthogonal.
    """

    cores: list[np.ndarray]
    orth_center: int | None = field(default=None)

    def __post_init__(self):
        self.cores = [np.asarray(c, dtype=np.float64) for c in self.cores]
        if not self.cores:
            raise ValueError("empty core list")
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise ValueError("boundary TT ranks must be 1")
        for k in range(len(self.cores) - 1):
            if self.cores[k].shape[2] != self.cores[k + 1].shape[0]:
                raise ValueError(f"rank mismatch between cores {k} and {k + 1}")

    @property
    def order(self) -> int:
        return len(self.cores)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """Interior bond ranks ``r_1 .. r_{d-1}`` (empty for order 1)."""
        return tuple(c.shape[2] for c in self.cores[:-1])

    def copy(self) -> "TTTensor":
        return TTTensor([c.copy() for c in self.cores], self.orth_center)


@dataclass
class TTOperator:
    """Chain of order-4 cores of shapes ``(R_{k-1}, m_k, n_k, R_k)`` acting as
    a linear map from mode sizes ``n_k`` to ``m_k``."""

    cores: list[np.ndarray]

    def __post_init__(self):
        self.cores = [np.asarray(c, dtype=np.float64) for c in self.cores]
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[3] != 1:
            raise ValueError("boundary operator ranks must be 1")
        for k in range(len(self.cores) - 1):
            if self.cores[k].shape[3] != self.cores[k + 1].shape[0]:
                raise ValueError(f"rank mismatch between operator cores {k} and {k + 1}")

    @property
    def order(self) -> int:
        return len(self.cores)

    @property
    def row_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def col_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(c.shape[3] for c in self.cores[:-1])


def tt_svd(x: DenseTensor, ranks: list[int]) -> TTTensor:
    """Successive truncated SVDs of the unfoldings, left to right.

    Requested ranks exceeding the feasible unfolding dimensions are clamped
    (the returned tensor's ``ranks`` reflect the clamping).  Output is
    left-orthogonal up to the last core (``orth_center = d-1``).
    """
    d = x.ndim
    if len(ranks) != d - 1:
        raise ValueError(f"need {d - 1} ranks, got {len(ranks)}")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be >= 1")
    dims = x.dims
    cores: list[np.ndarray] = []
    m = x.data.reshape(dims[0], -1, order="F")
    r_prev = 1
    for k in range(d - 1):
        r = min(int(ranks[k]), m.shape[0], m.shape[1])
        res = truncated_svd(m, rank=r)
        cores.append(_fold_left(res.left, r_prev, dims[k]))
        m = (res.singular[:, None] * res.right.T).reshape(
            r * dims[k + 1], -1, order="F"
        )
        r_prev = r
    cores.append(m.reshape(r_prev, dims[d - 1], 1, order="F"))
    return TTTensor(cores, orth_center=d - 1)


def interface_left(t: TTTensor, k: int) -> np.ndarray:
    """X_{<=k}: the first-k-cores chain unfolded to (n_1..n_k) x r_k.

    ``k = 0`` returns the 1x1 identity interface.
    """
    if not 0 <= k <= t.order:
        raise ValueError(f"k = {k} out of range 0..{t.order}")
    m = np.ones((1, 1))
    for core in t.cores[:k]:
        rows = m.shape[0]
        m = np.tensordot(m, core, axes=(1, 0)).reshape(
            rows * core.shape[1], core.shape[2], order="F"
        )
    return m


def interface_right(t: TTTensor, k: int) -> np.ndarray:
    """X_{>=k}: the cores-k..d chain as an (n_k..n_d) x r_{k-1} matrix.

    ``k = d`` (0-based: ``k = order``) returns the 1x1 identity interface.
    """
    if not 0 <= k <= t.order:
        raise ValueError(f"k = {k} out of range 0..{t.order}")
    m = np.ones((1, 1))
    for core in reversed(t.cores[k:]):
        # rows of m index the trailing modes, columns the bond entering them
        tmp = np.tensordot(core, m, axes=(2, 1))  # (r_{k-1}, n_k, N)
        tmp = np.transpose(tmp, (1, 2, 0))
        m = tmp.reshape(core.shape[1] * m.shape[0], core.shape[0], order="F")
    return m


def tt_interfaces(t: TTTensor, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Complementary interface pair at split ``k``: the first-k-cores matrix
    and the remaining-cores matrix, so that ``unfold(dense, k) = left @
    right.T``.  Boundary splits return 1x1 ones."""
    return interface_left(t, k), interface_right(t, k)


def tt_to_dense(t: TTTensor) -> DenseTensor:
    return DenseTensor(t.dims, interface_left(t, t.order).ravel(order="F"))


def _orth_step_left(cores: list[np.ndarray], k: int) -> None:
    """QR core k and absorb the triangular factor into core k+1."""
    r0, n, r1 = cores[k].shape
    q, r = np.linalg.qr(_left_mat(cores[k]))
    cores[k] = _fold_left(q, r0, n)
    cores[k + 1] = np.tensordot(r, cores[k + 1], axes=(1, 0))


def _orth_step_right(cores: list[np.ndarray], k: int) -> None:
    """LQ core k and absorb the triangular factor into core k-1."""
    r0, n, r1 = cores[k].shape
    q, r = np.linalg.qr(_right_mat(cores[k]).T)
    cores[k] = _fold_right(q.T, n, r1)
    cores[k - 1] = np.tensordot(cores[k - 1], r.T, axes=(2, 0))


def tt_orthogonalize(t: TTTensor, center: int) -> TTTensor:
    """Same tensor with cores left of ``center`` left-orthogonal and cores
    right of it right-orthogonal (QR/LQ sweeps)."""
    d = t.order
    if not 0 <= center < d:
        raise ValueError(f"center {center} out of range 0..{d - 1}")
    cores = [c.copy() for c in t.cores]
    for k in range(center):
        _orth_step_left(cores, k)
    for k in range(d - 1, center, -1):
        _orth_step_right(cores, k)
    return TTTensor(cores, orth_center=center)


def tt_round(t: TTTensor, ranks: list[int], center: int | None = None) -> TTTensor:
    """Right-to-left orthogonalize, then truncate left to right.

    Quasi-optimal within sqrt(d-1) of the best TT approximation at the
    requested ranks; infeasible ranks are clamped.  ``center`` picks the
    orthogonality center of the result (default: last core).
    """
    d = t.order
    if len(ranks) != d - 1:
        raise ValueError(f"need {d - 1} ranks, got {len(ranks)}")
    work = tt_orthogonalize(t, 0)
    cores = work.cores
    for k in range(d - 1):
        r0, n, r1 = cores[k].shape
        r = min(int(ranks[k]), r0 * n, r1)
        res = truncated_svd(_left_mat(cores[k]), rank=r)
        cores[k] = _fold_left(res.left, r0, n)
        carry = res.singular[:, None] * res.right.T
        cores[k + 1] = np.tensordot(carry, cores[k + 1], axes=(1, 0))
    out = TTTensor(cores, orth_center=d - 1)
    if center is not None and center != d - 1:
        out = tt_orthogonalize(out, center)
    return out


def tt_add(a: TTTensor, b: TTTensor) -> TTTensor:
    """Block concatenation; ranks add, dense result is the sum."""
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    d = a.order
    if d == 1:
        return TTTensor([a.cores[0] + b.cores[0]])
    cores = []
    for k in range(d):
        ca, cb = a.cores[k], b.cores[k]
        if k == 0:
            cores.append(np.concatenate([ca, cb], axis=2))
        elif k == d - 1:
            cores.append(np.concatenate([ca, cb], axis=0))
        else:
            top = np.concatenate([ca, np.zeros((ca.shape[0], ca.shape[1], cb.shape[2]))], axis=2)
            bot = np.concatenate([np.zeros((cb.shape[0], cb.shape[1], ca.shape[2])), cb], axis=2)
            cores.append(np.concatenate([top, bot], axis=0))
    return TTTensor(cores)


def tt_scale(t: TTTensor, a: float) -> TTTensor:
    """Scale by multiplying one core (the orthogonality center when known, so
    the gauge survives)."""
    cores = [c.copy() for c in t.cores]
    k = t.orth_center if t.orth_center is not None else 0
    cores[k] = cores[k] * float(a)
    return TTTensor(cores, t.orth_center if a != 0 else None)


def tt_inner(a: TTTensor, b: TTTensor) -> float:
    """Inner product of the represented tensors via a bond sweep."""
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    v = np.ones((1, 1))
    for ca, cb in zip(a.cores, b.cores):
        v = np.einsum("ap,aib,piq->bq", v, ca, cb, optimize=True)
    return float(v[0, 0])


def ttop_apply(h: TTOperator, x: TTTensor) -> TTTensor:
    """Apply the operator: output cores are per-mode contractions with
    Kronecker-combined bonds; TT ranks multiply."""
    if h.col_dims != x.dims:
        raise ValueError(f"operator col dims {h.col_dims} != tensor dims {x.dims}")
    cores = []
    for hc, xc in zip(h.cores, x.cores):
        y = np.einsum("amnb,pnq->apmbq", hc, xc, optimize=True)
        A, P, m, B, Q = y.shape
        cores.append(y.reshape(A * P, m, B * Q))
    return TTTensor(cores)


def ttop_add(h1: TTOperator, h2: TTOperator) -> TTOperator:
    """Block-diagonal core concatenation; ranks add."""
    if h1.row_dims != h2.row_dims or h1.col_dims != h2.col_dims:
        raise ValueError("operator mode dims mismatch")
    d = h1.order
    if d == 1:
        return TTOperator([h1.cores[0] + h2.cores[0]])
    cores = []
    for k in range(d):
        ca, cb = h1.cores[k], h2.cores[k]
        if k == 0:
            cores.append(np.concatenate([ca, cb], axis=3))
        elif k == d - 1:
            cores.append(np.concatenate([ca, cb], axis=0))
        else:
            za = np.zeros(ca.shape[:3] + (cb.shape[3],))
            zb = np.zeros(cb.shape[:3] + (ca.shape[3],))
            top = np.concatenate([ca, za], axis=3)
            bot = np.concatenate([zb, cb], axis=3)
            cores.append(np.concatenate([top, bot], axis=0))
    return TTOperator(cores)


def ttop_to_matrix(h: TTOperator) -> np.ndarray:
    """Dense matrix of shape (prod m, prod n), both sides in first-mode-fastest
    vec order."""
    m = np.ones((1, 1, 1))  # (rows, cols, bond)
    for core in h.cores:
        y = np.einsum("xyb,bmna->xmyna", m, core, optimize=True)
        X, M, Y, N, A = y.shape
        m = y.reshape(X * M, Y * N, A, order="F")
    return m[:, :, 0]


def tt_rank_of_dense(x: DenseTensor, tol: float = 1e-10) -> tuple[int, ...]:
    """Numerical TT ranks of a dense tensor (unfolding ranks at a relative
    singular-value threshold)."""
    d = x.ndim
    out = []
    for k in range(1, d):
        m = x.data.reshape(prod(x.dims[:k]), -1, order="F")
        s = np.linalg.svd(m, compute_uv=False)
        out.append(int(np.sum(s > tol * (s[0] if s.size else 1.0))))
    return tuple(out)
