"""The shared-factor extended tensor-train format: construction, orthogonal
forms, SVD-based approximation from dense tensors, structured rounding, and
format arithmetic.

A tensor of order ``d = d_t + d_s`` (the last ``d_s`` modes share one factor)
is stored as a TT chain over the reduced mode sizes together with ``d_t``
distinct factors and one shared factor.  Dense reconstruction contracts the
chain with the factors, the shared one repeated ``d_s`` times.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from math import prod

import numpy as np

from .dense import DenseTensor, matricize, multilinear_product, truncated_svd
from .tt import (
    TTTensor,
    _orth_step_left,
    tt_orthogonalize,
    tt_round,
    tt_svd,
    tt_to_dense,
)

__all__ = [
    "SfEttRank",
    "SfEttTensor",
    "sfett_to_dense",
    "sfett_to_tt",
    "sfett_from_tt",
    "sfett_orthogonalize",
    "sfett_svd_from_dense",
    "sfett_round",
    "sfett_add",
    "sfett_scale",
    "sfett_inner",
    "sfett_norm",
    "param_count",
    "sfett_random",
    "dense_size_cap",
]

DEFAULT_DENSE_CAP = 10_000_000


def dense_size_cap() -> int:
    """Dense materialization guardrail; override with SFETT_DENSE_CAP."""
    return int(os.environ.get("SFETT_DENSE_CAP", DEFAULT_DENSE_CAP))


@dataclass(frozen=True)
class SfEttRank:
    """Rank tuple (r^tt_1..r^tt_{d-1}; r^t_1..r^t_{d_t}; r^t_s)."""

    tt: tuple[int, ...]
    tucker: tuple[int, ...]
    shared: int

    def __post_init__(self):
        object.__setattr__(self, "tt", tuple(int(r) for r in self.tt))
        object.__setattr__(self, "tucker", tuple(int(r) for r in self.tucker))
        object.__setattr__(self, "shared", int(self.shared))
        if any(r < 1 for r in self.tt) or any(r < 1 for r in self.tucker) or self.shared < 1:
            raise ValueError(f"all rank entries must be >= 1: {self}")

    @property
    def d(self) -> int:
        return len(self.tt) + 1

    @property
    def d_t(self) -> int:
        return len(self.tucker)

    def mode_sizes(self) -> tuple[int, ...]:
        """Core-chain mode sizes (tucker ranks then the shared rank repeated)."""
        return self.tucker + (self.shared,) * (self.d - self.d_t)

    @classmethod
    def uniform(cls, d: int, d_t: int, rtt: int, rt: int, rts: int) -> "SfEttRank":
        return cls(tt=(rtt,) * (d - 1), tucker=(rt,) * d_t, shared=rts)


@dataclass
class SfEttTensor:
    """TT core chain + ``d_t`` distinct factors + one shared factor.

    ``orth_center`` (0-based), when set, asserts all factors have orthonormal
    columns and the chain is center-orthogonal at that position.
    """

    cores: list[np.ndarray]
    factors: list[np.ndarray]
    shared_factor: np.ndarray
    d_t: int
    orth_center: int | None = field(default=None)

    def __post_init__(self):
        self.cores = [np.asarray(c, dtype=np.float64) for c in self.cores]
        self.factors = [np.asarray(u, dtype=np.float64) for u in self.factors]
        self.shared_factor = np.asarray(self.shared_factor, dtype=np.float64)
        d = len(self.cores)
        if not 1 <= self.d_t < d:
            raise ValueError(
                f"need 1 <= d_t < d (got d_t={self.d_t}, d={d}); encode the "
                "no-sharing baseline as d_s = 1"
            )
        if len(self.factors) != self.d_t:
            raise ValueError(f"need d_t={self.d_t} factors, got {len(self.factors)}")
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise ValueError("boundary TT ranks must be 1")
        for k in range(d - 1):
            if self.cores[k].shape[2] != self.cores[k + 1].shape[0]:
                raise ValueError(f"rank mismatch between cores {k} and {k + 1}")
        for k in range(self.d_t):
            if self.factors[k].ndim != 2 or self.factors[k].shape[1] != self.cores[k].shape[1]:
                raise ValueError(
                    f"factor {k} has {self.factors[k].shape} but core mode size "
                    f"is {self.cores[k].shape[1]}"
                )
        if self.shared_factor.ndim != 2:
            raise ValueError("shared factor must be a matrix")
        for k in range(self.d_t, d):
            if self.cores[k].shape[1] != self.shared_factor.shape[1]:
                raise ValueError(
                    f"core {k} mode size {self.cores[k].shape[1]} != shared "
                    f"factor columns {self.shared_factor.shape[1]}"
                )

    @property
    def d(self) -> int:
        return len(self.cores)

    @property
    def d_s(self) -> int:
        return self.d - self.d_t

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors) + (
            self.shared_factor.shape[0],
        ) * self.d_s

    @property
    def rank(self) -> SfEttRank:
        return SfEttRank(
            tt=tuple(c.shape[2] for c in self.cores[:-1]),
            tucker=tuple(u.shape[1] for u in self.factors),
            shared=self.shared_factor.shape[1],
        )

    def core_chain(self) -> TTTensor:
        return TTTensor([c.copy() for c in self.cores], self.orth_center)

    def all_factors(self) -> list[np.ndarray]:
        """All d factor matrices (the shared one repeated)."""
        return list(self.factors) + [self.shared_factor] * self.d_s

    def copy(self) -> "SfEttTensor":
        return SfEttTensor(
            [c.copy() for c in self.cores],
            [u.copy() for u in self.factors],
            self.shared_factor.copy(),
            self.d_t,
            self.orth_center,
        )


def sfett_from_tt(t: TTTensor, d_t: int) -> SfEttTensor:
    """Wrap a plain TT tensor with identity factors (exact representation).

    Requires the last ``d - d_t`` mode sizes to be equal.
    """
    dims = t.dims
    shared = dims[d_t:]
    if len(set(shared)) != 1:
        raise ValueError(f"last {len(dims) - d_t} modes must be equal-sized, got {shared}")
    return SfEttTensor(
        [c.copy() for c in t.cores],
        [np.eye(n) for n in dims[:d_t]],
        np.eye(shared[0]),
        d_t,
        orth_center=t.orth_center,
    )


def sfett_to_tt(x: SfEttTensor) -> TTTensor:
    """Ambient-dimension TT tensor (factors contracted into the cores)."""
    cores = [
        np.einsum("aib,ni->anb", c, u)
        for c, u in zip(x.cores, x.all_factors())
    ]
    return TTTensor(cores)


def sfett_to_dense(x: SfEttTensor, cap: int | None = None) -> DenseTensor:
    cap = dense_size_cap() if cap is None else cap
    size = prod(x.dims)
    if size > cap:
        raise ValueError(f"dense size {size} exceeds cap {cap} (set SFETT_DENSE_CAP to override)")
    g = tt_to_dense(x.core_chain())
    return multilinear_product(g, x.all_factors())


def sfett_orthogonalize(x: SfEttTensor, center: int) -> SfEttTensor:
    """Orthonormal factors + center-orthogonal chain representing the same
    tensor: factor QR triangles are absorbed into the core modes, then the
    chain is QR/LQ-swept."""
    d = x.d
    if not 0 <= center < d:
        raise ValueError(f"center {center} out of range 0..{d - 1}")
    cores = [c.copy() for c in x.cores]
    factors = []
    for k, u in enumerate(x.factors):
        q, r = np.linalg.qr(u)
        factors.append(q)
        cores[k] = np.einsum("aib,ij->ajb", cores[k], r.T)
    qs, rs = np.linalg.qr(x.shared_factor)
    for k in range(x.d_t, d):
        cores[k] = np.einsum("aib,ij->ajb", cores[k], rs.T)
    chain = tt_orthogonalize(TTTensor(cores), center)
    return SfEttTensor(chain.cores, factors, qs, x.d_t, orth_center=center)


def _mode_mat(core: np.ndarray) -> np.ndarray:
    """Mode-2 matricization of an order-3 core: rows = Tucker index, columns
    = (bond_in, bond_out) with bond_in fastest."""
    r0, n, r1 = core.shape
    return np.moveaxis(core, 1, 0).reshape(n, r0 * r1, order="F")


def _factor_stage(
    chain: TTTensor,
    factors: list[np.ndarray],
    shared: np.ndarray,
    d_t: int,
    tucker_ranks: tuple[int, ...],
    shared_rank: int,
) -> SfEttTensor:
    """Shared-factor HOSVD stage of the rounding algorithm.

    Takes a chain with orthogonality center at core 0 (and orthonormal
    factors), sweeps the center rightwards collecting the unconstrained core
    at every position, then truncates each Tucker mode by the SVD of that
    core's mode matricization; the shared modes are truncated jointly by the
    SVD of the horizontally concatenated matricizations.
    """
    d = chain.order
    work = [c.copy() for c in chain.cores]
    nonorth = [work[0].copy()]
    for i in range(1, d):
        _orth_step_left(work, i - 1)
        nonorth.append(work[i].copy())

    new_factors = []
    for i in range(d_t):
        m = _mode_mat(nonorth[i])
        r = min(int(tucker_ranks[i]), m.shape[0], m.shape[1])
        y = truncated_svd(m, rank=r).left
        new_factors.append(factors[i] @ y)
        work[i] = np.einsum("aib,ij->ajb", work[i], y)

    m = np.hstack([_mode_mat(nonorth[k]) for k in range(d_t, d)])
    r = min(int(shared_rank), m.shape[0], m.shape[1])
    y = truncated_svd(m, rank=r).left
    new_shared = shared @ y
    for k in range(d_t, d):
        work[k] = np.einsum("aib,ij->ajb", work[k], y)

    return SfEttTensor(work, new_factors, new_shared, d_t, orth_center=None)


def sfett_round(x: SfEttTensor, ranks: SfEttRank, center: int | None = None) -> SfEttTensor:
    """Structured quasi-optimal rounding: TT-round the core chain, then the
    shared-factor HOSVD stage, never materializing a dense tensor.

    Infeasible rank entries are clamped; the output's ``rank`` reflects the
    actual values.  ``center``, when given, re-orthogonalizes the result.
    """
    d = x.d
    if ranks.d != d or ranks.d_t != x.d_t:
        raise ValueError(f"rank tuple shape {ranks} does not match tensor (d={d}, d_t={x.d_t})")
    if x.orth_center != d - 1:
        x = sfett_orthogonalize(x, d - 1)
    chain = tt_round(x.core_chain(), list(ranks.tt), center=0)
    out = _factor_stage(chain, x.factors, x.shared_factor, x.d_t, ranks.tucker, ranks.shared)
    if center is not None:
        out = sfett_orthogonalize(out, center)
    return out


def sfett_svd_from_dense(
    a: DenseTensor,
    d_t: int,
    ranks: SfEttRank,
    order: str = "tt_first",
) -> SfEttTensor:
    """Quasi-optimal SVD-based approximation of a dense tensor.

    ``order="tt_first"`` (default) compresses to TT first and then applies
    the shared-factor HOSVD stage, matching the structured rounding exactly;
    ``order="tucker_first"`` takes factor SVDs of the input's matricizations
    first and TT-compresses the reduced core.  Both carry the same
    quasi-optimality constant ``sqrt(d) + sqrt(d)sqrt(d-1) + sqrt(d-1)``.
    """
    d = a.ndim
    if ranks.d != d or ranks.d_t != d_t:
        raise ValueError(f"rank tuple shape {ranks} does not match tensor (d={d}, d_t={d_t})")
    if not 1 <= d_t < d:
        raise ValueError(f"need 1 <= d_t < d, got d_t={d_t}, d={d}")
    shared_dims = set(a.dims[d_t:])
    if len(shared_dims) != 1:
        raise ValueError(f"last {d - d_t} modes must be equal-sized, got {a.dims[d_t:]}")
    n_s = a.dims[d_t]

    if order == "tt_first":
        chain = tt_svd(a, list(ranks.tt))
        chain = tt_orthogonalize(chain, 0)
        factors = [np.eye(n) for n in a.dims[:d_t]]
        out = _factor_stage(chain, factors, np.eye(n_s), d_t, ranks.tucker, ranks.shared)
        return sfett_orthogonalize(out, d - 1)

    if order == "tucker_first":
        factors = []
        for i in range(d_t):
            m = matricize(a, i)
            r = min(ranks.tucker[i], m.shape[0], m.shape[1])
            factors.append(truncated_svd(m, rank=r).left)
        m = np.hstack([matricize(a, k) for k in range(d_t, d)])
        r = min(ranks.shared, m.shape[0], m.shape[1])
        shared = truncated_svd(m, rank=r).left
        mats = [u.T for u in factors] + [shared.T] * (d - d_t)
        g = multilinear_product(a, mats)
        chain = tt_svd(g, list(ranks.tt))
        return SfEttTensor(chain.cores, factors, shared, d_t, orth_center=d - 1)

    raise ValueError(f"unknown order {order!r}")


def sfett_add(x: SfEttTensor, y: SfEttTensor) -> SfEttTensor:
    """Block concatenation: TT ranks add, factor columns concatenate."""
    if x.dims != y.dims or x.d_t != y.d_t:
        raise ValueError("structural mismatch between operands")
    d = x.d
    cores = []
    for k in range(d):
        ca, cb = x.cores[k], y.cores[k]
        a0, ma, a1 = ca.shape
        b0, mb, b1 = cb.shape
        if k == 0:
            new = np.zeros((1, ma + mb, a1 + b1))
            new[0, :ma, :a1] = ca[0]
            new[0, ma:, a1:] = cb[0]
        elif k == d - 1:
            new = np.zeros((a0 + b0, ma + mb, 1))
            new[:a0, :ma, 0] = ca[:, :, 0]
            new[a0:, ma:, 0] = cb[:, :, 0]
        else:
            new = np.zeros((a0 + b0, ma + mb, a1 + b1))
            new[:a0, :ma, :a1] = ca
            new[a0:, ma:, a1:] = cb
        cores.append(new)
    factors = [np.hstack([u, v]) for u, v in zip(x.factors, y.factors)]
    shared = np.hstack([x.shared_factor, y.shared_factor])
    return SfEttTensor(cores, factors, shared, x.d_t)


def sfett_scale(x: SfEttTensor, a: float) -> SfEttTensor:
    """Scale by multiplying one designated core (the orthogonality center when
    known, preserving the gauge)."""
    out = x.copy()
    k = x.orth_center if x.orth_center is not None else 0
    out.cores[k] = out.cores[k] * float(a)
    if a == 0:
        out.orth_center = None
    return out


def sfett_inner(x: SfEttTensor, y: SfEttTensor) -> float:
    """Inner product by structured contraction: factor Gram matrices followed
    by a single bond sweep over the two chains."""
    if x.dims != y.dims:
        raise ValueError(f"dims mismatch: {x.dims} vs {y.dims}")
    grams = [u.T @ v for u, v in zip(x.all_factors(), y.all_factors())]
    v = np.ones((1, 1))
    for cx, g, cy in zip(x.cores, grams, y.cores):
        v = np.einsum("ap,aib,ij,pjq->bq", v, cx, g, cy, optimize=True)
    return float(v[0, 0])


def sfett_norm(x: SfEttTensor) -> float:
    if x.orth_center is not None:
        return float(np.linalg.norm(x.cores[x.orth_center]))
    return float(np.sqrt(max(sfett_inner(x, x), 0.0)))


def param_count(x: SfEttTensor) -> int:
    """Stored parameter count: core entries plus factor entries, the shared
    factor counted once."""
    return (
        sum(c.size for c in x.cores)
        + sum(u.size for u in x.factors)
        + x.shared_factor.size
    )


def validate_rank_feasibility(dims: tuple[int, ...], d_t: int, ranks: SfEttRank) -> None:
    """Raise if a generic tensor of these ranks cannot have them as exact
    SF-ETT rank (factor ranks bounded by mode sizes, mode ranks by adjacent
    bond products, bonds by the local chain conditions)."""
    d = len(dims)
    if ranks.d != d or ranks.d_t != d_t:
        raise ValueError("rank tuple shape mismatch")
    modes = ranks.mode_sizes()
    bonds = (1,) + ranks.tt + (1,)
    for i in range(d_t):
        if ranks.tucker[i] > dims[i]:
            raise ValueError(f"tucker rank {ranks.tucker[i]} exceeds mode size {dims[i]}")
        if ranks.tucker[i] > bonds[i] * bonds[i + 1]:
            raise ValueError(
                f"tucker rank {ranks.tucker[i]} exceeds bond product {bonds[i] * bonds[i + 1]}"
            )
    if ranks.shared > dims[d_t]:
        raise ValueError(f"shared rank {ranks.shared} exceeds mode size {dims[d_t]}")
    if ranks.shared > sum(bonds[k] * bonds[k + 1] for k in range(d_t, d)):
        raise ValueError("shared rank exceeds the summed bond products of the shared modes")
    for k in range(1, d):
        if bonds[k] > bonds[k - 1] * modes[k - 1] or bonds[k] > modes[k] * bonds[k + 1]:
            raise ValueError(f"tt rank {bonds[k]} infeasible at bond {k}")


def sfett_random(
    dims: tuple[int, ...], d_t: int, ranks: SfEttRank, seed: int
) -> SfEttTensor:
    """Seeded random point on the fixed-rank set: orthonormal factors from QR
    of Gaussian matrices, Gaussian cores, orthogonalized at the last position
    and normalized to unit Frobenius norm.  Deterministic per seed."""
    d = len(dims)
    validate_rank_feasibility(tuple(dims), d_t, ranks)
    if len(set(dims[d_t:])) != 1:
        raise ValueError("shared modes must be equal-sized")
    rng = np.random.default_rng(seed)
    factors = [np.linalg.qr(rng.standard_normal((dims[i], ranks.tucker[i])))[0] for i in range(d_t)]
    shared = np.linalg.qr(rng.standard_normal((dims[d_t], ranks.shared)))[0]
    modes = ranks.mode_sizes()
    bonds = (1,) + ranks.tt + (1,)
    cores = [rng.standard_normal((bonds[k], modes[k], bonds[k + 1])) for k in range(d)]
    x = SfEttTensor(cores, factors, shared, d_t)
    x = sfett_orthogonalize(x, d - 1)
    nrm = np.linalg.norm(x.cores[d - 1])
    x.cores[d - 1] = x.cores[d - 1] / nrm
    return x
