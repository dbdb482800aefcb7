"""Tangent space of the fixed-rank manifold: gauge-fixed tangent vectors,
orthogonal projection, closed-form partial derivatives of the construction
operator, the doubled-rank embedding, retraction, and vector transport.

Conventions.  The tangent foot is stored with orthogonality center at the
last core (cores ``0..d-2`` left-orthogonal, factors orthonormal).  A tangent
vector is parametrized by core perturbations ``dW^(0..d-1)``, factor
perturbations ``dU^(0..d_t-1)``, and one shared-factor perturbation, under the
gauge conditions ``L(W^(i))^T L(dW^(i)) = 0`` (i < d-1), ``U^(i)^T dU^(i) = 0``
and ``U^T dU = 0``.  Its ambient realization is

    sum_i  chain(W_L^(0), ..., dW^(i), ..., W_R^(d-1)) contracted with factors
    + sum_i  core contracted with (..., dU^(i) at mode i, ...)
    + sum over shared modes of the core contracted with dU_shared at that mode,

where the chains left of a perturbed core use the left-orthogonal gauge and
right of it the right-orthogonal gauge of the same core tensor.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .dense import DenseTensor, matricize, multilinear_product
from .format import (
    SfEttRank,
    SfEttTensor,
    sfett_round,
    sfett_to_tt,
)
from .tt import (
    TTTensor,
    _left_mat,
    _orth_step_right,
    interface_left,
    interface_right,
    tt_to_dense,
)

__all__ = [
    "FootGauge",
    "TangentVector",
    "EuclideanPartials",
    "project",
    "partials_from_egrad",
    "grad_from_partials",
    "construction_operator",
    "tangent_to_sfett",
    "tangent_inner",
    "tangent_norm",
    "tangent_axpy",
    "trivial_tangent",
    "zero_tangent",
    "retract",
    "transport",
    "manifold_dim",
]

GAUGE_TOL = 1e-8


class FootGauge:
    """Gauge data of a tangent foot, computed once and shared by every
    tangent operation anchored there.

    Holds the left- and right-orthogonal gauges of the core chain, the
    per-position unconstrained cores, orthonormal chain interfaces from both
    sides, the dense core tensor with its matricizations, and the (pseudo-)
    inverted Gram matrices used by the gradient assembly.
    """

    def __init__(self, x: SfEttTensor):
        d = x.d
        if x.orth_center != d - 1:
            raise ValueError("tangent foot must be orthogonalized at the last core")
        self.x = x
        self.d = d
        self.d_t = x.d_t
        self.dims = x.dims
        self.mode_sizes = tuple(c.shape[1] for c in x.cores)
        self.bonds = (1,) + tuple(c.shape[2] for c in x.cores[:-1]) + (1,)

        self.left_cores = [c.copy() for c in x.cores]
        work = [c.copy() for c in x.cores]
        self.wbar: list[np.ndarray] = [np.empty(0)] * d
        self.wbar[d - 1] = work[d - 1].copy()
        for k in range(d - 1, 0, -1):
            _orth_step_right(work, k)
            self.wbar[k - 1] = work[k - 1].copy()
        self.right_cores = work

        chain_l = TTTensor([c.copy() for c in self.left_cores])
        chain_r = TTTensor([c.copy() for c in self.right_cores])
        self.gle = [interface_left(chain_l, k) for k in range(d + 1)]
        self.gge = [interface_right(chain_r, k) for k in range(d + 1)]

        self.core_dense = tt_to_dense(chain_l)
        self.g_mat = [matricize(self.core_dense, i) for i in range(d)]

        eps = np.finfo(np.float64).eps
        self.inv_gram = []
        for i in range(self.d_t):
            gram = self.g_mat[i] @ self.g_mat[i].T
            rcond = max(gram.shape) * eps
            self.inv_gram.append(np.linalg.pinv(gram, rcond=rcond, hermitian=True))
        shared_gram = sum(
            self.g_mat[k] @ self.g_mat[k].T for k in range(self.d_t, d)
        )
        self.shared_inv_gram = np.linalg.pinv(
            shared_gram, rcond=max(shared_gram.shape) * eps, hermitian=True
        )


@dataclass
class TangentVector:
    """Gauge-fixed first-order variation anchored at ``gauge.x``."""

    gauge: FootGauge
    dcores: list[np.ndarray]
    dfactors: list[np.ndarray]
    dshared: np.ndarray

    @property
    def foot(self) -> SfEttTensor:
        return self.gauge.x

    def gauge_residual(self) -> float:
        """Largest Frobenius norm among the gauge-condition violations."""
        g = self.gauge
        resid = 0.0
        for i in range(g.d - 1):
            lw = _left_mat(g.left_cores[i])
            resid = max(resid, float(np.linalg.norm(lw.T @ _left_mat(self.dcores[i]))))
        for i in range(g.d_t):
            resid = max(resid, float(np.linalg.norm(g.x.factors[i].T @ self.dfactors[i])))
        resid = max(resid, float(np.linalg.norm(g.x.shared_factor.T @ self.dshared)))
        return resid


@dataclass
class EuclideanPartials:
    """Unconstrained derivative blocks of ``f`` composed with the
    construction operator, evaluated at the foot."""

    ds: list[np.ndarray]
    db: list[np.ndarray]
    da: np.ndarray


def zero_tangent(gauge: FootGauge) -> TangentVector:
    return TangentVector(
        gauge,
        [np.zeros_like(c) for c in gauge.left_cores],
        [np.zeros_like(u) for u in gauge.x.factors],
        np.zeros_like(gauge.x.shared_factor),
    )


def trivial_tangent(gauge: FootGauge) -> TangentVector:
    """The tangent vector realizing the foot itself (scaling curve)."""
    out = zero_tangent(gauge)
    out.dcores[gauge.d - 1] = gauge.wbar[gauge.d - 1].copy()
    return out


def tangent_axpy(terms: list[tuple[float, TangentVector]]) -> TangentVector:
    """Linear combination of tangent vectors sharing one foot gauge."""
    if not terms:
        raise ValueError("empty combination")
    gauge = terms[0][1].gauge
    if any(t.gauge is not gauge for _, t in terms):
        raise ValueError("tangent combination requires a shared foot gauge")
    out = zero_tangent(gauge)
    for a, t in terms:
        for k in range(gauge.d):
            out.dcores[k] += a * t.dcores[k]
        for k in range(gauge.d_t):
            out.dfactors[k] += a * t.dfactors[k]
        out.dshared += a * t.dshared
    return out


def tangent_inner(a: TangentVector, b: TangentVector) -> float:
    """Inner product of realizations, computed structurally.

    Valid for gauge-fixed vectors at a shared foot: the core, factor, and
    shared components live in mutually orthogonal subspaces, and within each
    the orthonormal surroundings reduce the product to small contractions.
    """
    if a.gauge is not b.gauge:
        raise ValueError("tangent inner product requires a shared foot gauge")
    g = a.gauge
    total = sum(float(np.sum(a.dcores[k] * b.dcores[k])) for k in range(g.d))
    for i in range(g.d_t):
        total += float(np.sum((a.dfactors[i] @ g.g_mat[i]) * (b.dfactors[i] @ g.g_mat[i])))
    for k in range(g.d_t, g.d):
        total += float(np.sum((a.dshared @ g.g_mat[k]) * (b.dshared @ g.g_mat[k])))
    return total


def tangent_norm(a: TangentVector) -> float:
    return float(np.sqrt(max(tangent_inner(a, a), 0.0)))


def _as_tt(egrad) -> TTTensor | None:
    if isinstance(egrad, TTTensor):
        return egrad
    if isinstance(egrad, SfEttTensor):
        return sfett_to_tt(egrad)
    return None


def _reduce_full(gauge: FootGauge, egrad) -> DenseTensor:
    """Core-shaped contraction of the ambient gradient with every factor."""
    factors = gauge.x.all_factors()
    tt = _as_tt(egrad)
    if tt is None:
        return multilinear_product(egrad, [u.T for u in factors])
    cores = [np.einsum("anb,nr->arb", c, u) for c, u in zip(tt.cores, factors)]
    return tt_to_dense(TTTensor(cores))


def _reduce_open(gauge: FootGauge, egrad, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization of the gradient contracted with every
    factor except that mode's."""
    factors = gauge.x.all_factors()
    tt = _as_tt(egrad)
    if tt is None:
        mats = [u.T if k != mode else None for k, u in enumerate(factors)]
        return matricize(multilinear_product(egrad, mats), mode)
    cores = [
        c if k == mode else np.einsum("anb,nr->arb", c, u)
        for k, (c, u) in enumerate(zip(tt.cores, factors))
    ]
    return matricize(tt_to_dense(TTTensor(cores)), mode)


def partials_from_egrad(x: SfEttTensor | FootGauge, egrad) -> EuclideanPartials:
    """Closed-form partial derivatives of ``f`` composed with the
    construction operator, given the ambient Euclidean gradient of ``f`` at
    the foot (dense, TT, or SF-ETT formatted)."""
    gauge = x if isinstance(x, FootGauge) else FootGauge(x)
    d, d_t = gauge.d, gauge.d_t
    if _as_tt(egrad) is None and egrad.dims != gauge.dims:
        raise ValueError(f"gradient dims {egrad.dims} != foot dims {gauge.dims}")

    ghat = _reduce_full(gauge, egrad)
    modes = gauge.mode_sizes

    ds = []
    for i in range(d):
        gu = ghat.data.reshape(prod(modes[:i]), -1, order="F")
        tmp = (gauge.gle[i].T @ gu).reshape(gauge.bonds[i] * modes[i], -1, order="F")
        ds.append(
            (tmp @ gauge.gge[i + 1]).reshape(
                gauge.bonds[i], modes[i], gauge.bonds[i + 1], order="F"
            )
        )

    db = [_reduce_open(gauge, egrad, i) @ gauge.g_mat[i].T for i in range(d_t)]
    da = sum(_reduce_open(gauge, egrad, k) @ gauge.g_mat[k].T for k in range(d_t, d))
    return EuclideanPartials(ds=ds, db=db, da=da)


def grad_from_partials(x: SfEttTensor | FootGauge, partials: EuclideanPartials) -> TangentVector:
    """Gauge-valid Riemannian gradient from the unconstrained partials:
    orthogonal-complement projections plus Gram solves."""
    gauge = x if isinstance(x, FootGauge) else FootGauge(x)
    d, d_t = gauge.d, gauge.d_t
    dcores = []
    for i in range(d - 1):
        lw = _left_mat(gauge.left_cores[i])
        lm = _left_mat(partials.ds[i])
        lm = lm - lw @ (lw.T @ lm)
        dcores.append(lm.reshape(partials.ds[i].shape, order="F"))
    dcores.append(partials.ds[d - 1].copy())

    dfactors = []
    for i in range(d_t):
        u = gauge.x.factors[i]
        b = partials.db[i] - u @ (u.T @ partials.db[i])
        dfactors.append(b @ gauge.inv_gram[i])
    us = gauge.x.shared_factor
    da = partials.da - us @ (us.T @ partials.da)
    dshared = da @ gauge.shared_inv_gram
    return TangentVector(gauge, dcores, dfactors, dshared)


def project(x: SfEttTensor | FootGauge, z) -> TangentVector:
    """Orthogonal projection of an ambient tensor onto the tangent space at
    the foot (dense, TT, or SF-ETT input)."""
    gauge = x if isinstance(x, FootGauge) else FootGauge(x)
    return grad_from_partials(gauge, partials_from_egrad(gauge, z))


def construction_operator(
    gauge: FootGauge,
    s: list[np.ndarray],
    b: list[np.ndarray],
    a: np.ndarray,
) -> DenseTensor:
    """Dense realization of the construction operator: term-by-term sum of
    single-slot substitutions.  Kept as explicit dense arithmetic; the
    finite-difference checks differentiate through this map."""
    d, d_t = gauge.d, gauge.d_t
    factors = gauge.x.all_factors()
    out = np.zeros(gauge.dims)
    for i in range(d):
        cores = [
            s[i] if k == i else (gauge.left_cores[k] if k < i else gauge.right_cores[k])
            for k in range(d)
        ]
        g = tt_to_dense(TTTensor(cores))
        out = out + multilinear_product(g, factors).array
    core = gauge.core_dense
    for i in range(d_t):
        mats = [b[i] if k == i else factors[k] for k in range(d)]
        out = out + multilinear_product(core, mats).array
    for i in range(d_t, d):
        mats = [a if k == i else factors[k] for k in range(d)]
        out = out + multilinear_product(core, mats).array
    return DenseTensor.from_array(out)


def realize_dense(xi: TangentVector) -> DenseTensor:
    """Ambient dense realization via the construction operator."""
    return construction_operator(xi.gauge, xi.dcores, xi.dfactors, xi.dshared)


def tangent_to_sfett(xi: TangentVector, check_gauge: bool = True) -> SfEttTensor:
    """Structured realization with at most doubled rank.

    The doubled cores route every chain path through exactly one perturbed
    slot: the first half of each doubled physical mode pairs with the
    original factor, the second half with its perturbation.
    """
    g = xi.gauge
    if check_gauge and xi.gauge_residual() > GAUGE_TOL:
        raise ValueError(
            f"gauge residual {xi.gauge_residual():.3e} exceeds {GAUGE_TOL}; "
            "the doubled-rank block layout assumes gauge-fixed components"
        )
    d = g.d
    modes = g.mode_sizes
    bonds = g.bonds
    cores = []
    for i in range(d):
        m, r0, r1 = modes[i], bonds[i], bonds[i + 1]
        if i == 0:
            new = np.zeros((1, 2 * m, 2 * r1))
            new[:, :m, :r1] = xi.dcores[0]
            new[:, :m, r1:] = g.left_cores[0]
            new[:, m:, :r1] = g.wbar[0]
        elif i < d - 1:
            new = np.zeros((2 * r0, 2 * m, 2 * r1))
            new[:r0, :m, :r1] = g.right_cores[i]
            new[r0:, :m, :r1] = xi.dcores[i]
            new[r0:, :m, r1:] = g.left_cores[i]
            new[r0:, m:, :r1] = g.wbar[i]
        else:
            new = np.zeros((2 * r0, 2 * m, 1))
            new[:r0, :m] = g.right_cores[i]
            new[r0:, :m] = xi.dcores[i]
            new[r0:, m:] = g.wbar[i]
        cores.append(new)
    factors = [
        np.hstack([u, du]) for u, du in zip(g.x.factors, xi.dfactors)
    ]
    shared = np.hstack([g.x.shared_factor, xi.dshared])
    return SfEttTensor(cores, factors, shared, g.d_t)


def retract(x: SfEttTensor | FootGauge, xi: TangentVector, ranks: SfEttRank) -> SfEttTensor:
    """Quasi-optimal rounding of ``x + xi``: the sum lives in the tangent
    space, so it is realized structurally at doubled rank and rounded back,
    never touching a dense tensor."""
    anchor = x.x if isinstance(x, FootGauge) else x
    if xi.foot is not anchor and x is not xi.gauge:
        raise ValueError("tangent vector is not anchored at the retraction foot")
    shifted = tangent_axpy([(1.0, xi), (1.0, trivial_tangent(xi.gauge))])
    emb = tangent_to_sfett(shifted)
    return sfett_round(emb, ranks, center=emb.d - 1)


def transport(x_new: SfEttTensor | FootGauge, xi: TangentVector) -> TangentVector:
    """Project a tangent vector onto the tangent space at a new foot,
    routed structurally through its SF-ETT realization."""
    gauge = x_new if isinstance(x_new, FootGauge) else FootGauge(x_new)
    return project(gauge, tangent_to_sfett(xi))


def manifold_dim(dims: tuple[int, ...], d_t: int, ranks: SfEttRank) -> int:
    """Dimension of the fixed-rank manifold: TT-manifold dimension of the
    core space plus one Grassmannian term per factor (the shared factor
    counted once)."""
    d = len(dims)
    if ranks.d != d or ranks.d_t != d_t:
        raise ValueError("rank tuple shape mismatch")
    if not 1 <= d_t < d:
        raise ValueError("need d_s = d - d_t >= 1 and d_t >= 1")
    modes = ranks.mode_sizes()
    bonds = (1,) + ranks.tt + (1,)
    dim_tt = sum(bonds[k] * modes[k] * bonds[k + 1] for k in range(d)) - sum(
        r * r for r in ranks.tt
    )
    dim_fac = sum(r * (n - r) for r, n in zip(ranks.tucker, dims[:d_t]))
    dim_shared = ranks.shared * (dims[d_t] - ranks.shared)
    return dim_tt + dim_fac + dim_shared
