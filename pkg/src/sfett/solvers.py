"""Riemannian solvers on the fixed-rank manifold: steepest gradient descent
with exact quadratic line search for tensor approximation, and a locally
optimal conjugate-gradient eigensolver built on a Rayleigh-Ritz kernel."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .dense import DenseTensor, inner as dense_inner
from .format import (
    SfEttRank,
    SfEttTensor,
    sfett_norm,
    sfett_orthogonalize,
    sfett_round,
    sfett_scale,
    sfett_to_dense,
    sfett_to_tt,
)
from .tangent import (
    FootGauge,
    TangentVector,
    project,
    retract,
    tangent_axpy,
    tangent_inner,
    tangent_norm,
    tangent_to_sfett,
    transport,
    trivial_tangent,
)
from .tt import TTOperator, TTTensor, tt_add, tt_inner, tt_scale, tt_to_dense, ttop_apply

__all__ = ["IterRecord", "SolveTrace", "rstgd", "rayleigh_ritz", "locg"]


@dataclass
class IterRecord:
    k: int
    value: float
    resid: float
    step: float | None
    time_ms: float


@dataclass
class SolveTrace:
    records: list[IterRecord] = field(default_factory=list)
    restarts: int = 0

    def append(self, k, value, resid, step, time_ms):
        if self.records and k <= self.records[-1].k:
            raise ValueError("iteration indices must be strictly increasing")
        self.records.append(IterRecord(k, float(value), float(resid), step, float(time_ms)))

    def __len__(self):
        return len(self.records)


def _target_tt(target) -> TTTensor | None:
    if isinstance(target, TTTensor):
        return target
    if isinstance(target, SfEttTensor):
        return sfett_to_tt(target)
    return None


def rstgd(
    target,
    x0: SfEttTensor,
    ranks: SfEttRank,
    max_iters: int = 100,
    grad_tol: float = 1e-13,
):
    """Riemannian steepest descent for ``min 0.5 * ||A - X||^2``.

    The step direction is the tangent projection of the residual ``A - X``
    with the exact step of the ambient quadratic along it; iterates are
    produced by the rounding retraction and the loop stops as soon as the
    objective fails to decrease (the failing candidate is discarded), when
    the projected residual vanishes, or at ``max_iters``.

    ``target`` may be dense, TT, or SF-ETT formatted.  Returns the final
    iterate and a trace with one record per visited iterate: (objective,
    residual norm ``||A - X||``, accepted step).
    """
    a_tt = _target_tt(target)
    a_dense = target if isinstance(target, DenseTensor) else None
    if a_dense is None and a_tt is None:
        raise TypeError("target must be a DenseTensor, TTTensor, or SfEttTensor")
    a_norm2 = dense_inner(a_dense, a_dense) if a_dense is not None else tt_inner(a_tt, a_tt)

    def inner_with_target(t: TTTensor) -> float:
        if a_dense is not None:
            return dense_inner(a_dense, tt_to_dense(t))
        return tt_inner(a_tt, t)

    def objective(xc: SfEttTensor) -> float:
        ax = inner_with_target(sfett_to_tt(xc))
        return 0.5 * (a_norm2 - 2.0 * ax + sfett_norm(xc) ** 2)

    x = x0 if x0.orth_center == x0.d - 1 else sfett_orthogonalize(x0, x0.d - 1)
    trace = SolveTrace()
    t0 = time.perf_counter()
    obj = objective(x)
    for k in range(max_iters):
        if not np.isfinite(obj):
            raise FloatingPointError(f"non-finite objective at iteration {k}")
        gauge = FootGauge(x)
        if a_dense is not None:
            egrad_neg = DenseTensor(a_dense.dims, a_dense.data - sfett_to_dense(x).data)
        else:
            egrad_neg = tt_add(a_tt, tt_scale(sfett_to_tt(x), -1.0))
        h = project(gauge, egrad_neg)  # = -grad f = P(A - X)
        resid = float(np.sqrt(max(2.0 * obj, 0.0)))
        hn2 = tangent_inner(h, h)
        if np.sqrt(hn2) <= grad_tol * max(1.0, np.sqrt(a_norm2)):
            trace.append(k, obj, resid, 0.0, (time.perf_counter() - t0) * 1e3)
            break
        # exact step of the ambient quadratic along h
        ax_h = inner_with_target(sfett_to_tt(tangent_to_sfett(h)))
        x_h = tangent_inner(trivial_tangent(gauge), h)
        alpha = (ax_h - x_h) / hn2
        x_next = retract(gauge, tangent_axpy([(alpha, h)]), ranks)
        obj_next = objective(x_next)
        trace.append(k, obj, resid, float(alpha), (time.perf_counter() - t0) * 1e3)
        if not obj_next < obj:
            break
        x, obj = x_next, obj_next
    else:
        k = max_iters
    last = trace.records[-1].k if trace.records else -1
    if last < k or not trace.records:
        trace.append(
            max(k, last + 1), obj, float(np.sqrt(max(2.0 * obj, 0.0))), None,
            (time.perf_counter() - t0) * 1e3,
        )
    return x, trace


def _basis_tt(v) -> TTTensor:
    if isinstance(v, TangentVector):
        return sfett_to_tt(tangent_to_sfett(v))
    if isinstance(v, SfEttTensor):
        return sfett_to_tt(v)
    if isinstance(v, TTTensor):
        return v
    raise TypeError(f"unsupported basis element type {type(v)!r}")


def rayleigh_ritz(h, s: list, drop_tol: float = 1e-10, sym_tol: float = 1e-8):
    """Solve the subspace generalized eigenproblem (S^T H S) Z = (S^T S) Z diag(theta).

    ``h`` is a TT operator or a dense symmetric matrix; basis elements may be
    tangent vectors (sharing one foot), SF-ETT / TT tensors, dense tensors,
    or flat vectors.  Basis directions whose overlap-matrix eigenvalues fall
    below ``drop_tol`` times the largest are dropped; eigenvalues come back
    ascending with coefficient columns over the original basis, normalized so
    that ``C^T (S^T S) C = I``.
    """
    if not s:
        raise ValueError("empty basis")
    m = len(s)

    if isinstance(h, TTOperator):
        gram = np.empty((m, m))
        tts = [_basis_tt(v) for v in s]
        if all(isinstance(v, TangentVector) for v in s):
            for i in range(m):
                for j in range(i, m):
                    gram[i, j] = gram[j, i] = tangent_inner(s[i], s[j])
        else:
            for i in range(m):
                for j in range(i, m):
                    gram[i, j] = gram[j, i] = tt_inner(tts[i], tts[j])
        hs = [ttop_apply(h, t) for t in tts]
        amat = np.empty((m, m))
        for i in range(m):
            for j in range(m):
                amat[i, j] = tt_inner(tts[i], hs[j])
    else:
        hm = np.asarray(h, dtype=np.float64)
        vecs = []
        for v in s:
            if isinstance(v, np.ndarray):
                vecs.append(v.ravel())
            elif isinstance(v, DenseTensor):
                vecs.append(v.data)
            else:
                vecs.append(tt_to_dense(_basis_tt(v)).data)
        vmat = np.stack(vecs, axis=1)
        gram = vmat.T @ vmat
        amat = vmat.T @ (hm @ vmat)

    a_scale = np.linalg.norm(amat)
    if a_scale > 0 and np.linalg.norm(amat - amat.T) > sym_tol * a_scale:
        raise ValueError("operator is not symmetric on the given subspace")
    amat = 0.5 * (amat + amat.T)

    gvals, gvecs = np.linalg.eigh(gram)
    keep = gvals > drop_tol * max(gvals[-1], 0.0)
    if not np.any(keep):
        raise ValueError("subspace overlap matrix is numerically zero")
    w = gvecs[:, keep] / np.sqrt(gvals[keep])
    theta, z = np.linalg.eigh(w.T @ amat @ w)
    coeffs = w @ z
    return coeffs, theta


def locg(
    h: TTOperator,
    x0: SfEttTensor,
    ranks: SfEttRank,
    max_iters: int = 500,
    tol: float = 1e-8,
):
    """Locally optimal conjugate-gradient eigensolver for the smallest
    eigenpair of a symmetric positive definite TT operator, constrained to
    the fixed-rank manifold.

    Each sweep runs Rayleigh-Ritz over the basis (iterate, projected
    residual, conjugate direction), rounds the optimal combination back to
    the target ranks, renormalizes, and transports the conjugate direction
    to the new tangent space.  Stops when the projected residual norm falls
    below ``tol``.  Returns (theta, iterate, trace); a basis collapse
    triggers a restart with a fresh residual, counted in ``trace.restarts``.
    """
    d = x0.d
    x = x0 if x0.orth_center == d - 1 else sfett_orthogonalize(x0, d - 1)
    nrm = sfett_norm(x)
    if nrm == 0:
        raise ValueError("zero initial iterate")
    x = sfett_scale(x, 1.0 / nrm)

    trace = SolveTrace()
    t0 = time.perf_counter()

    gauge = FootGauge(x)
    coeffs, thetas = rayleigh_ritz(h, [trivial_tangent(gauge)])
    if coeffs[0, 0] < 0:
        x = sfett_scale(x, -1.0)
        gauge = FootGauge(x)
    theta = float(thetas[0])

    def residual(gauge_k: FootGauge, theta_k: float) -> TangentVector:
        x_tt = sfett_to_tt(gauge_k.x)
        return project(gauge_k, tt_add(ttop_apply(h, x_tt), tt_scale(x_tt, -theta_k)))

    r = residual(gauge, theta)
    p: TangentVector | None = None
    for k in range(max_iters + 1):
        rnorm = tangent_norm(r)
        trace.append(k, theta, rnorm, None, (time.perf_counter() - t0) * 1e3)
        if not np.isfinite(theta):
            raise FloatingPointError(f"non-finite Ritz value at iteration {k}")
        if rnorm <= tol or k == max_iters:
            break
        basis = [trivial_tangent(gauge), r] + ([p] if p is not None else [])
        try:
            coeffs, thetas = rayleigh_ritz(h, basis)
        except ValueError:
            trace.restarts += 1
            p = None
            r = residual(gauge, theta)
            continue
        c = coeffs[:, 0]
        theta = float(thetas[0])
        combo = tangent_axpy(list(zip(c.tolist(), basis)))
        x = sfett_round(tangent_to_sfett(combo), ranks, center=d - 1)
        x = sfett_scale(x, 1.0 / sfett_norm(x))
        gauge = FootGauge(x)
        conj = tangent_axpy(list(zip(c[1:].tolist(), basis[1:])))
        p = transport(gauge, conj)
        if tangent_norm(p) < 1e-14:
            p = None
        r = residual(gauge, theta)
    return theta, x, trace
