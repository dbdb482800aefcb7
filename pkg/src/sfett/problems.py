"""Builders for the benchmark problems: the Kronecker-sum Laplacian as a
rank-2 TT operator, the Henon-Heiles Hamiltonian, and grid-function target
tensors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import DenseTensor
from .format import dense_size_cap
from .tt import TTOperator, TTTensor, ttop_add

__all__ = [
    "GridSpec",
    "laplace_op",
    "henon_potential",
    "henon_hamiltonian",
    "diag_op",
    "grid_function_tensor",
    "HENON_LAMBDA",
]

HENON_LAMBDA = 0.111803


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid: ``d`` modes of ``n`` points each on (lower, upper],
    right-closed (point k is ``lower + (k+1) * (upper - lower) / n``)."""

    d: int
    n: int
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if not self.lower < self.upper:
            raise ValueError("need lower < upper")

    def points(self) -> np.ndarray:
        k = np.arange(1, self.n + 1, dtype=np.float64)
        return self.lower + k * (self.upper - self.lower) / self.n


def laplace_op(d: int, n: int) -> TTOperator:
    """Kronecker sum of the per-mode matrix ``tridiag(-1, 2, -1)`` (the
    negated second-difference stencil, making the operator positive
    definite), as an explicit rank-2 TT operator."""
    if d < 2 or n < 2:
        raise ValueError("need d >= 2 and n >= 2")
    a = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    eye = np.eye(n)
    first = np.zeros((1, n, n, 2))
    first[0, :, :, 0] = a
    first[0, :, :, 1] = eye
    mid = np.zeros((2, n, n, 2))
    mid[0, :, :, 0] = eye
    mid[1, :, :, 0] = a
    mid[1, :, :, 1] = eye
    last = np.zeros((2, n, n, 1))
    last[0, :, :, 0] = eye
    last[1, :, :, 0] = a
    return TTOperator([first] + [mid.copy() for _ in range(d - 2)] + [last])


def laplace_min_eig(d: int, n: int) -> float:
    """Analytic smallest eigenvalue ``d * 4 sin^2(pi / (2(n+1)))`` of the
    Kronecker-sum assembly."""
    return d * 4.0 * np.sin(np.pi / (2.0 * (n + 1))) ** 2


def henon_potential(grid: GridSpec, lam: float = HENON_LAMBDA) -> TTTensor:
    """Grid tensor of the quadratic-plus-cubic nearest-neighbor potential
    ``0.5*sum x_k^2 + lam*sum(x_k^2 x_{k+1} - x_{k+1}^3 / 3)`` as an explicit
    TT chain of rank <= 3 (rank <= 2 for the decoupled ``lam = 0`` case)."""
    if grid.d < 2:
        raise ValueError("need d >= 2")
    g = grid.points()
    ones = np.ones_like(g)
    quad = 0.5 * g**2
    if lam == 0.0:
        first = np.zeros((1, grid.n, 2))
        first[0, :, 0] = ones
        first[0, :, 1] = quad
        mid = np.zeros((2, grid.n, 2))
        mid[0, :, 0] = ones
        mid[0, :, 1] = quad
        mid[1, :, 1] = ones
        last = np.zeros((2, grid.n, 1))
        last[0, :, 0] = quad
        last[1, :, 0] = ones
        return TTTensor([first] + [mid.copy() for _ in range(grid.d - 2)] + [last])
    site = quad - (lam / 3.0) * g**3  # every mode but the first carries the cubic term
    couple_l = g**2
    couple_r = lam * g
    first = np.zeros((1, grid.n, 3))
    first[0, :, 0] = ones
    first[0, :, 1] = couple_l
    first[0, :, 2] = quad
    mid = np.zeros((3, grid.n, 3))
    mid[0, :, 0] = ones
    mid[0, :, 1] = couple_l
    mid[0, :, 2] = site
    mid[1, :, 2] = couple_r
    mid[2, :, 2] = ones
    last = np.zeros((3, grid.n, 1))
    last[0, :, 0] = site
    last[1, :, 0] = couple_r
    last[2, :, 0] = ones
    return TTTensor([first] + [mid.copy() for _ in range(grid.d - 2)] + [last])


def diag_op(v: TTTensor) -> TTOperator:
    """Lift a TT tensor to the diagonal operator with those values."""
    cores = []
    for c in v.cores:
        r0, n, r1 = c.shape
        op = np.zeros((r0, n, n, r1))
        idx = np.arange(n)
        op[:, idx, idx, :] = c
        cores.append(op)
    return TTOperator(cores)


def henon_hamiltonian(grid: GridSpec, lam: float = HENON_LAMBDA) -> TTOperator:
    """Kinetic Kronecker sum plus the diagonal of the discretized potential."""
    return ttop_add(laplace_op(grid.d, grid.n), diag_op(henon_potential(grid, lam)))


def grid_function_tensor(kind: str, grid: GridSpec, **params) -> DenseTensor:
    """Dense tensor of function values on the grid.

    ``kind="hilbert"``: ``1 / (1 + c^T x)`` with ``c_i = i + 1`` by default
    (override with ``c=``), one independent grid per mode.

    ``kind="gauss_qtt"``: ``exp(-alpha x^2)`` sampled on the quantized grid
    of ``n^d`` total points, reshaped to a ``d``-dimensional tensor of mode
    size ``n`` with the linear index running first-index-fastest.
    """
    size = grid.n**grid.d
    if size > dense_size_cap():
        raise ValueError(f"grid size {size} exceeds dense cap {dense_size_cap()}")
    if kind == "hilbert":
        c = params.pop("c", None)
        if params:
            raise ValueError(f"unknown parameters {sorted(params)}")
        c = np.arange(2, grid.d + 2, dtype=np.float64) if c is None else np.asarray(c, dtype=np.float64)
        if c.shape != (grid.d,):
            raise ValueError(f"need {grid.d} coefficients, got {c.shape}")
        pts = grid.points()
        total = np.zeros((grid.n,) * grid.d)
        for i in range(grid.d):
            shape = [1] * grid.d
            shape[i] = grid.n
            total = total + (c[i] * pts).reshape(shape)
        return DenseTensor.from_array(1.0 / (1.0 + total))
    if kind == "gauss_qtt":
        alpha = float(params.pop("alpha", 0.1))
        if params:
            raise ValueError(f"unknown parameters {sorted(params)}")
        t = np.arange(1, size + 1, dtype=np.float64)
        x = grid.lower + t * (grid.upper - grid.lower) / size
        vals = np.exp(-alpha * x**2)
        return DenseTensor((grid.n,) * grid.d, vals)
    raise ValueError(f"unknown grid function kind {kind!r}")
