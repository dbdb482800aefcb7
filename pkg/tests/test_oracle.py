import numpy as np
import pytest

from sfett.dense import DenseTensor, inner, norm
from sfett.format import SfEttRank, sfett_random, sfett_to_dense
from sfett.oracle import dense_min_eig, fd_gradient, unfolding_spectra
from sfett.problems import laplace_op
from sfett.tt import ttop_to_matrix

rng = np.random.default_rng(404)


def test_spectra_of_exact_tensor():
    rk = SfEttRank(tt=(2, 2), tucker=(2,), shared=2)
    x = sfett_random((4, 5, 5), 1, rk, seed=0)
    rep = unfolding_spectra(sfett_to_dense(x), 1)
    assert rep.ranks() == rk
    assert rep.lower_bound(rk) <= 1e-10


def test_spectra_rank1_symmetric():
    u = rng.standard_normal(5)
    x = DenseTensor.from_array(np.einsum("i,j,k->ijk", u, u, u))
    rep = unfolding_spectra(x, 1)
    assert rep.ranks() == SfEttRank(tt=(1, 1), tucker=(1,), shared=1)


def test_lower_bound_zero_for_exact_rank():
    rk = SfEttRank(tt=(3, 2), tucker=(3,), shared=2)
    x = sfett_random((4, 5, 5), 1, rk, seed=1)
    d = sfett_to_dense(x)
    rep = unfolding_spectra(d, 1)
    assert rep.lower_bound(rk) <= 1e-10 * norm(d)


def test_spectra_requires_equal_shared_modes():
    with pytest.raises(ValueError):
        unfolding_spectra(DenseTensor.from_array(rng.standard_normal((3, 4, 5))), 1)


def test_fd_gradient_linear_functional():
    c = DenseTensor.from_array(rng.standard_normal((3, 3, 2)))
    g = fd_gradient(lambda t: inner(t, c), DenseTensor.from_array(rng.standard_normal((3, 3, 2))))
    assert np.allclose(g.data, c.data, atol=1e-8)


def test_fd_gradient_quadratics():
    x = DenseTensor.from_array(rng.standard_normal((3, 3, 2)))
    g = fd_gradient(lambda t: 0.5 * norm(t) ** 2, x)
    assert np.allclose(g.data, x.data, atol=1e-9)
    a = DenseTensor.from_array(rng.standard_normal((3, 3, 2)))
    g = fd_gradient(lambda t: 0.5 * norm(DenseTensor(t.dims, t.data - a.data)) ** 2, x)
    ref = x.data - a.data
    assert np.linalg.norm(g.data - ref) <= 1e-7 * np.linalg.norm(ref)


def test_fd_gradient_second_order_convergence():
    # smooth non-polynomial: halving h quarters the error
    x = DenseTensor.from_array(rng.standard_normal((2, 2)))

    def f(t):
        return float(np.sum(np.sin(t.data)))

    exact = np.cos(x.data)
    e1 = np.linalg.norm(fd_gradient(f, x, h=2e-2).data - exact)
    e2 = np.linalg.norm(fd_gradient(f, x, h=1e-2).data - exact)
    assert e1 / e2 == pytest.approx(4.0, rel=0.1)


def test_fd_gradient_nonfinite():
    x = DenseTensor.from_array(np.zeros((2, 2)))
    with pytest.raises(FloatingPointError):
        fd_gradient(lambda t: float("nan"), x)


def test_dense_min_eig_diag():
    lam, v = dense_min_eig(np.diag([3.0, 1.0, 2.0]))
    assert lam == 1.0
    assert np.allclose(np.abs(v), [0.0, 1.0, 0.0], atol=1e-12)


def test_dense_min_eig_laplace_analytic():
    lam, v = dense_min_eig(ttop_to_matrix(laplace_op(2, 4)))
    assert np.isclose(lam, 2.0 * 4.0 * np.sin(np.pi / 10) ** 2, atol=1e-12)
    h = ttop_to_matrix(laplace_op(2, 4))
    assert np.linalg.norm(h @ v - lam * v) <= 1e-9 * np.linalg.norm(h)


def test_dense_min_eig_guards():
    with pytest.raises(ValueError):
        dense_min_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        dense_min_eig(np.zeros((5000, 5000)))
