"""Shared-factor extended tensor-train format with SVD-based rounding and a
Riemannian optimization toolkit on the fixed-rank manifold."""

from .dense import (
    DenseTensor,
    SvdResult,
    dematricize,
    fold,
    inner,
    matricize,
    multilinear_product,
    norm,
    truncated_svd,
    unfold,
)
from .format import (
    SfEttRank,
    SfEttTensor,
    param_count,
    sfett_add,
    sfett_from_tt,
    sfett_inner,
    sfett_norm,
    sfett_orthogonalize,
    sfett_random,
    sfett_round,
    sfett_scale,
    sfett_svd_from_dense,
    sfett_to_dense,
    sfett_to_tt,
)
from .oracle import SpectraReport, dense_min_eig, fd_gradient, unfolding_spectra
from .problems import (
    GridSpec,
    HENON_LAMBDA,
    grid_function_tensor,
    henon_hamiltonian,
    henon_potential,
    laplace_op,
)
from .solvers import SolveTrace, locg, rayleigh_ritz, rstgd
from .tangent import (
    EuclideanPartials,
    FootGauge,
    TangentVector,
    grad_from_partials,
    manifold_dim,
    partials_from_egrad,
    project,
    retract,
    tangent_to_sfett,
    transport,
)
from .tt import (
    TTOperator,
    TTTensor,
    tt_add,
    tt_inner,
    tt_interfaces,
    tt_orthogonalize,
    tt_round,
    tt_scale,
    tt_svd,
    tt_to_dense,
    ttop_add,
    ttop_apply,
)
from . import io

__all__ = [name for name in dir() if not name.startswith("_")]
