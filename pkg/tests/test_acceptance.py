"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; tolerances are pinned here and nowhere else.
"""
import numpy as np

from sfett.cli import main as cli_main
from sfett.dense import DenseTensor, inner, norm
from sfett.format import (
    SfEttRank,
    SfEttTensor,
    param_count,
    sfett_random,
    sfett_round,
    sfett_svd_from_dense,
    sfett_to_dense,
)
from sfett.io import load, save, to_bytes
from sfett.oracle import dense_min_eig, unfolding_spectra
from sfett.problems import (
    GridSpec,
    HENON_LAMBDA,
    grid_function_tensor,
    henon_hamiltonian,
    henon_potential,
    laplace_min_eig,
    laplace_op,
)
from sfett.solvers import locg, rstgd
from sfett.tangent import (
    FootGauge,
    construction_operator,
    grad_from_partials,
    manifold_dim,
    partials_from_egrad,
    project,
    realize_dense,
    retract,
    tangent_axpy,
    tangent_inner,
    tangent_norm,
    trivial_tangent,
    zero_tangent,
)
from sfett.tt import tt_to_dense, ttop_to_matrix

from helpers import kron_sum_dense


def report(num: int, name: str, ok: bool, detail: str = ""):
    print(f"ACCEPTANCE {num:2d} [{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num}: {name} {detail}"


def rand_dense(dims, seed):
    return DenseTensor.from_array(np.random.default_rng(seed).standard_normal(dims))


CONFIGS_3 = ((4, 5, 5), 1, SfEttRank(tt=(2, 2), tucker=(2,), shared=2))
CONFIGS_4 = ((4, 4, 5, 5), 2, SfEttRank(tt=(2, 2, 2), tucker=(2, 2), shared=2))


def test_criterion_01_exactness():
    worst = 0.0
    cases = [
        ((4, 6, 6), 1, SfEttRank(tt=(2, 2), tucker=(2,), shared=2)),
        ((4, 6, 6), 1, SfEttRank(tt=(3, 3), tucker=(3,), shared=3)),
        ((3, 4, 5, 5), 2, SfEttRank(tt=(2, 2, 2), tucker=(2, 2), shared=2)),
        ((5, 4, 6, 6), 2, SfEttRank(tt=(2, 3, 2), tucker=(2, 3), shared=2)),
    ]
    for seed in range(20):
        dims, d_t, rk = cases[seed % len(cases)]
        x = sfett_random(dims, d_t, rk, seed=seed)
        d = sfett_to_dense(x)
        out = sfett_round(x, rk)
        worst = max(worst, np.linalg.norm(sfett_to_dense(out).data - d.data) / norm(d))
    # zero-padded representations round back exactly
    pad_worst = 0.0
    for seed in (0, 1):
        dims, d_t, rk = cases[seed]
        x = sfett_random(dims, d_t, rk, seed=100 + seed)
        d = sfett_to_dense(x)
        cores = []
        for k, c in enumerate(x.cores):
            pads = [(0, 0) if k == 0 else (0, 2), (0, 1), (0, 0) if k == x.d - 1 else (0, 2)]
            cores.append(np.pad(c, pads))
        factors = [np.pad(u, ((0, 0), (0, 1))) for u in x.factors]
        shared = np.pad(x.shared_factor, ((0, 0), (0, 1)))
        padded = SfEttTensor(cores, factors, shared, d_t)
        out = sfett_round(padded, rk)
        pad_worst = max(pad_worst, np.linalg.norm(sfett_to_dense(out).data - d.data) / norm(d))
    report(1, "round at native rank is exact", worst <= 1e-11 and pad_worst <= 1e-11,
           f"worst rel {worst:.2e}, padded {pad_worst:.2e}")


def test_criterion_02_quasi_optimality():
    checks = []
    for d, (dims, d_t, rk) in ((3, CONFIGS_3), (4, CONFIGS_4)):
        c_d = np.sqrt(d) + np.sqrt(d) * np.sqrt(d - 1) + np.sqrt(d - 1)
        full = SfEttRank(
            tt=tuple(min(int(np.prod(dims[: k + 1])), int(np.prod(dims[k + 1 :]))) for k in range(d - 1)),
            tucker=tuple(dims[:d_t]),
            shared=dims[d_t],
        )
        for seed in range(20):
            a = rand_dense(dims, 1000 * d + seed)
            p = sfett_svd_from_dense(a, d_t, rk)
            err = np.linalg.norm(sfett_to_dense(p).data - a.data)
            lower = unfolding_spectra(a, d_t).lower_bound(rk)
            checks.append(err <= c_d * lower)
            # structured path on an exact full-rank representation of a
            exact = sfett_svd_from_dense(a, d_t, full)
            assert np.linalg.norm(sfett_to_dense(exact).data - a.data) <= 1e-10 * norm(a)
            rounded = sfett_round(exact, rk)
            err_struct = np.linalg.norm(sfett_to_dense(rounded).data - a.data)
            checks.append(abs(err_struct - err) <= 1e-10 * norm(a))
    report(2, "SVD approximation within C(d) of the lower bound; structured path matches",
           all(checks), f"{sum(checks)}/{len(checks)} checks, C(3)={np.sqrt(3)+np.sqrt(6)+np.sqrt(2):.4f}")


def test_criterion_03_projection_laws():
    worst = 0.0
    for seed in range(20):
        dims, d_t, rk = CONFIGS_3 if seed % 2 == 0 else CONFIGS_4
        g = FootGauge(sfett_random(dims, d_t, rk, seed=seed))
        z, y = rand_dense(dims, 2000 + seed), rand_dense(dims, 3000 + seed)
        pz, py = project(g, z), project(g, y)
        scale = max(norm(z), norm(y))
        # idempotence
        worst = max(worst, np.linalg.norm(
            realize_dense(project(g, realize_dense(pz))).data - realize_dense(pz).data) / scale)
        # self-adjointness
        worst = max(worst, abs(inner(realize_dense(pz), y) - inner(z, realize_dense(py))) / scale**2)
        # linearity
        lin = project(g, DenseTensor(dims, 1.5 * z.data - 0.5 * y.data))
        combo = tangent_axpy([(1.5, pz), (-0.5, py)])
        worst = max(worst, np.linalg.norm(realize_dense(lin).data - realize_dense(combo).data) / scale)
        # gauge conditions
        worst = max(worst, pz.gauge_residual() / max(tangent_norm(pz), 1.0))
        # pairwise orthogonality of the component subspaces
        comps = []
        for i in range(g.d):
            t = zero_tangent(g)
            t.dcores[i] = pz.dcores[i].copy()
            comps.append(realize_dense(t))
        for i in range(g.d_t):
            t = zero_tangent(g)
            t.dfactors[i] = pz.dfactors[i].copy()
            comps.append(realize_dense(t))
        t = zero_tangent(g)
        t.dshared = pz.dshared.copy()
        comps.append(realize_dense(t))
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                worst = max(worst, abs(inner(comps[i], comps[j])) / scale**2)
    report(3, "projection laws (idempotent, self-adjoint, linear, gauge, orthogonal components)",
           worst <= 1e-10, f"worst {worst:.2e}")


def test_criterion_04_manifold_dimension():
    configs = [
        ((4, 5, 5), 1, SfEttRank(tt=(2, 2), tucker=(2,), shared=2)),
        ((4, 5, 5), 1, SfEttRank(tt=(1, 1), tucker=(1,), shared=1)),
        ((2, 2, 3, 3), 2, SfEttRank(tt=(2, 2, 2), tucker=(2, 2), shared=2)),
    ]
    results = []
    for dims, d_t, rk in configs:
        g = FootGauge(sfett_random(dims, d_t, rk, seed=42))
        n = int(np.prod(dims))
        cols = np.zeros((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            cols[:, k] = realize_dense(project(g, DenseTensor(dims, e))).data
        s = np.linalg.svd(cols, compute_uv=False)
        numeric = int(np.sum(s > 1e-8 * s[0]))
        formula = manifold_dim(dims, d_t, rk)
        results.append((numeric, formula))
    ok = all(n == f for n, f in results)
    report(4, "tangent-projector rank equals the dimension formula", ok,
           "; ".join(f"rank={n} formula={f}" for n, f in results))


def test_criterion_05_partials_finite_differences():
    dims, d_t, rk = CONFIGS_3
    g = FootGauge(sfett_random(dims, d_t, rk, seed=11))
    d = sfett_to_dense(g.x)
    h = 1e-5
    theta_s = [np.zeros_like(w) for w in g.left_cores]
    theta_s[-1] = g.wbar[-1].copy()
    theta_b = [np.zeros_like(u) for u in g.x.factors]
    theta_a = np.zeros_like(g.x.shared_factor)

    c = rand_dense(dims, 500)
    a_t = rand_dense(dims, 501)
    cases = [
        (lambda y: inner(y, c), c),  # linear functional, egrad = c
        (lambda y: 0.5 * norm(DenseTensor(dims, a_t.data - y.data)) ** 2,
         DenseTensor(dims, d.data - a_t.data)),  # quadratic, egrad = X - A
    ]
    worst = 0.0
    for f, egrad in cases:
        p = partials_from_egrad(g, egrad)

        def fd_block(bump, shape):
            out = np.zeros(shape)
            for idx in np.ndindex(*shape):
                vals = []
                for sign in (h, -h):
                    s = [w.copy() for w in theta_s]
                    b = [u.copy() for u in theta_b]
                    a = theta_a.copy()
                    bump(s, b, a, idx, sign)
                    vals.append(f(construction_operator(g, s, b, a)))
                out[idx] = (vals[0] - vals[1]) / (2 * h)
            return out

        for i in range(g.d):
            fd = fd_block(lambda s, b, a, idx, v, i=i: s[i].__setitem__(idx, s[i][idx] + v),
                          theta_s[i].shape)
            worst = max(worst, np.linalg.norm(fd - p.ds[i]) / max(np.linalg.norm(p.ds[i]), 1.0))
        for i in range(g.d_t):
            fd = fd_block(lambda s, b, a, idx, v, i=i: b[i].__setitem__(idx, b[i][idx] + v),
                          theta_b[i].shape)
            worst = max(worst, np.linalg.norm(fd - p.db[i]) / max(np.linalg.norm(p.db[i]), 1.0))
        fd = fd_block(lambda s, b, a, idx, v: a.__setitem__(idx, a[idx] + v), theta_a.shape)
        worst = max(worst, np.linalg.norm(fd - p.da) / max(np.linalg.norm(p.da), 1.0))

    # assembled Riemannian gradient equals the projection of the gradient
    egrad = rand_dense(dims, 502)
    ga = grad_from_partials(g, partials_from_egrad(g, egrad))
    pr = project(g, egrad)
    grad_diff = np.linalg.norm(realize_dense(ga).data - realize_dense(pr).data) / norm(egrad)
    report(5, "closed-form partials match finite differences; gradient equals projection",
           worst <= 1e-6 and grad_diff <= 1e-10, f"fd {worst:.2e}, grad {grad_diff:.2e}")


def test_criterion_06_retraction():
    dims, d_t, rk = CONFIGS_3
    worst_zero = 0.0
    worst_ratio = np.inf
    for seed in range(5):
        g = FootGauge(sfett_random(dims, d_t, rk, seed=seed))
        d = sfett_to_dense(g.x)
        r0 = retract(g, zero_tangent(g), rk)
        worst_zero = max(worst_zero, np.linalg.norm(sfett_to_dense(r0).data - d.data))
        xi = project(g, rand_dense(dims, 600 + seed))
        xi = tangent_axpy([(0.1 / tangent_norm(xi), xi)])
        xid = realize_dense(xi)
        errs = []
        for t in (1e-1, 1e-2, 1e-3):
            rt = retract(g, tangent_axpy([(t, xi)]), rk)
            errs.append(np.linalg.norm(sfett_to_dense(rt).data - (d.data + t * xid.data)))
        worst_ratio = min(worst_ratio, errs[0] / errs[1], errs[1] / errs[2])
    report(6, "retraction: R(X,0)=X and second-order agreement",
           worst_zero <= 1e-12 and worst_ratio >= 50,
           f"R(X,0) err {worst_zero:.2e}, worst decay ratio {worst_ratio:.0f}")


def test_criterion_07_rstgd():
    grid = GridSpec(4, 8)
    a = grid_function_tensor("hilbert", grid)
    a_norm = norm(a)
    ok = True
    details = []
    for d_t in (3, 1):  # d_s = 1 (no-sharing baseline) and d_s = 3
        rk = SfEttRank.uniform(4, d_t, 2, 2, 2)
        x0 = sfett_svd_from_dense(a, d_t, rk)
        e0 = np.linalg.norm(a.data - sfett_to_dense(x0).data) / a_norm
        # line-search orthogonality at the first step, pre-retraction
        g = FootGauge(x0)
        hdir = project(g, DenseTensor(a.dims, a.data - sfett_to_dense(x0).data))
        hn2 = tangent_inner(hdir, hdir)
        hreal = realize_dense(hdir)
        alpha = (inner(a, hreal) - tangent_inner(trivial_tangent(g), hdir)) / hn2
        ls = np.dot(a.data - sfett_to_dense(x0).data - alpha * hreal.data, hreal.data)
        ls_rel = abs(ls) / (np.sqrt(hn2) * np.linalg.norm(a.data - sfett_to_dense(x0).data))
        ok &= ls_rel <= 1e-9
        x1, trace = rstgd(a, x0, x0.rank, max_iters=40)
        e1 = np.linalg.norm(a.data - sfett_to_dense(x1).data) / a_norm
        objs = [r.value for r in trace.records]
        ok &= all(objs[i + 1] <= objs[i] for i in range(len(objs) - 1))
        ok &= e1 <= e0 + 1e-15
        details.append(f"d_s={4 - d_t}: {e0:.3e}->{e1:.3e} ls {ls_rel:.1e}")
    report(7, "RStGD monotone, exact line search, never worsens the SVD init", ok,
           "; ".join(details))


def test_criterion_08_laplace_eigenproblem():
    ok = True
    details = []
    for d, n in ((4, 16), (6, 16), (4, 32)):
        op = laplace_op(d, n)
        rk = SfEttRank.uniform(d, 1, 1, 1, 1)
        x0 = sfett_random((n,) * d, 1, rk, seed=0)
        theta, _, trace = locg(op, x0, rk, max_iters=100, tol=1e-12)
        ref = laplace_min_eig(d, n)
        rel = abs(theta - ref) / ref
        vals = [r.value for r in trace.records]
        mono = all(vals[i + 1] <= vals[i] + 1e-8 * abs(vals[i]) for i in range(len(vals) - 1))
        ok &= rel <= 1e-8 and len(trace) <= 101 and mono
        details.append(f"d={d},n={n}: rel {rel:.1e} in {len(trace) - 1} iters")
    report(8, "LOCG reaches the analytic Laplace eigenvalue", ok, "; ".join(details))


def test_criterion_09_henon_heiles():
    ok = True
    details = []
    for d in (2, 3):
        grid = GridSpec(d, 8, -1.0, 1.0)
        h = henon_hamiltonian(grid, HENON_LAMBDA)
        ref, _ = dense_min_eig(ttop_to_matrix(h))
        rk = SfEttRank.uniform(d, 1, 2, 2, 2)
        x0 = sfett_random((8,) * d, 1, rk, seed=0)
        theta, _, trace = locg(h, x0, rk, max_iters=200, tol=1e-12)
        rel = abs(theta - ref) / abs(ref)
        ok &= rel <= 1e-4 and len(trace) <= 201
        details.append(f"d={d}: rel {rel:.1e}")
        v = henon_potential(grid, HENON_LAMBDA)
        ok &= max(v.ranks) <= 3
        pts = grid.points()
        vd = tt_to_dense(v).array
        worst = 0.0
        for idx in np.ndindex(*(8,) * d):
            x = [pts[i] for i in idx]
            refv = 0.5 * sum(t * t for t in x) + HENON_LAMBDA * sum(
                x[k] ** 2 * x[k + 1] - x[k + 1] ** 3 / 3.0 for k in range(d - 1)
            )
            worst = max(worst, abs(vd[idx] - refv))
        ok &= worst <= 1e-10
    report(9, "LOCG Henon-Heiles eigenvalue vs dense oracle; potential rank <= 3, pointwise exact",
           ok, "; ".join(details))


def test_criterion_10_operator_constructions():
    l = laplace_op(4, 5)
    rank_ok = l.ranks == (2, 2, 2)
    a = 2.0 * np.eye(5) - np.eye(5, k=1) - np.eye(5, k=-1)
    dense_err = np.abs(ttop_to_matrix(laplace_op(3, 5)) - kron_sum_dense([a] * 3)).max()
    hm = ttop_to_matrix(henon_hamiltonian(GridSpec(3, 6, -5.0, 5.0)))
    sym_err = np.abs(hm - hm.T).max()
    report(10, "Laplace TT rank exactly 2, Kronecker-sum equality; Hamiltonian symmetric",
           rank_ok and dense_err <= 1e-12 and sym_err <= 1e-12,
           f"dense {dense_err:.1e}, sym {sym_err:.1e}")


def test_criterion_11_parameter_economy():
    ok = True
    details = []
    for d, n_s, r in ((4, 6, 2), (5, 8, 3)):
        rk = SfEttRank(tt=(r,) * (d - 1), tucker=(r,), shared=r)
        x = sfett_random((n_s,) * d, 1, rk, seed=0)
        ett = SfEttTensor(
            [c.copy() for c in x.cores],
            [x.factors[0]] + [x.shared_factor.copy() for _ in range(d - 2)],
            x.shared_factor.copy(),
            d_t=d - 1,
        )
        assert np.allclose(sfett_to_dense(ett).data, sfett_to_dense(x).data, atol=1e-12)
        gap = param_count(ett) - param_count(x)
        expected = (x.d_s - 1) * n_s * r
        ok &= param_count(x) < param_count(ett) and gap == expected
        details.append(f"d={d}: gap {gap} = (d_s-1)*n_s*r = {expected}")
    report(11, "factor sharing saves (d_s-1)*n_s*r_s parameters", ok, "; ".join(details))


def test_criterion_12_determinism_and_serialization(tmp_path):
    def strip_timing(text, cols):
        out = []
        for line in text.splitlines():
            if line.startswith("#"):
                out.append(line)
                continue
            cells = line.split(",")
            out.append(",".join(c for i, c in enumerate(cells) if i not in cols))
        return "\n".join(out)

    runs = []
    for name in ("a1.csv", "a2.csv"):
        p = tmp_path / name
        cli_main(["approx", "--func", "hilbert", "--d", "3", "--n", "6", "--steps", "3",
                  "--seed", "5", "--max-iters", "10", "--out", str(p)])
        runs.append(strip_timing(p.read_text(), (8,)))
    approx_ok = runs[0] == runs[1]

    runs = []
    for name in ("e1.csv", "e2.csv"):
        p = tmp_path / name
        cli_main(["eigs", "--op", "laplace", "--d", "3", "--n", "6", "--max-iters", "25",
                  "--seed", "5", "--out", str(p)])
        runs.append(strip_timing(p.read_text(), (3,)))
    eigs_ok = runs[0] == runs[1]

    x = sfett_random((4, 5, 5), 1, SfEttRank(tt=(2, 2), tucker=(2,), shared=2), seed=77)
    p1, p2 = tmp_path / "x1.sfett", tmp_path / "x2.sfett"
    save(p1, x)
    y = load(p1)
    save(p2, y)
    io_ok = p1.read_bytes() == p2.read_bytes() == to_bytes(x)
    report(12, "CSV determinism (timing excluded) and bit-identical serialization",
           approx_ok and eigs_ok and io_ok)
