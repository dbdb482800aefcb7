"""Batch experiment harness: rank-sweep approximation runs, eigensolver runs,
and tensor-file utilities, all emitting CSV.

Commands are deterministic per seed: identical CSV bytes across runs except
for the timing columns.
"""
from __future__ import annotations

import argparse
import sys
import time

from .dense import DenseTensor, norm as dense_norm
from .format import (
    SfEttRank,
    sfett_random,
    sfett_svd_from_dense,
    sfett_to_dense,
    param_count,
)
from .io import load, save
from .oracle import dense_min_eig
from .problems import (
    GridSpec,
    HENON_LAMBDA,
    grid_function_tensor,
    henon_hamiltonian,
    laplace_min_eig,
    laplace_op,
)
from .solvers import locg, rstgd
from .tt import ttop_to_matrix

APPROX_SCHEMA = "# sfett approx csv v1: shared_count,rtt,rt,rts,param_count,rel_err_svd,rel_err_rsgd,iters,time_ms"
EIGS_SCHEMA = "# sfett eigs csv v1: iter,theta,resid_norm,time_ms ; footer: final,theta,rel_err,"


def _fmt(x: float) -> str:
    return repr(float(x))


def _write(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as f:
            f.write(text)


def rank_schedule(dims, d_t: int, steps: int):
    """All-ones start; alternate bumping the Tucker block (distinct and
    shared ranks together) and the TT block by one, clamping each entry at
    feasibility."""
    d = len(dims)
    n_s = dims[d_t]
    rtt, rt = 1, 1
    out = []
    for step in range(steps):
        tucker = tuple(min(rt, dims[i]) for i in range(d_t))
        shared = min(rt, n_s)
        bonds = [1] + [rtt] * (d - 1) + [1]
        modes = list(tucker) + [shared] * (d - d_t)
        for k in range(1, d):
            left = min(bonds[k - 1] * modes[k - 1], bonds[k])
            bonds[k] = left
        for k in range(d - 1, 0, -1):
            bonds[k] = min(bonds[k], modes[k] * bonds[k + 1])
        out.append(SfEttRank(tt=tuple(bonds[1:d]), tucker=tucker, shared=shared))
        if step % 2 == 0:
            rt += 1
        else:
            rtt += 1
    return out


def cmd_approx(args) -> int:
    grid = GridSpec(args.d, args.n, args.lower, args.upper)
    if args.func == "hilbert":
        target = grid_function_tensor("hilbert", grid)
    else:
        target = grid_function_tensor("gauss_qtt", grid, alpha=args.alpha)
    a_norm = dense_norm(target)
    lines = [APPROX_SCHEMA]
    for ranks in rank_schedule(target.dims, args.d_t, args.steps):
        t0 = time.perf_counter()
        x0 = sfett_svd_from_dense(target, args.d_t, ranks)
        err_svd = dense_norm(
            DenseTensor(target.dims, target.data - sfett_to_dense(x0).data)
        ) / a_norm
        err_rsgd, iters = "", ""
        if args.rsgd:
            x1, trace = rstgd(target, x0, x0.rank, max_iters=args.max_iters)
            err_rsgd = _fmt(
                dense_norm(DenseTensor(target.dims, target.data - sfett_to_dense(x1).data))
                / a_norm
            )
            iters = str(len(trace))
        ms = (time.perf_counter() - t0) * 1e3
        actual = x0.rank
        lines.append(
            ",".join(
                [
                    str(len(target.dims) - args.d_t),
                    str(max(actual.tt)),
                    str(max(actual.tucker)),
                    str(actual.shared),
                    str(param_count(x0)),
                    _fmt(err_svd),
                    err_rsgd,
                    iters,
                    _fmt(ms),
                ]
            )
        )
    _write(lines, args.out)
    return 0


def cmd_eigs(args) -> int:
    dims = (args.n,) * args.d
    if args.op == "laplace":
        op = laplace_op(args.d, args.n)
        reference = laplace_min_eig(args.d, args.n)
    else:
        grid = GridSpec(args.d, args.n, args.lower, args.upper)
        op = henon_hamiltonian(grid, args.lam)
        reference = None
        if args.n**args.d <= 4096:
            reference, _ = dense_min_eig(ttop_to_matrix(op))
    ranks = SfEttRank.uniform(args.d, args.d_t, args.rtt, args.rt, args.rts)
    x0 = sfett_random(dims, args.d_t, ranks, seed=args.seed)
    theta, _, trace = locg(op, x0, ranks, max_iters=args.max_iters, tol=args.tol)
    lines = [EIGS_SCHEMA]
    for rec in trace.records:
        lines.append(
            ",".join([str(rec.k), _fmt(rec.value), _fmt(rec.resid), _fmt(rec.time_ms)])
        )
    if reference is not None:
        rel = abs(theta - reference) / abs(reference)
        lines.append(",".join(["final", _fmt(theta), _fmt(rel), ""]))
    else:
        lines.append(",".join(["final", _fmt(theta), "", ""]))
    _write(lines, args.out)
    return 0


def cmd_round(args) -> int:
    from .format import sfett_round

    x = load(args.infile)
    d, d_t = x.d, x.d_t
    ranks = SfEttRank.uniform(d, d_t, args.rtt, args.rt, args.rts)
    save(args.out, sfett_round(x, ranks))
    return 0


def cmd_info(args) -> int:
    x = load(args.infile)
    r = x.rank
    sys.stdout.write(
        "dims={} d_t={} d_s={} rtt={} rt={} rts={} params={}\n".format(
            x.dims, x.d_t, x.d_s, r.tt, r.tucker, r.shared, param_count(x)
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfett", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ap = sub.add_parser("approx", help="rank-sweep approximation benchmark")
    ap.add_argument("--func", choices=["hilbert", "gauss_qtt"], default="hilbert")
    ap.add_argument("--d", type=int, required=True)
    ap.add_argument("--n", type=int, required=True)
    ap.add_argument("--d-t", dest="d_t", type=int, default=1)
    ap.add_argument("--steps", type=int, default=4)
    ap.add_argument("--rsgd", action=argparse.BooleanOptionalAction, default=True)
    ap.add_argument("--max-iters", type=int, default=50)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--lower", type=float, default=0.0)
    ap.add_argument("--upper", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    ap.set_defaults(func_cmd=cmd_approx)

    ep = sub.add_parser("eigs", help="smallest-eigenpair benchmark")
    ep.add_argument("--op", choices=["laplace", "henon"], default="laplace")
    ep.add_argument("--d", type=int, required=True)
    ep.add_argument("--n", type=int, required=True)
    ep.add_argument("--d-t", dest="d_t", type=int, default=1)
    ep.add_argument("--rtt", type=int, default=1)
    ep.add_argument("--rt", type=int, default=1)
    ep.add_argument("--rts", type=int, default=1)
    ep.add_argument("--lower", type=float, default=-5.0)
    ep.add_argument("--upper", type=float, default=5.0)
    ep.add_argument("--lam", type=float, default=HENON_LAMBDA)
    ep.add_argument("--max-iters", type=int, default=500)
    ep.add_argument("--tol", type=float, default=1e-8)
    ep.add_argument("--seed", type=int, default=0)
    ep.add_argument("--out", default=None)
    ep.set_defaults(func_cmd=cmd_eigs)

    rp = sub.add_parser("round", help="round a tensor file to new ranks")
    rp.add_argument("--in", dest="infile", required=True)
    rp.add_argument("--out", required=True)
    rp.add_argument("--rtt", type=int, required=True)
    rp.add_argument("--rt", type=int, required=True)
    rp.add_argument("--rts", type=int, required=True)
    rp.set_defaults(func_cmd=cmd_round)

    ip = sub.add_parser("info", help="describe a tensor file")
    ip.add_argument("--in", dest="infile", required=True)
    ip.set_defaults(func_cmd=cmd_info)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func_cmd(args)


if __name__ == "__main__":
    sys.exit(main())
