"""Command-line front end.

Exit codes: 0 success, 1 validation or usage error, 2 numerical failure or failing probe.
"""
import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import geometry, io, kernels, operators, potentials, tdcq, verify
from .errors import NumericalError, ValidationError


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def default_threads():
    env = os.environ.get("THERMO_TDBEM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"THERMO_TDBEM_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _emit(text, out):
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _material(args):
    return io.load_material(args.config) if args.config else verify.DEFAULT_MATERIAL


# --- subcommands -------------------------------------------------------------------------

def cmd_mesh_make(args):
    if args.shape == "sphere":
        mesh = geometry.make_mesh("sphere", refinement=args.refinement, radius=args.radius)
        ref = 4 * np.pi * args.radius**2
    elif args.shape == "ellipse":
        mesh = geometry.make_mesh("ellipse", args.n, a=args.a, b=args.b)
        ref = None
    else:
        mesh = geometry.make_mesh("circle", args.n, radius=args.radius)
        ref = 2 * np.pi * args.radius
    d = mesh.to_dict()
    d["seed"] = args.seed
    _emit(io.dumps(d), args.out)
    total = float(np.sum(mesh.weights))
    msg = f"sum of weights = {total:.17g}"
    if ref is not None:
        msg += f" (exact {ref:.17g}, relative difference {abs(total - ref) / ref:.3e})"
    print(msg, file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_kernel_eval(args):
    m = _material(args)
    s = io.parse_complex(args.s)
    x, y = io.parse_point(args.x, args.dim), io.parse_point(args.y, args.dim)
    E = kernels.fundamental_matrix(args.dim, m, s, x, y).entries
    out = {"dim": args.dim, "s": io.pair(s), "seed": args.seed,
           "entries": [[io.pair(z) for z in row] for row in E]}
    _emit(io.dumps(out), args.out)
    return 0


def _report_out(reports, args):
    failed = [r.name for r in reports if not r.passed]
    for r in reports:
        if r.seed is None:
            r.seed = args.seed
    if getattr(args, "out", None):
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        for r in reports:
            io.write_text(d / f"{r.name}.json", r.to_json())
            io.write_text(d / f"{r.name}.csv", r.to_csv())
    for r in reports:
        print(f"{r.name}: {'PASS' if r.passed else 'FAIL'}")
    if failed:
        print("failing probes: " + ", ".join(failed), file=sys.stderr)
        return 2
    return 0


def cmd_kernel_residual(args):
    m = _material(args)
    s = io.parse_complex(args.s)
    rep = verify.pde_residual_fd("E_adjoint" if args.adjoint else "E", args.dim, m, s, n=args.n,
                                 seed=args.seed)
    return _report_out([rep], args)


def cmd_assemble(args):
    m, mesh = _material(args), io.load_mesh(args.mesh)
    s = io.parse_complex(args.s)
    A = operators.assemble(args.kind, m, s, mesh)
    d = io.matrix_to_dict(A)
    d["seed"] = args.seed
    _emit(io.dumps(d), args.out)
    return 0


def _boundary_source(args, m, s, mesh):
    y0 = io.parse_point(args.source, mesh.dim)
    c = np.array([io.parse_complex(v) for v in args.charge.split(",")]) if args.charge else \
        np.ones(mesh.dim + 1, dtype=complex)
    if len(c) != mesh.dim + 1:
        raise ValidationError(f"--charge needs {mesh.dim + 1} components")
    return y0, c


def cmd_solve_laplace(args):
    m, mesh = _material(args), io.load_mesh(args.mesh)
    s = io.parse_complex(args.s)
    probes = io.parse_points(args.probes, mesh.dim)
    kc = kernels.kernel_coeffs(mesh.dim, m, s)
    exact = None
    if args.data:
        g = io.density_from_dict(io.load_json(args.data))
    else:
        y0, c = _boundary_source(args, m, s, mesh)
        E, dE = kernels.kernel_tensors(kc, mesh.nodes - y0, 1)
        v, gr = E @ c, np.einsum("tabl,b->tal", dE, c)
        if args.problem == "dirichlet":
            g = operators.Density(v.reshape(-1), "plus_half")
        else:
            from .traces import conormal_rows
            g = operators.Density(conormal_rows(kc, v, gr, mesh.normals).reshape(-1), "minus_half")
        exact = kernels.kernel_tensors(kc, probes - y0, 0)[0] @ c
    if args.problem == "dirichlet":
        dens = operators.solve_boundary_system(operators.assemble("V", m, s, mesh), g)
        kind = "S"
    else:
        W = operators.assemble("W", m, s, mesh)
        dens = operators.solve_boundary_system(W, operators.Density(-g.values, g.space))
        kind = "D"
    u = potentials.field_arrays(kind, m, s, mesh, dens, probes, grad=False)[0]
    if args.out_density:
        d = io.density_to_dict(dens, mesh.mesh_id, s)
        d["seed"] = args.seed
        io.write_text(args.out_density, io.dumps(d))
    _emit(io.field_csv(probes, u), args.out)
    if exact is not None:
        err = float(np.max(np.abs(u - exact)) / np.max(np.abs(exact)))
        print(json.dumps({"relative_error": err, "cond": dens.cond}), file=sys.stderr)
    return 0


def cmd_solve_td(args):
    m, mesh = _material(args), io.load_mesh(args.mesh)
    cfg_raw = io.load_json(args.td_config)
    try:
        grid = tdcq.TimeGrid(float(cfg_raw["dt"]), int(cfg_raw["n_steps"]))
    except KeyError as e:
        raise ValidationError(f"time-grid config missing {e}") from None
    cfg = tdcq.CQConfig(cfg_raw.get("scheme", "bdf2"), threads=args.threads)
    probes = io.parse_points(args.probes, mesh.dim)
    y0, c = _boundary_source(args, None, None, mesh)
    onset = args.onset if args.onset is not None else grid.T / 4
    prof = tdcq.causal_window(grid.times, onset, args.width)
    sig = tdcq.Signal(prof[:, None], grid.dt)
    src = tdcq.point_source_symbol(m, mesh.dim, y0, c)
    if args.problem == "dirichlet":
        data = tdcq.cq_convolve(lambda s: src(mesh.nodes)(s)[:, None], grid, cfg, sig, hermitian=True)
    else:
        from .traces import conormal_rows

        def traction(s):
            kc = kernels.kernel_coeffs(mesh.dim, m, s)
            E, dE = kernels.kernel_tensors(kc, mesh.nodes - y0, 1)
            return conormal_rows(kc, E @ c, np.einsum("tabl,b->tal", dE, c), mesh.normals).reshape(-1, 1)
        data = tdcq.cq_convolve(traction, grid, cfg, sig, hermitian=True)
    dens, field = tdcq.cq_solve_bvp(args.problem, m, mesh, grid, cfg, data, probes)
    if args.out_density:
        io.write_text(args.out_density, io.signal_csv(grid.times, dens.samples))
    labels = [f"p{p}c{k}" for p in range(len(probes)) for k in range(mesh.dim + 1)]
    _emit(io.signal_csv(grid.times, field.samples, labels), args.out)
    return 0


VERIFY_SUITES = ("dispersion", "jumps", "coercivity", "growth", "normequiv", "manufactured", "all")


def run_suite(name, args):
    m = io.load_material(args.config) if args.config else None
    mesh = io.load_mesh(args.mesh) if args.mesh else None
    seed = args.seed
    reps = []
    if name in ("dispersion", "all"):
        reps += [verify.dispersion_probe(seed=seed), verify.partial_fraction_probe(seed=seed),
                 verify.decoupling_probe(seed=seed)]
    if name == "all":
        mm = m or verify.DEFAULT_MATERIAL
        for kind in ("E", "E_adjoint"):
            for dim in (2, 3):
                reps.append(verify.pde_residual_fd(kind, dim, mm, seed=seed))
        reps += [verify.yukawa_residual_fd(2, seed=seed), verify.yukawa_residual_fd(3, seed=seed)]
    if name in ("jumps", "all"):
        reps += [verify.jump_test(k, m=m or verify.DEFAULT_MATERIAL) for k in ("S", "D")]
    if name in ("manufactured", "all"):
        mm = m or verify.DEFAULT_MATERIAL
        reps += [verify.manufactured_test(2, "dirichlet", mm), verify.manufactured_test(3, "dirichlet", mm),
                 verify.manufactured_test(2, "neumann", mm), verify.second_kind_crosscheck(mm)]
    if name in ("coercivity", "all"):
        reps.append(verify.coercivity_probe(m or verify.PROBE_MATERIAL, mesh))
    if name in ("growth", "all"):
        reps += verify.norm_growth_probe(m=m or verify.PROBE_MATERIAL, mesh=mesh)
    if name in ("normequiv", "all"):
        reps += [verify.norm_equivalence_probe(m or verify.DEFAULT_MATERIAL, seed=seed),
                 verify.scalar_inequality_probe(seed=seed)]
    if name == "all":
        reps += verify.cq_probes()
        reps.append(verify.td_dirichlet_probe(m or verify.DEFAULT_MATERIAL))
    return reps


def cmd_verify(args):
    return _report_out(run_suite(args.suite, args), args)


# --- parser ------------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed recorded in outputs")
    common.add_argument("--threads", type=int, default=None, help="worker cap (env THERMO_TDBEM_THREADS)")

    p = _Parser(prog="thermo-tdbem", description="Thermoelastic boundary integral solvers and probes.")
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    mesh = sub.add_parser("mesh", help="mesh generation").add_subparsers(dest="action", required=True,
                                                                         parser_class=_Parser)
    mk = mesh.add_parser("make", parents=[common], help="build a circle, ellipse or sphere mesh")
    mk.add_argument("shape", choices=("circle", "ellipse", "sphere"))
    mk.add_argument("--radius", type=float, default=1.0)
    mk.add_argument("--n", type=int, default=64, help="curve resolution (2N nodes)")
    mk.add_argument("--a", type=float, default=1.0)
    mk.add_argument("--b", type=float, default=0.5)
    mk.add_argument("--refinement", type=int, default=2)
    mk.add_argument("--out")
    mk.set_defaults(func=cmd_mesh_make)

    ker = sub.add_parser("kernel", help="fundamental solution").add_subparsers(dest="action", required=True,
                                                                               parser_class=_Parser)
    ev = ker.add_parser("eval", parents=[common], help="evaluate E(x, y; s)")
    ev.add_argument("--dim", type=int, choices=(2, 3), required=True)
    ev.add_argument("--config")
    ev.add_argument("--s", required=True)
    ev.add_argument("--x", required=True)
    ev.add_argument("--y", required=True)
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_kernel_eval)
    rs = ker.add_parser("residual", parents=[common], help="finite-difference PDE residual of E")
    rs.add_argument("--dim", type=int, choices=(2, 3), required=True)
    rs.add_argument("--config")
    rs.add_argument("--s", default="1+1i")
    rs.add_argument("--n", type=int, default=50)
    rs.add_argument("--adjoint", action="store_true")
    rs.add_argument("--out")
    rs.set_defaults(func=cmd_kernel_residual)

    asm = sub.add_parser("assemble", parents=[common], help="assemble a boundary operator")
    asm.add_argument("--kind", choices=operators.KINDS, required=True)
    asm.add_argument("--s", required=True)
    asm.add_argument("--mesh", required=True)
    asm.add_argument("--config")
    asm.add_argument("--out")
    asm.set_defaults(func=cmd_assemble)

    solve = sub.add_parser("solve", help="boundary value problems").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name, func in (("laplace", cmd_solve_laplace), ("td", cmd_solve_td)):
        sp = solve.add_parser(name, parents=[common])
        sp.add_argument("--problem", choices=("dirichlet", "neumann"), default="dirichlet")
        sp.add_argument("--mesh", required=True)
        sp.add_argument("--config")
        sp.add_argument("--source", default=None, help="interior point source location x,y(,z)")
        sp.add_argument("--charge", default=None, help="source strength, comma-separated a+bi")
        sp.add_argument("--probes", required=True, help="x,y;x,y;...")
        sp.add_argument("--out-density")
        sp.add_argument("--out")
        if name == "laplace":
            sp.add_argument("--s", required=True)
            sp.add_argument("--data", help="boundary data as a density JSON (instead of --source)")
        else:
            sp.add_argument("--td-config", required=True, help='{"scheme":"bdf2","dt":..,"n_steps":..}')
            sp.add_argument("--onset", type=float, default=None)
            sp.add_argument("--width", type=float, default=1.0)
        sp.set_defaults(func=func)

    vf = sub.add_parser("verify", parents=[common], help="run probe suites")
    vf.add_argument("suite", choices=VERIFY_SUITES)
    vf.add_argument("--config")
    vf.add_argument("--mesh")
    vf.add_argument("--out")
    vf.set_defaults(func=cmd_verify)
    return p


def run_command(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is None:
            args.threads = default_threads()
        if args.func in (cmd_solve_laplace, cmd_solve_td) and not getattr(args, "data", None) and not args.source:
            args.source = ",".join(["0.1"] * (io.load_mesh(args.mesh).dim))
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_command())
