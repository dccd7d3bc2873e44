"""Command-line front end.

Every subcommand that writes a file also writes ``<output>.manifest``: flat
``key=value`` lines holding the full configuration, the tool version and
the wall time. ``spinlat replay <manifest>`` reruns the recorded command.

Exit codes: 0 success, 1 usage, 2 validation, 3 convergence or budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from spinlat import __version__
from spinlat.errors import BudgetExceeded, ConvergenceFailure, InvalidArgument, SpinlatError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_CONVERGENCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one line, like every other failure; --help has the full usage
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    from spinlat.sweep import make_grid

    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            return make_grid(start, stop, step)
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise InvalidArgument(f"bad grid {text!r}; use start:stop:step or a comma list") from None


def parse_block(text: str, g, seed: int = 0):
    from spinlat.lattice import connected_block, ring_block
    from spinlat.sweep import default_block

    if text == "auto":
        return default_block(g, seed)
    if text == "ring:inner":
        return ring_block(g)
    if text == "ring:outer":
        inner = ring_block(g)
        return tuple(range(len(inner), g.n))
    if text.startswith("random"):
        _, _, s = text.partition(":")
        return connected_block(g, g.n // 2, seed=int(s) if s else seed)
    try:
        return tuple(sorted(int(v) for v in text.split(",")))
    except ValueError:
        raise InvalidArgument(f"bad block {text!r}; use ring:inner, ring:outer, random[:seed] or 0,1,2") from None


def parse_sizes(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise InvalidArgument(f"bad size list {text!r}") from None


# -- subcommands ------------------------------------------------------------

def cmd_gen(args, out):
    from spinlat.lattice import dumps, resolve_graphs

    sources = list(args.graph or [])
    if args.generator:
        if args.generator != "ladder" or args.n is None:
            raise InvalidArgument("generator form is `gen ladder --n <N>`")
        sources.insert(0, f"ladder:{args.n}")
    if not sources:
        raise InvalidArgument("nothing to generate; give `ladder --n <N>` or --graph")
    graphs = [g for src in sources for g in resolve_graphs(src, args.long_run)]
    _emit(args, out, dumps(graphs))


def cmd_enum(args, out):
    from spinlat.lattice import dumps, enumerate_cubic

    graphs = enumerate_cubic(args.n, planar_only=args.planar, long_run=args.long_run,
                             min_connectivity=3 if args.three_connected else 1)
    if args.count_only:
        print(len(graphs), file=out)
        return
    print(f"# {len(graphs)} graphs", file=out)
    _emit(args, out, dumps(graphs))


def cmd_frustration(args, out):
    from spinlat.lattice import frustration, resolve_graph

    g = resolve_graph(args.graph)
    r = frustration(g, field=args.field)
    text = (f"graph={g.name}\nn={g.n}\nbipartite={str(r.bipartite).lower()}\n"
            f"min_violations={r.min_violations}\nclassical_degeneracy={r.classical_degeneracy}\n"
            f"min_energy={r.min_energy:.12g}\n")
    _emit(args, out, text)


def cmd_solve(args, out):
    from spinlat.eigensolver import lowest_eigenpairs
    from spinlat.hamiltonian import FieldParams, build
    from spinlat.lattice import resolve_graph
    from spinlat.observables import entropy, ground_cumulants, reduced_density, rho_cumulants, schmidt_rank

    g = resolve_graph(args.graph)
    block = parse_block(args.block, g, args.seed)
    h = build(g, FieldParams(args.b, args.gamma))
    s = lowest_eigenpairs(h, args.k, tol=args.tol, seed=args.seed)
    psi = s.eigenvectors[:, 0]
    rho = reduced_density(psi, block, g.n)
    lines = [f"graph={g.name}", f"n={g.n}", f"b={args.b:.12g}", f"gamma={args.gamma:.12g}",
             "eigenvalues=" + " ".join(f"{e:.12g}" for e in s.eigenvalues),
             "residuals=" + " ".join(f"{r:.3e}" for r in s.residuals),
             f"matvecs={s.iterations}", f"ground_class_size={s.ground_class_size()}"]
    if s.k >= 2:
        lines.append(f"delta12={s.eigenvalues[1] - s.eigenvalues[0]:.12g}")
    if s.k >= 3:
        lines.append(f"delta13={s.eigenvalues[2] - s.eigenvalues[0]:.12g}")
    lines += [
        "block=" + " ".join(map(str, block)),
        f"entropy_half={entropy(rho):.12g}",
        f"entropy_single={entropy(reduced_density(psi, (block[0],), g.n)):.12g}",
        f"schmidt_rank={schmidt_rank(rho)}",
        "c_z=" + " ".join(f"{c:.12g}" for c in ground_cumulants(psi, args.m).values),
        "c_rho=" + " ".join(f"{c:.12g}" for c in rho_cumulants(rho, min(args.m, 1 << len(block))).values),
    ]
    _emit(args, out, "\n".join(lines) + "\n")


def cmd_sweep(args, out):
    from spinlat.lattice import resolve_graph
    from spinlat.sweep import scan_line

    g = resolve_graph(args.graph)
    block = parse_block(args.block, g, args.seed)
    t = scan_line(g, args.b, parse_grid(args.gamma), k=args.k, block=block, m=args.m, seed=args.seed,
                  tol=args.tol, warm_start=not args.cold)
    _emit(args, out, t.to_csv())
    if args.figure:
        from spinlat.plotting import plot_sweep

        plot_sweep(t, args.figure, title=f"{g.name}  B={args.b:g}")


def cmd_critline(args, out):
    from spinlat.lattice import resolve_graph
    from spinlat.sweep import critical_line_fit

    g = resolve_graph(args.graph)
    block = parse_block(args.block, g, args.seed)
    fit, points = critical_line_fit(g, parse_grid(args.b_grid), parse_grid(args.gamma), args.criterion,
                                    k=args.k, block=block, seed=args.seed, tol=args.tol, workers=args.workers)
    rows = ["b,gamma_c,quality"] + [f"{b:.12g},{gc:.12g},{q:.12g}" for b, gc, q in points]
    _emit(args, out, "\n".join(rows) + "\n")
    report = _fit_report(fit)
    print(report, end="", file=sys.stderr if args.output in (None, "-") else sys.stdout)
    if args.output not in (None, "-"):
        with open(args.output + ".fit", "w", encoding="utf-8") as fh:
            fh.write(report)
    if args.figure:
        from spinlat.plotting import plot_critical_line

        plot_critical_line(fit, points, args.figure)


def cmd_scaling(args, out):
    from spinlat.lattice import get_family
    from spinlat.sweep import entropy_scaling, gap_scaling_fit

    fam = get_family(args.family)
    sizes = parse_sizes(args.sizes)
    grid = parse_grid(args.gamma)
    if args.kind == "gap":
        exp_fit, pow_fit = gap_scaling_fit(fam, sizes, args.b, grid, gap_index=args.gap_index, k=args.k,
                                           seed=args.seed, tol=args.tol, workers=args.workers)
        rows = [f"n,min_delta1{args.gap_index}"] + [f"{n:.12g},{d:.12g}" for n, d in zip(exp_fit.x, exp_fit.y)]
        report = _fit_report(exp_fit) + _fit_report(pow_fit)
        report += f"rms_ratio={max(exp_fit.rms_residual, pow_fit.rms_residual) / max(min(exp_fit.rms_residual, pow_fit.rms_residual), 1e-300):.6g}\n"
    else:
        pts = entropy_scaling(fam, sizes, args.b, grid, seed=args.seed, tol=args.tol, workers=args.workers)
        rows = ["n,s_max,s_max_per_site,gamma_at_max"] + [
            f"{p.n},{p.s_max:.12g},{p.per_site:.12g},{p.gamma_at_max:.12g}" for p in pts]
        report = "".join(f"n={p.n} s_max_per_site={p.per_site:.6g}\n" for p in pts)
    _emit(args, out, "\n".join(rows) + "\n")
    print(report, end="", file=sys.stderr if args.output in (None, "-") else sys.stdout)
    if args.output not in (None, "-"):
        with open(args.output + ".fit", "w", encoding="utf-8") as fh:
            fh.write(report)
    if args.figure:
        from spinlat import plotting

        if args.kind == "gap":
            plotting.plot_gap_scaling(exp_fit, pow_fit, args.figure)
        else:
            plotting.plot_entropy_scaling(pts, args.figure)


def cmd_ensemble(args, out):
    from spinlat.lattice import resolve_graphs
    from spinlat.sweep import ensemble_average

    graphs = resolve_graphs(args.graph, args.long_run)
    t = ensemble_average(graphs, args.b, parse_grid(args.gamma), seed=args.seed, m=args.m, k=args.k,
                         tol=args.tol, workers=args.workers)
    _emit(args, out, t.to_csv())
    if args.figure:
        from spinlat.plotting import plot_sweep

        plot_sweep(t, args.figure, title=f"{len(graphs)} graphs  B={args.b:g}")


def _fit_report(fit) -> str:
    coef = " ".join(f"{c:.12g}" for c in fit.coefficients)
    return (f"model={fit.model}\ncoefficients={coef}\nrms_residual={fit.rms_residual:.6g}\n"
            f"points_used={fit.points_used}\n")


def _emit(args, out, text):
    if args.output in (None, "-"):
        out.write(text)
        return
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


COMMANDS = {
    "gen": cmd_gen, "enum": cmd_enum, "frustration": cmd_frustration, "solve": cmd_solve,
    "sweep": cmd_sweep, "critline": cmd_critline, "scaling": cmd_scaling, "ensemble": cmd_ensemble,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spinlat", description="Transverse-field Ising networks on planar cubic graphs.")
    p.add_argument("--version", action="version", version=f"spinlat {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(sp, output=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="parallel processes (default: all cores)")
        sp.add_argument("--long-run", action="store_true", help="unlock enumeration up to n=18")
        if output:
            sp.add_argument("-o", "--output", default=None, help="output file (default stdout)")
            sp.add_argument("--figure", default=None, metavar="PATH",
                            help="also render a matplotlib figure to PATH")

    def solver(sp, k=4, gamma="3:0:0.05", b=1.0):
        sp.add_argument("--b", type=float, default=b)
        if gamma is None:
            sp.add_argument("--gamma", type=float, required=True)
        else:
            sp.add_argument("--gamma", default=gamma, help="start:stop:step or a comma list")
        sp.add_argument("--k", type=int, default=k)
        sp.add_argument("--m", type=int, default=5, help="number of cumulants")
        sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser("gen", help="emit graphs in the edge-list format")
    sp.add_argument("generator", nargs="?", choices=("ladder",), help="named generator")
    sp.add_argument("--n", type=int, default=None, help="generator size")
    sp.add_argument("--graph", action="append", default=None, help="graph source, repeatable")
    common(sp)

    sp = sub.add_parser("enum", help="enumerate connected cubic graphs")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--planar", action="store_true")
    sp.add_argument("--3conn", dest="three_connected", action="store_true", help="3-connected graphs only")
    sp.add_argument("--count-only", action="store_true")
    common(sp)

    sp = sub.add_parser("frustration", help="classical frustration analysis")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--field", type=float, default=0.0)
    common(sp)

    sp = sub.add_parser("solve", help="spectrum and observables at one (B, Gamma) point")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--block", default="auto")
    solver(sp, gamma=None)
    common(sp)

    sp = sub.add_parser("sweep", help="scan Gamma at fixed B and write CSV")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--block", default="auto", help="auto, ring:inner, ring:outer, random[:seed] or 0,1,2")
    sp.add_argument("--cold", action="store_true", help="no warm start between grid points")
    solver(sp)
    common(sp)

    sp = sub.add_parser("critline", help="fit the critical line Gamma_c(B)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--block", default="auto")
    sp.add_argument("--b-grid", default="0:2:0.25")
    sp.add_argument("--criterion", choices=("gap13_min", "entropy_peak"), default="gap13_min")
    solver(sp, gamma="2.6:1:0.05")
    common(sp)

    sp = sub.add_parser("scaling", help="gap or entropy scaling with size")
    sp.add_argument("--family", default="ladder_even")
    sp.add_argument("--sizes", default="8,12,16")
    sp.add_argument("--kind", choices=("gap", "entropy"), default="gap")
    sp.add_argument("--gap-index", type=int, choices=(2, 3), default=3)
    solver(sp, gamma="3:0.4:0.05")
    common(sp)

    sp = sub.add_parser("ensemble", help="average scans over a set of graphs")
    sp.add_argument("--graph", required=True, help="e.g. enum:8:planar")
    solver(sp, gamma="3:0:0.1", b=0.5)
    common(sp)

    sp = sub.add_parser("replay", help="rerun a command from its manifest")
    sp.add_argument("manifest")
    sp.add_argument("-o", "--output", default=None, help="write to this path instead of the recorded one")
    return p


def write_manifest(args, path, wall):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    lines = [f"command={args.command}", f"version={__version__}"]
    lines += [f"config.{k}={json.dumps(v)}" for k, v in cfg.items()]
    lines.append(f"wall_time_s={wall:.3f}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(path) -> argparse.Namespace:
    cfg = {}
    command = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            key, sep, value = line.rstrip("\n").partition("=")
            if not sep:
                continue
            if key == "command":
                command = value
            elif key.startswith("config."):
                cfg[key[len("config."):]] = json.loads(value)
    if command not in COMMANDS:
        raise InvalidArgument(f"manifest {path} names no known command")
    return argparse.Namespace(command=command, **cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            override = args.output
            args = read_manifest(args.manifest)
            if override:
                args.output = override
        start = time.time()
        COMMANDS[args.command](args, sys.stdout)
        if getattr(args, "output", None) not in (None, "-"):
            write_manifest(args, args.output + ".manifest", time.time() - start)
    except (ConvergenceFailure, BudgetExceeded) as e:
        print(f"spinlat: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SpinlatError, OSError) as e:
        print(f"spinlat: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
