"""Command-line front end.

Machine-readable results go to stdout, diagnostics to stderr. Output
is bit-identical for identical argv and seeds, for any thread count.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 input
or validation error, 4 numerical precondition (e.g. unequal
determinants where equality is required).

GTC_THREADS sets the default for --threads.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import verify as verify_mod
from .dimred import optimal_reduction
from .errors import InputError, NumericalError
from .graph_ops import (
    GraftingOp,
    apply_graft,
    chain_min_ci,
    parse_chain,
    simplify_pair,
    write_chain,
    write_gtree,
)
from .oracle import ci_maxmin_scan, mc_error_exponent, search_dependent_counterexample
from .spectral import chernoff, gen_eigs
from .tree_model import covariance_of, parse_gtree

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose messages go to an injectable stream."""

    stream = None

    def _print_message(self, message, file=None):
        if message:
            (self.stream or sys.stderr).write(message)


def _read_tree(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_gtree(fh.read())


def _build_parser(stderr) -> _Parser:
    parser = _Parser(prog="gtc", description="Chernoff information between Gaussian trees")
    parser.stream = stderr
    default_threads = int(os.environ.get("GTC_THREADS", "1"))

    def common(p):
        p.stream = stderr
        p.add_argument("--precision", type=int, default=6, choices=range(1, 18),
                       metavar="P", help="printed decimal digits (default 6)")
        p.add_argument("--threads", type=int, default=default_threads,
                       help="worker threads (default $GTC_THREADS or 1)")
        return p

    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = common(sub.add_parser("ci", help="Chernoff information of two trees"))
    p.add_argument("tree1")
    p.add_argument("tree2")
    p.add_argument("--oracle", action="store_true",
                   help="brute-force max-min scan instead of the closed form")
    p.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    p.add_argument("--grid", type=int, default=256, help="oracle scan grid size")

    p = common(sub.add_parser("eig", help="generalized eigenvalues of two trees"))
    p.add_argument("tree1")
    p.add_argument("tree2")

    p = common(sub.add_parser("graft", help="apply one grafting operation"))
    p.add_argument("tree")
    p.add_argument("--cut", nargs=2, type=int, required=True, metavar=("I", "P"),
                   help="cut child I from parent P")
    p.add_argument("--paste", type=int, required=True, metavar="Q",
                   help="paste I onto Q")
    p.add_argument("-o", "--out", required=True, help="output gtree path")

    p = common(sub.add_parser("simplify", help="strip shared structure from a pair"))
    p.add_argument("tree1")
    p.add_argument("tree2")
    p.add_argument("-o-prefix", "--out-prefix", dest="out_prefix", required=True,
                   help="write <prefix>1.gtree and <prefix>2.gtree")

    p = common(sub.add_parser("chain", help="minimum CI over a grafting chain"))
    p.add_argument("file")
    p.add_argument("--exhaustive", action="store_true",
                   help="scan all pairs even for independent chains")

    p = common(sub.add_parser("reduce", help="optimal linear dimension reduction"))
    p.add_argument("tree1")
    p.add_argument("tree2")
    p.add_argument("--dim", type=int, required=True, help="output dimension")

    p = common(sub.add_parser("simulate", help="Monte Carlo error exponent"))
    p.add_argument("files", nargs="+", help="two or more gtree files")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--t", required=True, help="comma-separated sequence lengths")
    p.add_argument("--seed", type=int, required=True)

    p = common(sub.add_parser("search-cex",
                              help="search for a partial-order counterexample"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--attempts", type=int, required=True)
    p.add_argument("-o", "--out", help="write the found chain file here")

    p = common(sub.add_parser("verify", help="run the invariant battery"))
    p.add_argument("--seed", type=int, required=True)

    return parser


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = _build_parser(stderr)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args, stdout, stderr)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC


def _dispatch(args, out, err) -> int:
    fmt = f"{{:.{args.precision}f}}"
    gfmt = f"{{:.{args.precision}g}}"

    if args.verb == "ci":
        c1 = covariance_of(_read_tree(args.tree1))
        c2 = covariance_of(_read_tree(args.tree2))
        if args.oracle:
            ci, ls = ci_maxmin_scan(c1, c2, grid=args.grid)
        else:
            rep = chernoff(c1, c2)
            ci, ls = rep.ci, rep.lambda_star
        if args.bits:
            ci /= math.log(2.0)
        print(f"ci={fmt.format(ci)} lambda_star={fmt.format(ls)}", file=out)
        return EXIT_OK

    if args.verb == "eig":
        spec = gen_eigs(covariance_of(_read_tree(args.tree1)),
                        covariance_of(_read_tree(args.tree2)))
        vals = " ".join(fmt.format(v) for v in spec.values)
        print(f"eigenvalues={vals}", file=out)
        print(f"log_det_ratio={gfmt.format(spec.log_det_ratio)}", file=out)
        return EXIT_OK

    if args.verb == "graft":
        tree = _read_tree(args.tree)
        child, parent = args.cut
        result = apply_graft(tree, GraftingOp(child, parent, args.paste))
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(write_gtree(result))
        print(f"out={args.out} n={result.n} log_det={gfmt.format(result.log_det())}",
              file=out)
        return EXIT_OK

    if args.verb == "simplify":
        t1 = _read_tree(args.tree1)
        t2 = _read_tree(args.tree2)
        s1, s2, relabel = simplify_pair(t1, t2)
        paths = [f"{args.out_prefix}1.gtree", f"{args.out_prefix}2.gtree"]
        for path, tree in zip(paths, (s1, s2)):
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(write_gtree(tree))
        mapping = ",".join(f"{o}:{n}" for o, n in sorted(relabel.items()))
        print(f"n_before={t1.n} n_after={s1.n} map={mapping}", file=out)
        print(f"wrote {paths[0]} {paths[1]}", file=err)
        return EXIT_OK

    if args.verb == "chain":
        with open(args.file, "r", encoding="utf-8") as fh:
            chain = parse_chain(fh.read())
        (i, j), value, method = chain_min_ci(chain, force_exhaustive=args.exhaustive,
                                             threads=args.threads)
        print(f"pair=T{i + 1},T{j + 1} ci={fmt.format(value)} method={method}",
              file=out)
        return EXIT_OK

    if args.verb == "reduce":
        c1 = covariance_of(_read_tree(args.tree1))
        c2 = covariance_of(_read_tree(args.tree2))
        plan = optimal_reduction(c1, c2, args.dim)
        print(f"k={plan.k}", file=out)
        print("chosen=" + " ".join(repr(v) for v in plan.chosen), file=out)
        print(f"ci={fmt.format(plan.reduced_ci)} "
              f"lambda={fmt.format(plan.reduced_lambda_star)}", file=out)
        for row in plan.a_k:
            print("A=" + " ".join(repr(float(v)) for v in row), file=out)
        return EXIT_OK

    if args.verb == "simulate":
        trees = [_read_tree(f) for f in args.files]
        t_values = [int(x) for x in args.t.split(",") if x]
        report = mc_error_exponent(trees, t_values, args.trials, args.seed,
                                   threads=args.threads)
        out.write(report.to_csv(precision=args.precision))
        return EXIT_OK

    if args.verb == "search-cex":
        inst = search_dependent_counterexample(args.seed, args.attempts)
        if inst is None:
            print("found=none", file=out)
            return EXIT_OK
        print("found=1", file=out)
        print(f"attempt={inst.attempt}", file=out)
        print(f"lambda_star={fmt.format(inst.lambda_star)}", file=out)
        print("eigenvalues=" + " ".join(fmt.format(v) for v in inst.eigenvalues),
              file=out)
        print(f"ci_t1_t3={fmt.format(inst.ci_t1_t3)} "
              f"ci_t1_t2={fmt.format(inst.ci_t1_t2)} "
              f"ci_t2_t3={fmt.format(inst.ci_t2_t3)}", file=out)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(write_chain(inst.chain))
            print(f"wrote {args.out}", file=err)
        return EXIT_OK

    if args.verb == "verify":
        ok = verify_mod.run_battery(args.seed, out)
        return EXIT_OK if ok else EXIT_FAIL

    raise AssertionError(f"unhandled verb {args.verb!r}")


def main() -> None:
    sys.exit(run(sys.argv[1:]))
