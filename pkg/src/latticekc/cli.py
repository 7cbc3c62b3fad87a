"""Command-line entry point: ``latticekc <subcommand> [options]``.

Subcommands ``oned``, ``wce2d`` and ``pde-uq`` run the studies and
write tables; ``weights`` solves and dumps optimal weights for one point
set; ``wce`` evaluates a single worst-case error. Failures exit with
status 1 and print one JSON line ``{"error": ..., "message": ...}`` to
stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from latticekc.cubature import (
    assemble_gram,
    equal_rule,
    solve_optimal_weights,
    wce_general,
    wce_optimal,
    write_array,
    write_weights_text,
)
from latticekc.experiments import resolve_settings, run_study
from latticekc.kernel import load_kernel_spec
from latticekc.points import apply_shift, generate_lattice, load_generating_vector, sample_shift, tent_transform

log = logging.getLogger("latticekc")


def _points(args, s):
    gv = load_generating_vector(args.vector, s, args.n)
    ps = generate_lattice(gv)
    if args.seed is not None:
        ps = apply_shift(ps, sample_shift(args.seed, s))
    if args.tent:
        if args.seed is None:
            log.warning("tent transform without a shift maps t and 1-t to the same node")
        ps = tent_transform(ps)
    return ps


def _cmd_study(args):
    settings = resolve_settings(args.command, args.profile, args.config, args.seed)
    tables = run_study(args.command, settings, args.out, jobs=args.jobs)
    for t in tables:
        print(f"{t.name}: {len(t.rows)} rows -> {Path(args.out) / (t.name + '.csv')}")
        for key in sorted(t.slopes):
            slope, lo, hi = t.slopes[key]
            print(f"  slope {key:<18} {slope:+.3f}  (n = {lo}..{hi})")


def _cmd_weights(args):
    spec = load_kernel_spec(args.kernel)
    ps = _points(args, spec.s)
    gram = assemble_gram(spec, ps)
    rule = solve_optimal_weights(gram)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_weights_text(out / "weights.txt", rule.weights)
    write_array(out / "weights.bin", rule.weights)
    write_array(out / "nodes.bin", ps.nodes)
    if args.dump_gram:
        write_array(out / "gram.bin", gram.matrix)
    print(json.dumps({
        "n": ps.n,
        "s": ps.s,
        "sum_weights": float(np.sum(rule.weights)),
        "wce_optimal": wce_optimal(rule),
        "residual": rule.residual,
    }))


def _cmd_wce(args):
    spec_eval = load_kernel_spec(args.kernel)
    ps = _points(args, spec_eval.s)
    if args.weights == "equal":
        w = equal_rule(ps).weights
    elif args.weights == "optimal":
        spec_w = load_kernel_spec(args.weights_kernel) if args.weights_kernel else spec_eval
        w = solve_optimal_weights(assemble_gram(spec_w, ps)).weights
    else:
        w = np.loadtxt(args.weights, dtype=float, ndmin=1)
    print(json.dumps({"n": ps.n, "s": ps.s, "wce": wce_general(spec_eval, ps, w)}))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latticekc", description="Kernel cubature on rank-1 lattices.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_ in [
        ("oned", "1-d rate doubling on the left-Riemann lattice"),
        ("wce2d", "worst-case errors of a shifted tent-transformed 2-d lattice"),
        ("pde-uq", "shift-averaged errors for the parametric PDE"),
    ]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, help="key = value file overriding the profile")
        sp.add_argument("--seed", type=int, help="base random seed")
        sp.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        sp.add_argument("--profile", choices=("ci", "full"), default="ci")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for n-points (pde-uq)")
        sp.set_defaults(func=_cmd_study)

    def point_args(sp):
        sp.add_argument("--kernel", type=Path, required=True, help="kernel specification file")
        sp.add_argument("--vector", type=Path, required=True, help="generating vector file")
        sp.add_argument("--n", type=int, required=True, help="number of points")
        sp.add_argument("--seed", type=int, help="apply a random shift drawn with this seed")
        sp.add_argument("--tent", action="store_true", help="apply the tent transform")

    sp = sub.add_parser("weights", help="solve for optimal weights and dump them")
    point_args(sp)
    sp.add_argument("--out", type=Path, default=Path("weights"))
    sp.add_argument("--dump-gram", action="store_true", help="also write gram.bin")
    sp.set_defaults(func=_cmd_weights)

    sp = sub.add_parser("wce", help="evaluate one worst-case error")
    point_args(sp)
    sp.add_argument("--weights", default="equal",
                    help="'equal', 'optimal', or a text file with one weight per line")
    sp.add_argument("--weights-kernel", type=Path,
                    help="kernel the optimal weights are computed for (default: --kernel)")
    sp.set_defaults(func=_cmd_wce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
