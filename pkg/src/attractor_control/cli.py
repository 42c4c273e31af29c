"""Command-line entry point.

Exit status: 0 on success, 1 on a domain error (bad network, no solution,
failed verification), 2 on a usage error.
"""
from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from dataclasses import replace

from . import formats, genlab, reduction, structured, tss, verify
from .errors import ControlError
from .network import (
    Attractor,
    all_attractors,
    find_fixed_points,
    format_state,
    parse_state,
)

log = logging.getLogger("attractor_control")

REDUCTIONS = ("general", "threshold", "nc", "nc-unanimous", "cyclic", "probabilistic")
METHODS = ("exact", "greedy", "clique", "cactus", "hierarchy", "nc-fvs", "cycle-baseline")
VERIFY_MODES = ("exhaustive", "mc", "async", "stochastic", "cyclic")
DEFAULT_REDUCTION = {
    "exact": "general", "greedy": "general", "clique": "threshold", "cactus": "threshold",
    "hierarchy": "threshold", "nc-fvs": "nc-unanimous",
}


class UsageError(Exception):
    pass


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_network(path):
    text = _read(path)
    if path.endswith((".rules", ".txt")):
        return formats.parse_boolean_rules(text), None
    doc = formats.parse_network_document(text)
    return doc.net, doc.attractor


def _attractor(net, doc_attractor, text):
    if text:
        return Attractor([parse_state(s, net.n) for s in text.split(",")])
    if doc_attractor is not None:
        return doc_attractor
    raise UsageError("no --attractor given and the network file has none")


def _require_seed(args):
    if args.seed is None:
        raise UsageError("this command is randomized and needs --seed")


def _reduce(net, att, method, minimize=False):
    if method == "cyclic" or (len(att) > 1 and method == "general"):
        return reduction.build_cyclic(net, att, minimize)
    if len(att) != 1:
        raise UsageError(f"reduction {method!r} needs a fixed-point attractor")
    x = att.states[0]
    if method == "general":
        return reduction.build_augmented(net, x, minimize)
    if method == "threshold":
        return reduction.build_threshold_tss(net, x)
    if method == "nc":
        return reduction.build_nc_full(net, x)
    if method == "nc-unanimous":
        return reduction.build_nc_unanimous(net, x)
    if method == "probabilistic":
        return reduction.merge_probabilistic(net, x)
    raise UsageError(f"unknown reduction {method!r}")


def _parse_blocks(text):
    return [[int(v) for v in part.split(",") if v.strip()] for part in text.split(";") if part.strip()]


def _names(net, genes):
    return "{" + ", ".join(net.names[g] for g in genes) + "}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_attractor(args):
    net, _ = _load_network(args.network)
    if args.cycles:
        for a in all_attractors(net):
            print(" -> ".join(format_state(s) for s in a.states))
    else:
        for x in find_fixed_points(net, limit=args.limit):
            print(format_state(x))
    return 0


def cmd_reduce(args):
    net, doc_att = _load_network(args.network)
    att = _attractor(net, doc_att, args.attractor)
    inst = _reduce(net, att, args.method, args.minimize)
    _write(args.out, formats.serialize_tss(inst))
    return 0


def _solve_instance(inst, args):
    m = args.method
    if m == "exact":
        return tss.solve_exact(inst, budget=args.budget)
    if m == "greedy":
        return tss.solve_greedy(inst)
    if m == "clique":
        return structured.solve_clique(inst)
    if m == "cactus":
        blocks = _parse_blocks(args.blocks) if args.blocks else structured.greedy_clusters(inst)
        return structured.solve_block_cactus(inst, blocks)
    if m == "hierarchy":
        if args.k is None or args.depth is None:
            raise UsageError("hierarchy needs --k and --depth")
        return structured.solve_hierarchical(inst, structured.HierarchySpec(args.k, args.depth))
    if m == "nc-fvs":
        return structured.solve_unanimous_fvs(inst)
    raise UsageError(f"method {m!r} does not apply to an instance")


def cmd_solve(args):
    if args.network.endswith(".tss"):
        inst = formats.parse_tss(_read(args.network))
        S = _solve_instance(inst, args)
        trace = tss.minimal_certificate(inst, S.members)
        print("S = {" + ", ".join(map(str, S.members)) + "}")
        print(f"certificate: {len(trace.layers) - 1} cascade rounds, {len(trace.fixpoint)}/{inst.m} nodes active")
        return 0
    net, doc_att = _load_network(args.network)
    att = _attractor(net, doc_att, args.attractor)
    if args.method == "cycle-baseline":
        S = structured.solve_cycle_baseline(net)
        print(f"S = {_names(net, S.members)}")
        print(f"|S| = {len(S)}")
        return 0
    method = args.reduction or ("cyclic" if len(att) > 1 else DEFAULT_REDUCTION[args.method])
    inst = _reduce(net, att, method, args.minimize)
    S = _solve_instance(inst, args)
    trace = tss.minimal_certificate(inst, S.members)
    genes = inst.genes(S.members)
    print(f"S = {_names(net, genes)}")
    print(f"|S| = {len(genes)}")
    print(f"certificate: {len(trace.layers) - 1} cascade rounds, {len(trace.fixpoint)}/{inst.m} nodes active")
    return 0


def cmd_verify(args):
    net, doc_att = _load_network(args.network)
    att = _attractor(net, doc_att, args.attractor)
    genes = [net.index(s.strip()) for s in args.inputs.split(",") if s.strip()] if args.inputs else []
    mode = args.mode
    if mode == "cyclic":
        if args.trials is not None:
            _require_seed(args)
        rep = verify.verify_cyclic(net, att, genes, args.trials, args.seed, args.horizon)
    else:
        if len(att) != 1:
            raise UsageError("use --mode cyclic for a cyclic attractor")
        x = att.states[0]
        pins = {g: x[g] for g in genes}
        if mode == "exhaustive":
            rep = verify.verify_exhaustive(net, x, pins, args.horizon)
        else:
            _require_seed(args)
            schedule = {"mc": "sync", "async": "async_uniform", "stochastic": "stochastic_uniform"}[mode]
            rep = verify.verify_monte_carlo(net, x, pins, schedule, args.trials or 1000,
                                            args.seed, args.horizon)
    print(rep.summary())
    if rep.counterexample is not None:
        print("counterexample: " + formats.to_json(rep.counterexample).replace("\n", " ").strip())
    if args.out:
        _write(args.out, formats.to_json(rep))
    return 0 if rep.ok else 1


def _spec_from_args(args, family, n, seed):
    kw = {"family": family, "n": n, "seed": seed, "sign_prob": args.sign_prob, "tau": args.tau}
    if args.p is not None:
        kw["p"] = args.p
    if args.m is not None:
        kw["m"] = args.m
    if args.k is not None:
        kw["k"] = args.k
    if args.depth is not None:
        kw["depth"] = args.depth
    if args.blocks:
        kw["block_sizes"] = tuple(int(s) for s in args.blocks.split(","))
    return genlab.GenSpec(**kw)


def cmd_generate(args):
    _require_seed(args)
    net = genlab.generate(_spec_from_args(args, args.family, args.n, args.seed))
    _write(args.out, formats.serialize_network(net))
    return 0


def cmd_experiment(args):
    _require_seed(args)
    families = args.families.split(",")
    sizes = [int(s) for s in args.sizes.split(",")]
    specs = []
    for n in sizes:
        for fam in families:
            spec = _spec_from_args(args, fam, n, 0)
            if fam == "erdos_renyi" and args.matched:
                spec = replace(spec, p=genlab.matched_er(n, spec.m))
            specs.append(spec)
    res = genlab.run_trend_experiment(specs, args.trials, args.solvers.split(","), args.seed,
                                      verify=not args.no_verify)
    if not args.timing:
        for r in res.rows:
            r["runtime_ms"] = ""
    if args.out:
        buf = io.StringIO()
        res.write_csv(buf)
        _write(args.out, buf.getvalue())
    buf = io.StringIO()
    res.write_aggregate_csv(buf)
    _write(args.aggregate, buf.getvalue())
    for e in res.errors:
        log.warning("cell %s trial %s: %s", e.get("cell"), e.get("trial"), e.get("error"))
    if args.metadata:
        _write(args.metadata, formats.to_json(res.metadata))
    return 0 if all(r["verified"] for r in res.rows) or args.no_verify else 1


def cmd_export_ilp(args):
    if args.network.endswith(".tss"):
        inst = formats.parse_tss(_read(args.network))
    else:
        net, doc_att = _load_network(args.network)
        att = _attractor(net, doc_att, args.attractor)
        inst = _reduce(net, att, args.reduction or "general")
    buf = io.StringIO()
    tss.export_ilp(inst, buf, restrict_to_original=not args.all_nodes)
    _write(args.out, buf.getvalue())
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="attractor-control",
                                 description="Minimum input selection for Boolean networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attractor", help="list fixed points or all attractors")
    p.add_argument("network")
    p.add_argument("--cycles", action="store_true", help="enumerate every attractor (small networks)")
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("reduce", help="write the target set selection instance")
    p.add_argument("network")
    p.add_argument("--method", choices=REDUCTIONS, default="general")
    p.add_argument("--attractor", help="state, or comma-separated states of a cycle")
    p.add_argument("--minimize", action="store_true", help="prime-implicate clauses")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="choose input nodes")
    p.add_argument("network", help=".bn network or .tss instance")
    p.add_argument("--method", choices=METHODS, default="exact")
    p.add_argument("--attractor")
    p.add_argument("--reduction", choices=REDUCTIONS)
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--budget", type=int, default=25, help="free-unit cap for exact search")
    p.add_argument("--blocks", help="clique blocks as '0,1;2,3' (cactus)")
    p.add_argument("--k", type=int)
    p.add_argument("--depth", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check that pinned inputs reach the attractor")
    p.add_argument("network")
    p.add_argument("--attractor")
    p.add_argument("--inputs", default="", help="comma-separated node names")
    p.add_argument("--mode", choices=VERIFY_MODES, default="exhaustive")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", help="JSON report")
    p.set_defaults(func=cmd_verify)

    def gen_args(p):
        p.add_argument("--p", type=float)
        p.add_argument("--m", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--blocks", help="block sizes, comma-separated")
        p.add_argument("--sign-prob", type=float, default=0.5)
        p.add_argument("--tau", type=float, default=0.0)
        p.add_argument("--seed", type=int)

    p = sub.add_parser("generate", help="random signed threshold network")
    p.add_argument("--family", choices=genlab.FAMILIES, required=True)
    p.add_argument("--n", type=int, default=10)
    gen_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="input counts across random families")
    p.add_argument("--families", default="scale_free,erdos_renyi")
    p.add_argument("--sizes", default="10,20,40")
    p.add_argument("--trials", type=int, default=genlab.DEFAULT_TRIALS)
    p.add_argument("--solvers", default="tss_greedy")
    p.add_argument("--matched", action="store_true", help="ER edge probability matched to m")
    gen_args(p)
    p.add_argument("--out", help="per-trial CSV")
    p.add_argument("--aggregate", help="aggregate CSV (default stdout)")
    p.add_argument("--metadata", help="JSON metadata")
    p.add_argument("--timing", action=argparse.BooleanOptionalAction, default=True,
                   help="record runtime_ms (off for byte-stable output)")
    p.add_argument("--no-verify", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("export-ilp", help="write the integer program in LP format")
    p.add_argument("network", help=".bn network or .tss instance")
    p.add_argument("--attractor")
    p.add_argument("--reduction", choices=REDUCTIONS)
    p.add_argument("--all-nodes", action="store_true", help="let auxiliary nodes be seeded too")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_ilp)
    return ap


def run_cli(argv=None) -> int:
    level = os.environ.get("ATTRACTOR_CONTROL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ControlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
