"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 discrepancies found
(verify/hunt), 3 internal invariant violation or failed replay.
"""

from __future__ import annotations

import argparse
import sys

from . import graph as gc
from .growth import Provider, decide_hamiltonian, shuffled_order
from .harness import (
    Campaign,
    CampaignAborted,
    Exhaustive,
    ExperimentConfig,
    GraphList,
    Gnp,
    Planted,
    ReplayError,
    gen_gnp,
    gen_planted_hamiltonian,
    read_records,
    replay,
    run_campaign,
)
from .moves import DEFAULT_MAX_TOURS, InvariantViolation
from .oracle import CapacityError, hc_exists, held_karp

EXIT_OK, EXIT_INPUT, EXIT_DISCREPANCY, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read_graph(path: str) -> gc.Graph:
    try:
        with open(path) as fh:
            return gc.parse_graph(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def cmd_gen(args) -> int:
    model, n = args.model, args.n
    if model == "petersen":
        g = gc.petersen_graph()
    else:
        if n is None:
            raise UsageError(f"--n is required for model {model}")
        if model == "gnp":
            if args.p is None:
                raise UsageError("--p is required for model gnp")
            g = gen_gnp(n, args.p, args.seed)
        elif model == "planted":
            g = gen_planted_hamiltonian(n, args.extra_p if args.extra_p is not None else 0.0, args.seed)
        else:
            g = {
                "path": gc.path_graph,
                "cycle": gc.cycle_graph,
                "complete": gc.complete_graph,
                "star": gc.star_graph,
                "empty": gc.empty_graph,
            }[model](n)
    _write(args.out, gc.serialize_graph(g))
    return EXIT_OK


def _parse_order(spec: str, g: gc.Graph):
    if spec == "default":
        return None
    if spec.startswith("shuffle:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad shuffle seed in {spec!r}") from None
        if g.n < 4:
            return None
        return shuffled_order(gc.reduce_to_tsp(g), g.n, seed)
    try:
        order = [int(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad --order {spec!r}") from None
    if sorted(order) != list(range(g.n)):
        raise UsageError(f"--order must list every vertex 0..{g.n - 1} once")
    return order


def cmd_solve(args) -> int:
    g = _read_graph(args.input)
    order = _parse_order(args.order, g)
    decision = decide_hamiltonian(g, order, Provider(args.provider), args.max_tours)
    out = [decision.verdict.value]
    if decision.final_cost is not None:
        out.append(f"final_cost: {decision.final_cost}")
    if decision.witness is not None:
        out.append("witness: " + " ".join(map(str, decision.witness)))
    state = decision.final_state
    mismatches = 0
    if state is not None and not state.shortcut:
        out.append("order: " + " ".join(map(str, state.subset)))
        mismatches = sum(row.construction_mismatch for row in state.trace)
        if args.trace:
            cols = ["m", "vertex", "d_star", "omega_size", "c_star", "h_size", "case", "predicted", "constructed",
                    "h_next_size", "construction_mismatch", "closure_complete"]
            out.append("\t".join(cols))
            for row in state.trace:
                d = row.to_dict()
                out.append("\t".join(str(d[k]) for k in cols))
    print("\n".join(out))
    if args.strict and mismatches:
        print(f"strict: {mismatches} construction mismatch(es)", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = _read_graph(args.input)
    if not (args.hc or args.tsp):
        raise UsageError("pass --hc and/or --tsp")
    if args.hc:
        print("true" if hc_exists(g) else "false")
    if args.tsp:
        if g.n < 3:
            raise UsageError("TSP needs at least 3 vertices")
        try:
            print(held_karp(gc.reduce_to_tsp(g), range(g.n)))
        except CapacityError as exc:
            raise UsageError(str(exc)) from None
    return EXIT_OK


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split("..")) if ".." in text else (int(text),) * 2
    except ValueError:
        raise UsageError(f"bad --n-range {text!r}; expected A..B") from None
    if lo > hi or lo < 1:
        raise UsageError(f"bad --n-range {text!r}")
    return lo, hi


def _parse_generator(text: str):
    name, _, arg = text.partition(":")
    try:
        if name == "gnp":
            return Gnp(float(arg or 0.5))
        if name == "planted":
            return Planted(float(arg or 0.0))
    except ValueError:
        raise UsageError(f"bad generator parameter in {text!r}") from None
    if name == "exhaustive":
        return Exhaustive()
    raise UsageError(f"unknown generator {text!r}")


def cmd_verify(args, campaign: Campaign | None = None) -> int:
    campaign = campaign or Campaign(args.check)
    if args.input:
        generator = GraphList(tuple(_read_graph(p) for p in args.input))
        trials = args.trials
    else:
        generator = _parse_generator(args.generator)
        trials = args.trials
        if trials is None and not isinstance(generator, Exhaustive):
            trials = 100
    cfg = ExperimentConfig(
        campaign=campaign,
        n_range=_parse_range(args.n_range),
        generator=generator,
        trials=trials,
        master_seed=args.seed,
        order_policy=args.order,
        max_tours=args.max_tours,
    )
    try:
        if args.out:
            with open(args.out, "w") as sink:
                report = run_campaign(cfg, sink, args.workers)
        else:
            report = run_campaign(cfg, None, args.workers)
    except CampaignAborted as exc:
        sys.stdout.write(exc.report.to_text())
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(report.to_text())
    if args.strict and report.discrepancies.get("construction_mismatch"):
        return EXIT_INVARIANT
    return EXIT_DISCREPANCY if report.total_discrepancies else EXIT_OK


def cmd_replay(args) -> int:
    try:
        with open(args.input) as fh:
            records = read_records(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    except ReplayError as exc:
        raise UsageError(str(exc)) from None
    indices = range(len(records))
    if args.index is not None:
        if not 0 <= args.index < len(records):
            raise UsageError(f"--index {args.index} out of range (have {len(records)} records)")
        indices = [args.index]
    failed = 0
    for i in indices:
        try:
            res = replay(records[i], args.max_tours)
        except ReplayError as exc:
            raise UsageError(f"record {i}: {exc}") from None
        status = "reproduced" if res.reproduced else "NOT REPRODUCED"
        failed += not res.reproduced
        print(f"record {i}: {records[i].campaign}/{records[i].kind} step={records[i].step_m}: {status}")
    print(f"{len(indices) - failed}/{len(indices)} reproduced")
    return EXIT_INVARIANT if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hamgrow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a graph file")
    p.add_argument("--model", required=True,
                   choices=["gnp", "planted", "path", "cycle", "complete", "star", "empty", "petersen"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--extra-p", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run the growth algorithm on a graph file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--order", default="default", help="default | shuffle:SEED | comma-separated vertex list")
    p.add_argument("--provider", choices=["closure", "oracle"], default="closure")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--strict", action="store_true", help="exit 3 on any construction mismatch")
    p.add_argument("--max-tours", type=int, default=DEFAULT_MAX_TOURS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact Hamiltonicity / TSP optimum")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--hc", action="store_true")
    p.add_argument("--tsp", action="store_true")
    p.set_defaults(func=cmd_oracle)

    for name in ("verify", "hunt"):
        p = sub.add_parser(name, help="run a verification campaign" if name == "verify"
                           else "end-to-end verdict hunt over large batches")
        if name == "verify":
            p.add_argument("--check", required=True, choices=[c.value for c in Campaign])
        p.add_argument("--n-range", default="5..8" if name == "verify" else "8..14")
        p.add_argument("--trials", type=int, default=None if name == "verify" else 1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--generator", default="gnp:0.5" if name == "verify" else "planted:0.1",
                       help="gnp:P | planted:EXTRA_P | exhaustive")
        p.add_argument("--in", dest="input", nargs="+", help="graph files instead of a generator")
        p.add_argument("--order", choices=["default", "shuffle"], default="default")
        p.add_argument("--out", help="JSONL file for discrepancy records")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--strict", action="store_true")
        p.add_argument("--max-tours", type=int, default=DEFAULT_MAX_TOURS)
        if name == "verify":
            p.set_defaults(func=cmd_verify)
        else:
            p.set_defaults(func=lambda a: cmd_verify(a, Campaign.ENDTOEND))

    p = sub.add_parser("replay", help="re-run discrepancy records")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--index", type=int)
    p.add_argument("--max-tours", type=int, default=DEFAULT_MAX_TOURS)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, gc.GraphParseError, gc.InvalidInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
