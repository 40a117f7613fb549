"""Command-line front end.

Exit codes: 0 on success or a verified check, 1 when a check is falsified,
2 on usage, parse or budget errors.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import collatz
from .causality import BudgetExceeded, check_bicausal, check_bijection_levels, check_k_causal
from .coalgebra import check_morphism, coinduce, final_coalgebra, find_periodic, mealy_behavior
from .dyadic import parse_dyadic
from .specfile import SpecError, load_spec
from .streams import Distance, EpStream, StreamError, distance_exact, format_stream, format_word, parse_stream

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="causalstreams", description="Causal stream functions, coinduction and 2-adic Collatz tools.")
    p.add_argument("--format", choices=("human", "record"), default="human",
                   help="output style (default: human)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    col = sub.add_parser("collatz", help="integer trajectories and parity vectors")
    csub = col.add_subparsers(dest="action", parser_class=_Parser)
    tr = csub.add_parser("trace", help="trajectory of n under C")
    tr.add_argument("n", type=int)
    tr.add_argument("--max-steps", type=int, default=collatz.DEFAULT_MAX_STEPS)
    par = csub.add_parser("parity", help="parity vector prefix Q(x)")
    par.add_argument("x", help="integer, p/q with odd q, or stream literal")
    par.add_argument("--depth", type=int, required=True)
    unp = csub.add_parser("unparity", help="2-adic integer with a given parity vector")
    unp.add_argument("stream", help="stream literal such as 10(0)")
    unp.add_argument("--depth", type=int, required=True)

    st = sub.add_parser("stream", help="stream utilities")
    ssub = st.add_subparsers(dest="action", parser_class=_Parser)
    dist = ssub.add_parser("distance", help="ultrametric distance of two streams")
    dist.add_argument("sigma")
    dist.add_argument("tau")
    dist.add_argument("--depth", type=int, default=None,
                      help="only inspect this many symbols")

    chk = sub.add_parser("check", help="causality checks over a spec file")
    chsub = chk.add_subparsers(dest="action", parser_class=_Parser)
    cc = chsub.add_parser("causal", help="is the function k-causal?")
    cc.add_argument("--spec", required=True)
    cc.add_argument("--k", type=int, required=True)
    cc.add_argument("--depth", type=int, required=True)
    cc.add_argument("--seed", type=int, default=0)
    cc.add_argument("--samples", type=int, default=2000)
    cb = chsub.add_parser("bicausal", help="is the function a bicausal bijection?")
    cb.add_argument("--spec", required=True)
    cb.add_argument("--depth", type=int, required=True)
    cb.add_argument("--seed", type=int, default=0)

    wv = sub.add_parser("weave", help="certificate of a woven function")
    wv.add_argument("--spec", required=True)

    co = sub.add_parser("coinduce", help="coinduced stream of a coalgebra state")
    co.add_argument("--spec", required=True)
    co.add_argument("--state", required=True)
    co.add_argument("--depth", type=int, required=True)

    me = sub.add_parser("mealy", help="Mealy machine behaviour")
    msub = me.add_subparsers(dest="action", parser_class=_Parser)
    mb = msub.add_parser("behavior", help="output prefix for an input stream")
    mb.add_argument("--spec", required=True)
    mb.add_argument("--state", default=None)
    mb.add_argument("--input", required=True)
    mb.add_argument("--depth", type=int, required=True)
    return p


def _emit(out, fmt: str, human: str, record: dict) -> None:
    if fmt == "human":
        print(human, file=out)
    else:
        for k, v in record.items():
            print(f"{k}: {v}", file=out)


def _positive(name: str, value: int) -> None:
    if value < 1:
        raise UsageError(f"--{name} must be >= 1")


def _spec_function(path: str):
    spec = load_spec(path)
    if spec.function is None:
        raise SpecError(f"{path}: no [function] section")
    return spec


def _cmd_collatz(args, out) -> int:
    if args.action == "trace":
        if args.n < 1:
            raise UsageError("trace needs n >= 1")
        t = collatz.trajectory(args.n, args.max_steps)
        human = " -> ".join(map(str, t.steps))
        if not t.reached_one:
            human += f"\n(stopped after {args.max_steps} steps)"
        _emit(out, args.format, human, {
            "start": t.start, "steps": len(t.steps) - 1, "reached_one": str(t.reached_one).lower(),
            "trajectory": " ".join(map(str, t.steps))})
        return EXIT_OK if t.reached_one else EXIT_FALSIFIED
    if args.action == "parity":
        _positive("depth", args.depth)
        x = parse_dyadic(args.x)
        bits = format_word(collatz.parity_vector_Q(x).prefix(args.depth))
        _emit(out, args.format, bits, {"x": x, "depth": args.depth, "parity": bits})
        return EXIT_OK
    if args.action == "unparity":
        _positive("depth", args.depth)
        s = parse_stream(args.stream)
        # literals are eventually periodic, so the series has an exact sum;
        # the truncated residue is reported alongside as a cross-check
        exact = collatz.inverse_Q(s)
        r = collatz.inverse_Q_residue(s, args.depth)
        if exact.residue(args.depth) != r:
            raise StreamError("series residue disagrees with the closed form")
        _emit(out, args.format, str(exact), {"stream": format_stream(s), "depth": args.depth,
                                             "value": exact, "residue": r})
        return EXIT_OK
    raise UsageError("collatz needs one of: trace, parity, unparity")


def _cmd_stream(args, out) -> int:
    if args.action != "distance":
        raise UsageError("stream needs: distance")
    s, t = parse_stream(args.sigma), parse_stream(args.tau)
    if args.depth is None:
        d = distance_exact(s, t)
    else:
        _positive("depth", args.depth)
        d = _bounded_distance(s, t, args.depth)
    _emit(out, args.format, str(d), {"sigma": format_stream(s), "tau": format_stream(t), "distance": d})
    return EXIT_OK


def _bounded_distance(s: EpStream, t: EpStream, depth: int) -> Distance:
    a, b = s.take(depth), t.take(depth)
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return Distance.exact(i)
    return Distance.at_most(depth)


def _report_exit(report) -> int:
    return EXIT_FALSIFIED if report.falsified else EXIT_OK


def _print_report(out, fmt: str, report, extra: Optional[dict] = None) -> None:
    if fmt == "human":
        print(report.summary(), file=out)
        for k, v in sorted(report.stats.items()):
            print(f"  {k}: {v}", file=out)
        for k, v in (extra or {}).items():
            print(f"  {k}: {v}", file=out)
    else:
        print(report.to_record(), file=out)
        for k, v in (extra or {}).items():
            print(f"{k}: {v}", file=out)


def _cmd_check(args, out) -> int:
    if args.action not in ("causal", "bicausal"):
        raise UsageError("check needs one of: causal, bicausal")
    _positive("depth", args.depth)
    spec = _spec_function(args.spec)
    f = spec.function
    if args.action == "causal":
        rep = check_k_causal(f, args.k, args.depth, samples=args.samples, seed=args.seed)
        _print_report(out, args.format, rep, {"function": spec.function_text})
        return _report_exit(rep)
    rep = check_bicausal(f, args.depth, seed=args.seed)
    extra = {"function": spec.function_text}
    if not rep.falsified and f.codomain == f.domain:
        levels = check_bijection_levels(f, args.depth)
        extra["bijection"] = levels.verdict
        extra["level_table_sizes"] = " ".join(str(levels.stats[k]) for k in sorted(
            levels.stats, key=lambda k: int(k.split("_")[1])))
        if levels.falsified:
            _print_report(out, args.format, levels, extra)
            return EXIT_FALSIFIED
    _print_report(out, args.format, rep, extra)
    return _report_exit(rep)


def _cmd_weave(args, out) -> int:
    spec = _spec_function(args.spec)
    f = spec.function
    if f.family is None:
        raise SpecError(f"{args.spec}: the function is not a weave(...) expression")
    cert = f.certificate
    members = [f"{m.name} (index {m.index})" for m in f.family.members]
    human = [f"woven function: {f.name}", f"certificate: {cert!r}",
             "members:"] + [f"  {a}: {m}" for a, m in enumerate(members)]
    record = {"function": spec.function_text, "index": f.index,
              "provenance": cert.provenance.kind,
              "bicausal_members": str(f.family.all_bicausal).lower(),
              "members": "; ".join(members)}
    _emit(out, args.format, "\n".join(human), record)
    return EXIT_OK


def _cmd_coinduce(args, out) -> int:
    _positive("depth", args.depth)
    spec = load_spec(args.spec)
    if spec.coalgebra is None:
        raise SpecError(f"{args.spec}: no [coalgebra] section")
    fc = spec.coalgebra
    if args.state not in fc.observe:
        raise SpecError(f"unknown state {args.state!r}")
    c = fc.as_coalgebra()
    phi = coinduce(c, args.state)
    prefix = format_word(phi.take(args.depth), fc.alphabet)
    exact = find_periodic(c, args.state, max_steps=len(fc.states) + 1)
    square = check_morphism(lambda x: coinduce(c, x), c, final_coalgebra(fc.alphabet, args.depth),
                            [args.state], args.depth)
    human = f"{prefix}\nstream: {format_stream(exact)}\nfinality square: {square.summary()}"
    _emit(out, args.format, human, {"state": args.state, "depth": args.depth, "prefix": prefix,
                                    "stream": format_stream(exact),
                                    "verdict": square.verdict})
    return EXIT_OK if square.commutes else EXIT_FALSIFIED


def _cmd_mealy(args, out) -> int:
    if args.action != "behavior":
        raise UsageError("mealy needs: behavior")
    _positive("depth", args.depth)
    spec = load_spec(args.spec)
    if spec.mealy is None:
        raise SpecError(f"{args.spec}: no [mealy] section")
    m = spec.mealy
    state = m.initial if args.state is None else args.state
    if state not in m.states:
        raise SpecError(f"unknown state {state!r}")
    f = mealy_behavior(m, state)
    s = parse_stream(args.input, m.inputs)
    prefix = format_word(f.image_prefix(s, args.depth), m.outputs)
    _emit(out, args.format, prefix, {"state": state, "input": format_stream(s),
                                     "depth": args.depth, "output": prefix})
    return EXIT_OK


_COMMANDS = {"collatz": _cmd_collatz, "stream": _cmd_stream, "check": _cmd_check,
             "weave": _cmd_weave, "coinduce": _cmd_coinduce, "mealy": _cmd_mealy}


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(_COMMANDS))
        return _COMMANDS[args.command](args, out)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
    except SpecError as e:
        print(f"spec error: {e}", file=err)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=err)
    except StreamError as e:
        print(f"invalid input: {e}", file=err)
    return EXIT_USAGE


def main() -> None:
    sys.exit(run())
