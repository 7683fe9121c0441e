"""Command-line front end.

Every command reads an instance file and prints deterministic text: same
invocation, same bytes. Exit codes: 0 on success, 1 on domain errors (one
`error: ...` line on stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .choice import (
    DECOMPOSE_CAP,
    EXHAUSTIVE_CAP,
    ContractSet,
    decompose_into_orders,
    format_set,
    is_plott,
    parse_set,
)
from .errors import CapExceeded, NotCertified, ParseError, PlottmatchError
from .hyperorders import AUDIT_CAP, DerivedLehmann, audit_lehmann_axioms, reconstruct_choice
from .market import MarketInstance, aggregate_sides, parse_instance
from .oracle import ENUMERATE_CAP, enumerate_stable_sets, format_catalog, verify_lattice
from .stability import (
    SidePair,
    format_trace,
    comparative_statics,
    blair_compare_stable,
    is_stable_set,
    run_to_fixpoint,
    semi_stable_pair,
    side_pair,
)


def _load(path: str) -> MarketInstance:
    return parse_instance(Path(path).read_text())


def _parse_cli_set(text: str, labels, n: int) -> ContractSet:
    try:
        return parse_set(text, labels, n)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _require_plott_sides(sides: SidePair):
    if sides.f_report is not None and not sides.f_report.is_plott:
        raise NotCertified("side F is not path-independent")
    if sides.g_report is not None and not sides.g_report.is_plott:
        raise NotCertified("side G is not path-independent")


def _targets(m: MarketInstance, args, *, default_both: bool):
    """Resolve --agent/--side into (prefix, cf, labels) triples."""
    agent = getattr(args, "agent", None)
    side = getattr(args, "side", None)
    if agent is not None:
        spec = m.spec_of(agent)
        labels = tuple(m.labels[g] for g in spec.block)
        return [(None, spec.cf, labels)]
    sides = aggregate_sides(m, certify=False)
    if side is not None:
        cf = sides.F if side == "F" else sides.G
        return [(None, cf, m.labels)]
    if default_both:
        return [("F", sides.F, m.labels), ("G", sides.G, m.labels)]
    return [(None, sides.G, m.labels)]


def _audit_lines(cf, labels, cap) -> list[str]:
    try:
        report = audit_lehmann_axioms(DerivedLehmann(cf), cap=cap or AUDIT_CAP)
    except CapExceeded:
        return ["lehmann: skipped (universe exceeds audit cap)"]
    verdicts = " ".join(
        f"{c.name}={'pass' if c.passed else 'fail'}" for c in report.checks)
    lines = [f"lehmann: {verdicts}"]
    for c in report.checks:
        if not c.passed:
            sets = ", ".join(format_set(w, labels) for w in c.witness)
            lines.append(f"lehmann witness {c.name}: {sets}")
    return lines


def cmd_check(args) -> int:
    m = _load(args.instance)
    for prefix, cf, labels in _targets(m, args, default_both=True):
        if args.mode == "exhaustive":
            report = is_plott(cf, "exhaustive", cap=args.cap or EXHAUSTIVE_CAP)
        else:
            report = is_plott(cf, "sampled", seed=args.seed)
        lines = []
        if report.is_plott:
            if report.mode == "exhaustive":
                lines.append("PLOTT (exhaustive)")
            else:
                lines.append(f"PLOTT (sampled, seed={report.seed}, "
                             f"trials={report.trials})")
            lines.extend(_audit_lines(cf, labels, args.cap))
        elif report.heredity_witness is not None:
            b, a, element = report.heredity_witness
            lines.append(
                f"NOT PLOTT: heredity violated at B={format_set(b, labels)}, "
                f"A={format_set(a, labels)}, element {labels[element]}")
        else:
            x, y = report.outcast_witness
            lines.append(
                f"NOT PLOTT: outcast violated at X={format_set(x, labels)}, "
                f"Y={format_set(y, labels)}")
        for line in lines:
            print(f"{prefix}: {line}" if prefix else line)
    return 0


def cmd_solve(args) -> int:
    m = _load(args.instance)
    sides = aggregate_sides(m)
    _require_plott_sides(sides)
    frame = sides if args.favor == "F" else sides.swap()
    n = m.universe_size
    start = semi_stable_pair(frame, ContractSet.empty(n), ContractSet.full(n))
    trace = run_to_fixpoint(frame, start)
    if args.trace:
        print(format_trace(frame, trace, m.labels), end="")
    print(format_set(trace.result.S, m.labels))
    return 0


def cmd_enumerate(args) -> int:
    m = _load(args.instance)
    sides = aggregate_sides(m)
    catalog = enumerate_stable_sets(sides, cap=args.cap or ENUMERATE_CAP)
    if args.catalog:
        print(format_catalog(catalog, m.labels), end="")
        return 0
    if not catalog.stable_sets:
        print("no stable sets")
        return 0
    for s in catalog.stable_sets:
        print(format_set(s, m.labels))
    return 0


def cmd_lattice(args) -> int:
    m = _load(args.instance)
    sides = aggregate_sides(m)
    _require_plott_sides(sides)
    catalog = enumerate_stable_sets(sides, cap=args.cap or ENUMERATE_CAP)
    report = verify_lattice(catalog, sides, m.labels)
    print(f"stable sets: {report.sets}")
    print(f"bottom: {format_set(catalog.bottom(), m.labels)}")
    print(f"top: {format_set(catalog.top(), m.labels)}")
    for failure in report.failures:
        print(f"mismatch: {failure}")
    if report.passed:
        print(f"lattice OK ({report.sets} sets, {report.pairs_checked} pairs checked)")
    else:
        print(f"lattice FAILED ({len(report.failures)} mismatches)")
    return 0


def cmd_compare(args) -> int:
    m = _load(args.instance)
    sides = aggregate_sides(m)
    _require_plott_sides(sides)
    S = _parse_cli_set(args.set_a, m.labels, m.universe_size)
    T = _parse_cli_set(args.set_b, m.labels, m.universe_size)
    print(blair_compare_stable(sides, S, T))
    return 0


def cmd_statics(args) -> int:
    m = _load(args.instance)
    m2 = _load(args.weakened)
    if m2.labels != m.labels:
        raise ParseError("weakened instance must declare the same contracts")
    sides = aggregate_sides(m)
    _require_plott_sides(sides)
    f_prime = aggregate_sides(m2, certify=False).F
    S = _parse_cli_set(args.stable_set, m.labels, m.universe_size)
    s_prime = comparative_statics(sides, f_prime, S)
    print(format_set(s_prime, m.labels))
    weakened_sides = side_pair(f_prime, sides.G, certify=False)
    preserved = bool(is_stable_set(weakened_sides, S))
    print(f"preserved: {'yes' if preserved else 'no'}")
    return 0


def cmd_lehmann(args) -> int:
    m = _load(args.instance)
    [(prefix, cf, labels)] = _targets(m, args, default_both=False)
    report = is_plott(cf, cap=args.cap or EXHAUSTIVE_CAP)
    if not report.is_plott:
        target = f"agent {args.agent}" if args.agent else f"side {args.side or 'G'}"
        raise NotCertified(f"{target} is not path-independent")
    for line in _audit_lines(cf, labels, args.cap):
        print(line)
    if args.roundtrip:
        rebuilt = reconstruct_choice(DerivedLehmann(cf), cap=args.cap or AUDIT_CAP)
        total = 1 << cf.universe_size
        bad = sum(1 for x in range(total) if rebuilt.table[x] != cf._choose_mask(x))
        if bad == 0:
            print(f"round-trip OK ({total}/{total} subsets)")
        else:
            print(f"round-trip FAILED ({total - bad}/{total} subsets)")
    return 0


def cmd_decompose(args) -> int:
    m = _load(args.instance)
    [(prefix, cf, labels)] = _targets(m, args, default_both=False)
    orders = decompose_into_orders(cf, cap=args.cap or DECOMPOSE_CAP)
    n = cf.universe_size
    full = (1 << n) - 1
    for o in orders:
        line = "order: " + " ".join(labels[i] for i in o.order)
        if o.acceptable_mask != full:
            line += " acceptable=" + format_set(ContractSet(n, o.acceptable_mask), labels)
        print(line)
    total = 1 << n
    print(f"union verified on {total}/{total} subsets")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for sampled checks and any randomized work")
    common.add_argument("--cap", type=int, default=None,
                        help="override the exhaustive-scan size cap")

    parser = argparse.ArgumentParser(
        prog="plottmatch",
        description="Two-sided matching with contracts under "
                    "path-independent choice functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("instance", help="instance file")
        p.set_defaults(func=func)
        return p

    p = add("check", cmd_check, "verify path independence and Lehmann axioms")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--agent", help="check one agent's own choice function")
    target.add_argument("--side", choices=("F", "G"), help="check one aggregate side")
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")

    p = add("solve", cmd_solve, "run the dynamics to a stable set")
    p.add_argument("--favor", choices=("F", "G"), default="F",
                   help="which side the solution is best for")
    p.add_argument("--trace", action="store_true", help="print every step")

    p = add("enumerate", cmd_enumerate, "list every stable set by brute force")
    p.add_argument("--catalog", action="store_true",
                   help="print the full catalog with fingerprint and Blair matrix")

    add("lattice", cmd_lattice, "verify the lattice of stable sets")

    p = add("compare", cmd_compare, "compare two stable sets in the Blair order")
    p.add_argument("set_a", help="first stable set, e.g. '{a}'")
    p.add_argument("set_b", help="second stable set")

    p = add("statics", cmd_statics, "re-solve after weakening the worker side")
    p.add_argument("weakened", help="instance file with the weakened worker side")
    p.add_argument("stable_set", help="stable set of the original instance")

    p = add("lehmann", cmd_lehmann, "audit the Lehmann axioms of one side")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--agent")
    target.add_argument("--side", choices=("F", "G"))
    p.add_argument("--roundtrip", action="store_true",
                   help="rebuild the choice function from the relation and compare")

    p = add("decompose", cmd_decompose, "write one side as a union of orders")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--agent")
    target.add_argument("--side", choices=("F", "G"))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except PlottmatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
