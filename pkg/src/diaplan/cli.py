"""Command line interface: check programs, run them, export results.

`diaplan check FILE...` type-checks programs; `diaplan run FILE` evaluates
one. The combinator library ships with the package and is loaded as a
prelude before user files.

Exit codes: 0 success, 1 check violations, 2 I/O or syntax errors,
3 evaluation failure, 4 exception, 5 budget exhausted.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

from .dsl import ParseError, export_dot, parse_graph, parse_program, print_graph
from .engine import Budget, Outcome, check_visibility, evaluate
from .graph import CALL, Graph, GraphError
from .program import Program
from .report import Report
from .rules import check_rule
from .shapes import check_program

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_IO = 2
EXIT_FAILURE = 3
EXIT_EXCEPTION = 4
EXIT_BUDGET = 5


def stdlib_path() -> Path:
    return Path(str(resources.files("diaplan.data") / "stdlib.dp"))


def stdlib_program() -> Program:
    return parse_program(stdlib_path().read_text())


def load_program(*paths: str) -> Program:
    """Parse the prelude plus the given files into one program."""
    prog = stdlib_program()
    lib = stdlib_path().resolve()
    for p in paths:
        path = Path(p)
        if path.resolve() == lib:
            continue
        prog = parse_program(path.read_text(), base=prog)
    return prog


def _check_reports(prog: Program) -> Report:
    rep = Report()
    for pred in prog.predicates.values():
        for rule in pred.rules:
            rep.extend(check_rule(rule))
    rep.extend(check_visibility(prog))
    rep.extend(check_program(prog))
    return rep


def cmd_check(paths: list[str]) -> int:
    try:
        prog = load_program(*paths)
    except (OSError, ParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    rep = _check_reports(prog)
    for f in rep.findings:
        print(f"{f.severity}: {f.code}: {f.message}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_VIOLATIONS


def _load_input(prog: Program, spec: str) -> Graph:
    if spec in prog.named_graphs:
        return prog.named_graphs[spec].copy()
    return parse_graph(Path(spec).read_text())


def _resolve_goals(prog: Program, host: Graph, goal: Optional[str],
                   args: Optional[str]) -> Optional[list[int]]:
    """Goal edge ids to evaluate: existing calls of the goal predicate, or a
    fresh call attached over the named nodes (default: the host's points)."""
    if goal is None:
        return None
    existing = [e.id for e in host.edges_sorted()
                if e.kind == CALL and e.label == goal]
    if existing:
        return existing
    if args:
        by_name = {host.nodes[i].name: i for i in sorted(host.nodes)}
        nodes = []
        for name in args.split(","):
            name = name.strip()
            if name not in by_name:
                raise GraphError(f"no node named {name!r} in the input graph")
            nodes.append(by_name[name])
    else:
        nodes = list(host.points)
    return [host.add_edge(goal, CALL, nodes)]


def cmd_run(ns: argparse.Namespace) -> int:
    try:
        prog = load_program(ns.program)
        host = _load_input(prog, ns.input)
        goals = _resolve_goals(prog, host, ns.goal, ns.args)
    except (OSError, ParseError, GraphError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO

    if not ns.no_typecheck:
        rep = _check_reports(prog)
        from .shapes import check_calls_in_graph, check_frames_in_graph
        check_frames_in_graph(prog, host, "input", rep)
        check_calls_in_graph(prog, host, "input", rep)
        if not rep.ok:
            for f in rep.findings:
                print(f"{f.severity}: {f.code}: {f.message}", file=sys.stderr)
            return EXIT_VIOLATIONS

    try:
        budget = Budget(ns.max_steps, ns.max_depth)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    outcome = evaluate(prog, host, budget, goals)

    if ns.trace:
        try:
            Path(ns.trace).write_text("".join(line + "\n" for line in outcome.trace))
        except OSError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_IO

    if outcome.kind == Outcome.SUCCESS:
        text = (export_dot(outcome.graph) if ns.format == "dot"
                else print_graph(outcome.graph, "result"))
        sys.stdout.write(text)
        return EXIT_OK
    print(f"{outcome.kind}{': ' + outcome.info if outcome.info else ''}",
          file=sys.stderr)
    if outcome.kind == Outcome.FAILURE:
        return EXIT_FAILURE
    if outcome.kind == Outcome.EXCEPTION:
        return EXIT_EXCEPTION
    return EXIT_BUDGET


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diaplan",
                                 description="Check and run graph programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("check", help="type-check program files")
    pc.add_argument("paths", nargs="+", help="program files (.dp)")

    pr = sub.add_parser("run", help="evaluate a program on an input graph")
    pr.add_argument("program", nargs="?", help="program file (.dp)")
    pr.add_argument("--program", dest="program_flag", help="program file (.dp)")
    pr.add_argument("--input", required=True,
                    help="named graph from the program, or a graph file")
    pr.add_argument("--goal", help="predicate to call (reuses matching calls "
                                   "already in the input, else attaches one)")
    pr.add_argument("--args", help="comma-separated node names for --goal")
    pr.add_argument("--max-steps", type=int, default=100000)
    pr.add_argument("--max-depth", type=int, default=1000)
    pr.add_argument("--trace", help="write the evaluation trace to this file")
    pr.add_argument("--format", choices=("dsl", "dot"), default="dsl")
    pr.add_argument("--no-typecheck", action="store_true")
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.command == "check":
        return cmd_check(ns.paths)
    program = ns.program_flag or ns.program
    if program is None:
        print("error: no program file given", file=sys.stderr)
        return EXIT_IO
    ns.program = program
    return cmd_run(ns)


if __name__ == "__main__":
    sys.exit(main())
