"""Command-line front end.

Exit codes: 0 success with a positive result; 1 well-formed input with a
negative answer (formula unsatisfied, no model); 2 input error; 3 resource
guard tripped.  Results go to standard output as JSON documents (plus an
aligned table for the demo); diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import equilibrium, kamp, parser, semantics
from .equilibrium import EnumerationLimitError, SolveOptions, StratificationError
from .parser import ParseError
from .semantics import EntryLimitError
from .trace import format_value, parse_value, total_trace

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_GUARD = 3

#: The speeding-car demonstration program: a car accelerates past a radar.
#: Kept textually identical to demos/radar.tlp; a test enforces the match.
RADAR_PROGRAM = """\
% A radar at the 400 km mark enforces a 90 km/h limit; the car starts at
% 80 km/h, accelerates by 11.35 at time 4 and decelerates by 2.301 at time 6.
#rational p.
#rational s.
#rational acc.
#rational rdpos.
#rational rdlimit.
#boolean fine.

p := 0.
s := 80.
always: rdlimit := 90.
always: rdpos := 400.
always: s@1 := s + acc.
always: s@1 := s :- not (s@1 != s).
always: p@1 := p + s.
always: fine@1 :- p < rdpos, p@1 >= rdpos, s@1 > rdlimit.
acc@4 := 11.35.
acc@6 := -2.301.
"""

#: Variant replacing the speed inertia rule by a zero-acceleration default.
RADAR_DEFAULT_ACC_PROGRAM = """\
% As radar.tlp, but acceleration defaults to 0 instead of speed being inert.
#rational p.
#rational s.
#rational acc.
#rational rdpos.
#rational rdlimit.
#boolean fine.

p := 0.
s := 80.
always: rdlimit := 90.
always: rdpos := 400.
always: s@1 := s + acc.
always: acc := 0 :- not (acc != 0).
always: p@1 := p + s.
always: fine@1 :- p < rdpos, p@1 >= rdpos, s@1 > rdlimit.
acc@4 := 11.35.
acc@6 := -2.301.
"""

DEMO_PROGRAMS = {
    "radar": RADAR_PROGRAM,
    "radar-default-acc": RADAR_DEFAULT_ACC_PROGRAM,
}

DEMO_HORIZON = 9


def _emit(document):
    sys.stdout.write(json.dumps(document, sort_keys=True, indent=2) + "\n")


def _read_file(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as err:
        raise ParseError("cannot read %s: %s" % (path, err.strerror), parser.SourceSpan(1, 1, 0, 0))


def cmd_check(args):
    formula = parser.parse_formula(_read_file(args.formula))
    model = parser.parse_trace(_read_file(args.trace))
    if args.all_times:
        indices = list(range(model.length))
    else:
        indices = [args.at]
        if not 0 <= args.at < model.length:
            raise ParseError(
                "time point %d outside trace of length %d" % (args.at, model.length),
                parser.SourceSpan(1, 1, 0, 0),
            )
    results = [
        {"time": i, "satisfied": semantics.satisfies(model, i, formula)}
        for i in indices
    ]
    verdict = all(entry["satisfied"] for entry in results)
    _emit(
        {
            "formula": parser.print_formula(formula),
            "results": results,
            "satisfied": verdict,
        }
    )
    return EXIT_OK if verdict else EXIT_NEGATIVE


def _load_domains(path):
    try:
        doc = json.loads(_read_file(path))
    except json.JSONDecodeError as err:
        raise ParseError(
            "invalid domains document: %s" % err.msg,
            parser.SourceSpan(err.lineno, err.colno, err.pos, err.pos + 1),
        )
    if not isinstance(doc, dict):
        raise ParseError("domains document must be an object", parser.SourceSpan(1, 1, 0, 0))
    out = {}
    for name, values in doc.items():
        out[name] = tuple(parse_value(v) for v in values)
    return out


def _solve_with_options(program, opts):
    try:
        return equilibrium.solve(program, opts)
    except StratificationError as err:
        if opts.engine == "stratified" and _has_domains(program, opts):
            sys.stderr.write("stratification failed (%s); enumerating instead\n" % err)
            retry = SolveOptions(
                horizon=opts.horizon,
                frame_guard=opts.frame_guard,
                engine="enumerate",
                domains=opts.domains,
                entry_limit=opts.entry_limit,
                enumerate_limit=opts.enumerate_limit,
            )
            return equilibrium.solve(program, retry)
        raise


def _has_domains(program, opts):
    try:
        equilibrium._domain_values(program, opts)
    except ValueError:
        return False
    return True


def _solver_document(models, stats):
    return {
        "models": [parser.trace_document(total_trace(m)) for m in models],
        "stats": stats,
    }


def cmd_solve(args):
    program = parser.parse_program(_read_file(args.program))
    domains = _load_domains(args.domains) if args.domains else None
    opts = SolveOptions(
        horizon=args.horizon,
        frame_guard=not args.no_frame_guard,
        engine=args.engine,
        domains=domains,
    )
    models, stats = _solve_with_options(program, opts)
    _emit(_solver_document(models, stats))
    return EXIT_OK if models else EXIT_NEGATIVE


def cmd_translate(args):
    formula = parser.parse_formula(_read_file(args.formula))
    translated = kamp.st_translate(formula, args.free_var)
    sys.stdout.write(kamp.export_fo(translated))
    return EXIT_OK


def _demo_table(model, variables):
    trace = model
    header = ["time"] + variables
    rows = [header]
    for i in range(trace.length):
        row = [str(i)]
        for name in variables:
            value = trace.valuations[i].get(name)
            row.append(format_value(value))
        rows.append(row)
    widths = [max(len(row[col]) for row in rows) for col in range(len(header))]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def cmd_demo(args):
    program = parser.parse_program(DEMO_PROGRAMS[args.name])
    opts = SolveOptions(horizon=DEMO_HORIZON, engine="stratified")
    models, stats = equilibrium.solve(program, opts)
    if models:
        sys.stdout.write(_demo_table(models[0], ["s", "p", "acc", "fine"]))
    _emit(_solver_document(models, stats))
    return EXIT_OK if models else EXIT_NEGATIVE


def build_arg_parser():
    top = argparse.ArgumentParser(
        prog="thtc",
        description="Check, solve, and translate temporal constraint formulas over finite traces.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="evaluate a formula file against a trace file")
    check.add_argument("formula", help="formula file (.thtc)")
    check.add_argument("trace", help="trace document (.trace)")
    check.add_argument("--at", type=int, default=0, help="time point (default 0)")
    check.add_argument(
        "--all-times", action="store_true", help="report every time point"
    )
    check.set_defaults(handler=cmd_check)

    solve = sub.add_parser("solve", help="compute the stable traces of a program")
    solve.add_argument("program", help="program file (.tlp)")
    solve.add_argument("--horizon", type=int, required=True, help="trace length")
    solve.add_argument(
        "--engine",
        choices=("stratified", "enumerate"),
        default="stratified",
        help="solving engine (default stratified)",
    )
    solve.add_argument(
        "--no-frame-guard",
        action="store_true",
        help="instantiate always-rules even when their head leaves the horizon",
    )
    solve.add_argument(
        "--domains", help="JSON file of finite candidate values per variable"
    )
    solve.set_defaults(handler=cmd_solve)

    translate = sub.add_parser(
        "translate", help="print the first-order form of a formula"
    )
    translate.add_argument("formula", help="formula file (.thtc)")
    translate.add_argument(
        "--free-var", default="t", help="name of the free time variable (default t)"
    )
    translate.set_defaults(handler=cmd_translate)

    demo = sub.add_parser("demo", help="run an embedded demonstration program")
    demo.add_argument("name", choices=sorted(DEMO_PROGRAMS))
    demo.set_defaults(handler=cmd_demo)

    return top


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ParseError as err:
        sys.stderr.write("error: %s\n" % err)
        return EXIT_INPUT
    except (ValueError, StratificationError) as err:
        sys.stderr.write("error: %s\n" % err)
        return EXIT_INPUT
    except (EnumerationLimitError, EntryLimitError) as err:
        sys.stderr.write("resource guard: %s\n" % err)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
