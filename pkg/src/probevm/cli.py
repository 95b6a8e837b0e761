"""Command-line entry point.

``probevm run FILE`` executes a guest program with optional tools attached;
tool reports go to stdout as JSON after the program terminates, program output
goes to stdout as it happens. ``probevm bench`` runs the overhead experiments
and prints human-readable tables to stderr.

Exit codes for ``run``: 0 on success, the guest's exit code on an explicit
``exit(n)``, 1 on a guest error (message to stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .engine import Engine
from .tools import (
    CoverageHandle, LimiterHandle, ProfileHandle, TraceHandle, set_trace,
)
from .values import CANCELLED, EXIT, GuestException

_EXTENSIONS = {".toy": "toylang", ".calc": "minicalc"}


def _detect_language(path: Path, lang: str) -> str:
    if lang != "auto":
        return lang
    detected = _EXTENSIONS.get(path.suffix)
    if detected is None:
        raise SystemExit(
            f"probevm: cannot detect language of {path.name!r}; pass --lang")
    return detected


def _cmd_run(args) -> int:
    path = Path(args.file)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"probevm: {exc}", file=sys.stderr)
        return 2
    language = _detect_language(path, args.lang)

    engine = Engine(output=lambda t: (sys.stdout.write(t), sys.stdout.flush()),
                    diagnostics=sys.stderr.write)
    source = engine.create_source(path.name, language, text)

    reports = []
    coverage = CoverageHandle(engine) if args.coverage else None
    profile = ProfileHandle(engine) if args.profile else None
    if args.trace:
        def on_statement(event):
            line, col, _, _ = event.section.line_col()
            sys.stderr.write(
                f"TRACE {event.section.source.name}:{line}:{col} in {event.root_name}\n")
        set_trace(engine, on_statement)
    if args.limit_statements is not None:
        LimiterHandle(engine, args.limit_statements)

    if args.debug_port is not None:
        return _run_with_server(source, args.debug_port)

    if args.repl_debug:
        return _run_repl(engine, source)

    code = 0
    try:
        engine.run(source, args.args)
    except GuestException as exc:
        if exc.kind == EXIT:
            code = exc.exit_code
        else:
            print(f"probevm: {exc}", file=sys.stderr)
            code = 1
    if coverage is not None:
        reports.append(coverage.report_json())
    if profile is not None:
        reports.append(profile.report_json())
    for report in reports:
        print(json.dumps(report, indent=2))
    return code


def _run_with_server(source, port: int) -> int:
    # the server owns its engines (one per client); the file is preloaded into
    # each, and the connected client decides when to run it
    from .server import serve
    print(f"probevm: debug server on ws://127.0.0.1:{port}/debug "
          f"(UI at http://127.0.0.1:{port}/ui/)", file=sys.stderr)
    serve(port=port, preload=(source.name, source.language_id, source.text))
    return 0


def _run_repl(engine, source) -> int:
    """Minimal terminal stepping shell over DebugSession."""
    from .debugger import DebugSession, DebuggerError, NotSuspended

    session = DebugSession(engine)
    print("repl-debug: break LINE [COND] | run | step | next | out | "
          "cont | stack | vars | eval EXPR | quit", file=sys.stderr)
    outcome = {"code": 0}

    def on_done(result, error):
        if error is not None:
            if error.kind == EXIT:
                outcome["code"] = error.exit_code
            else:
                print(f"probevm: {error}", file=sys.stderr)
                outcome["code"] = 1

    started = False
    while True:
        try:
            line = input("(pdbg) ").strip()
        except EOFError:
            return outcome["code"]
        if not line:
            continue
        cmd, _, rest = line.partition(" ")
        try:
            if cmd == "break":
                parts = rest.split(maxsplit=1)
                bp = session.set_breakpoint(source.name, int(parts[0]),
                                            parts[1] if len(parts) > 1 else None)
                print(f"breakpoint {bp.id} at line {parts[0]}", file=sys.stderr)
            elif cmd == "run":
                if started:
                    print("already running", file=sys.stderr)
                    continue
                started = True
                thread = session.start(source, on_done=on_done)
                _report_stop(session, thread)
            elif cmd in ("step", "next", "out", "cont"):
                {"step": session.step_into, "next": session.step_over,
                 "out": session.step_out, "cont": session.continue_}[cmd]()
                _report_stop(session, session._thread)
            elif cmd == "stack":
                for i, entry in enumerate(session.stack().stack):
                    loc = _loc(entry.section)
                    print(f"#{i} {entry.root_name} at {loc}", file=sys.stderr)
            elif cmd == "vars":
                for scope in session.scopes(0):
                    frontend = engine.frontends[source.language_id]
                    for e in scope.entries:
                        print(f"{e.name} = {frontend.to_display_string(e.value)}",
                              file=sys.stderr)
            elif cmd == "eval":
                display, _ = session.eval_in_frame(0, rest)
                print(display, file=sys.stderr)
            elif cmd == "quit":
                return outcome["code"]
            else:
                print(f"unknown command {cmd!r}", file=sys.stderr)
        except (NotSuspended, DebuggerError, ValueError, IndexError) as exc:
            print(f"error: {exc}", file=sys.stderr)
        except GuestException as exc:
            print(f"guest error: {exc}", file=sys.stderr)


def _loc(section) -> str:
    if section is None:
        return "<unknown>"
    line, col, _, _ = section.line_col()
    return f"{section.source.name}:{line}:{col}"


def _report_stop(session, thread):
    from .debugger import DebuggerError
    try:
        state = session.wait_suspended(timeout=30)
    except DebuggerError:
        if thread is not None:
            thread.join(timeout=5)
        print("program terminated", file=sys.stderr)
        return
    loc = _loc(state.context.source_section)
    print(f"suspended ({state.reason}) at {loc}", file=sys.stderr)


def _cmd_bench(args) -> int:
    result = bench_mod.run_experiment(args.experiment, args.iterations)
    print(bench_mod.format_table(result), file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="probevm")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a guest program")
    run_p.add_argument("file")
    run_p.add_argument("args", nargs="*", help="guest program arguments")
    run_p.add_argument("--lang", choices=["auto", "toylang", "minicalc"],
                       default="auto")
    run_p.add_argument("--coverage", action="store_true")
    run_p.add_argument("--trace", action="store_true")
    run_p.add_argument("--profile", action="store_true")
    run_p.add_argument("--limit-statements", type=int, default=None, metavar="N")
    run_p.add_argument("--debug-port", type=int, default=None, metavar="P")
    run_p.add_argument("--repl-debug", action="store_true")
    run_p.set_defaults(func=_cmd_run)

    bench_p = sub.add_parser("bench", help="overhead experiments")
    bench_p.add_argument("experiment", choices=["settrace", "breakpoints"])
    bench_p.add_argument("--iterations", type=int,
                         default=bench_mod.DEFAULT_ITERATIONS, metavar="K")
    bench_p.set_defaults(func=_cmd_bench)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
