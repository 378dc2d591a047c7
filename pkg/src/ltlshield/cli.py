"""Command-line front end.

Exit codes: 0 success, 1 the property the command checks is violated or a
fault was found, 2 usage error, 3 internal error.  Outputs are byte-stable
for fixed arguments and seed (no timestamps).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .formula import FormulaError
from .monitor import (SafetyClass, build_monitor, classify_safety,
                      monitor_to_doc, monitor_to_dot)
from .reach import validate_high_assurance
from .sim import (builtin_scenario, check_trace, scenario_from_doc, simulate)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _load_scenario(path: str):
    if path.startswith("builtin:"):
        return builtin_scenario(path.split(":", 1)[1])
    text = Path(path).read_text()
    try:
        return scenario_from_doc(text)
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        line = None
        if isinstance(exc, json.JSONDecodeError):
            line = exc.lineno
        where = f" (line {line})" if line else ""
        raise ValueError(f"malformed scenario file {path}{where}: {exc}") from exc


def _split_ap(text: str) -> list[str]:
    return [a.strip() for a in text.split(",") if a.strip()]


def _cmd_compile(args) -> int:
    m = build_monitor(args.formula, _split_ap(args.ap))
    Path(args.out).write_text(monitor_to_doc(m))
    if args.dot:
        Path(args.dot).write_text(monitor_to_dot(m))
    print(f"monitor: {len(m.states)} states over ap={sorted(m.ap)} "
          f"-> {args.out}")
    return EXIT_OK


def _cmd_check_safety(args) -> int:
    cls = classify_safety(args.formula, _split_ap(args.ap))
    print(cls.value)
    return EXIT_OK if cls == SafetyClass.SAFETY else EXIT_VIOLATION


def _cmd_validate_sb(args) -> int:
    sc = _load_scenario(args.scenario)
    report = validate_high_assurance(
        sc.sb(), sc.backup, sc.dynamics, sc.label_map, sc.monitor(),
        cell=args.cell, frame=sc.frame)
    print(report)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _write_trace(trace, out: str) -> None:
    path = Path(out)
    if path.suffix == ".csv":
        path.write_text(trace.to_csv())
    else:
        path.write_text(trace.to_json())


def _cmd_run(args) -> int:
    sc = _load_scenario(args.scenario)
    trace = simulate(sc, seed=args.seed, ticks=args.ticks,
                     shield=not args.no_shield)
    if args.out:
        _write_trace(trace, args.out)
    print(f"{trace.scenario} seed={args.seed} ticks={trace.summary.ticks_run} "
          f"shield={'off' if args.no_shield else 'on'}")
    print(f"  bad-prefix trap reached: {trace.summary.bot_reached}")
    print(f"  final verdict: {trace.summary.final_verdict}")
    if trace.summary.crossing_tick is not None:
        print(f"  tower crossed at tick {trace.summary.crossing_tick} "
              f"with v={trace.summary.crossing_speed:.3f}")
    return EXIT_VIOLATION if trace.summary.bot_reached else EXIT_OK


def _cmd_casestudy(args) -> int:
    from .sim import delorean_scenario

    sc = delorean_scenario(args.driver)
    trace = simulate(sc, seed=args.seed, ticks=args.ticks)
    verdict = check_trace(trace, sc.monitor())
    if args.out:
        _write_trace(trace, args.out)
    s = trace.summary
    print(f"case study driver={args.driver} seed={args.seed}")
    print(f"  ticks: {s.ticks_run}")
    print(f"  first intervention (fault) tick: {s.first_fault_tick}")
    if s.crossing_tick is not None:
        print(f"  tower crossed at tick {s.crossing_tick} "
              f"with v={s.crossing_speed:.3f}")
    else:
        print("  tower not crossed")
    print(f"  bad-prefix trap reached: {s.bot_reached}")
    print(f"  final verdict: {verdict.value}")
    return EXIT_VIOLATION if s.bot_reached else EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    sc = _load_scenario(args.scenario)
    app = create_app(sc, tick_ms=args.tick_ms, seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltlshield",
        description="Compile three-valued LTL monitors and run the "
                    "verified-recovery safety shield.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a formula into a monitor")
    p.add_argument("--formula", required=True)
    p.add_argument("--ap", required=True, help="comma-separated atom names")
    p.add_argument("--out", required=True, help="monitor document path")
    p.add_argument("--dot", help="graph-description export path")
    p.set_defaults(fn=_cmd_compile)

    p = sub.add_parser("check-safety", help="classify a formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--ap", required=True)
    p.set_defaults(fn=_cmd_check_safety)

    p = sub.add_parser("validate-sb",
                       help="grid-check the high assurance region")
    p.add_argument("--scenario", required=True)
    p.add_argument("--cell", type=float, default=0.05)
    p.set_defaults(fn=_cmd_validate_sb)

    p = sub.add_parser("run", help="simulate a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ticks", type=int, required=True)
    p.add_argument("--out", help="trace path (.json or .csv)")
    p.add_argument("--no-shield", action="store_true",
                   help="apply driver inputs unverified (contrast runs)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("casestudy", help="run the car case study")
    p.add_argument("--driver", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ticks", type=int, default=200)
    p.add_argument("--out", help="trace path (.json or .csv)")
    p.set_defaults(fn=_cmd_casestudy)

    p = sub.add_parser("serve", help="start the cockpit gateway")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--tick-ms", type=int, default=250)
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=_cmd_serve)
    return parser


def run_cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (FormulaError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
