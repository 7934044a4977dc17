"""``htax`` command line: validate scenarios, run them, inspect reports.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 I/O, parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ScenarioError
from .scenario import Scenario, load_scenario
from .sim import dumps_report, render_table, run, verify_report

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_INPUT = 3

log = logging.getLogger("htax")


def _read_scenario(path: str) -> Scenario:
    return load_scenario(Path(path).read_text())


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        scenario = _read_scenario(args.scenario)
    except OSError as exc:
        print(f"error: cannot read {args.scenario}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not args.quiet:
        print(f"ok: {len(scenario.actions)} actions, {len(scenario.accounts)} accounts")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = _read_scenario(args.scenario)
    except OSError as exc:
        print(f"error: cannot read {args.scenario}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_INPUT

    report = run(scenario)
    machine = report.to_json()
    try:
        if args.out:
            Path(args.out).write_text(machine)
        if args.events:
            Path(args.events).write_text(
                "".join(json.dumps(e, sort_keys=True) + "\n" for e in report.events)
            )
    except OSError as exc:
        print(f"error: cannot write output: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT

    if not args.quiet:
        if args.format == "table":
            sys.stdout.write(render_table(report))
        elif not args.out:
            sys.stdout.write(machine)
    for rejected in report.rejected:
        log.info("rejected action #%d (%s): %s", rejected["index"], rejected["type"], rejected["error"])

    checks = verify_report(report)
    if not checks.ok:
        for name in checks.failed:
            for problem in checks.violations[name]:
                print(f"verification failed [{name}]: {problem}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        report = json.loads(Path(args.report).read_text())
    except OSError as exc:
        print(f"error: cannot read {args.report}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: {args.report}: line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return EXIT_INPUT

    events = report["events"]
    out: dict = {}
    if args.frame is not None:
        frame = report["frames"].get(str(args.frame))
        if frame is None:
            print(f"error: frame {args.frame} not in report", file=sys.stderr)
            return EXIT_USAGE
        out["frame"] = frame
        events = [e for e in events if e.get("frame") == args.frame]
    if args.account is not None:
        accounts = report["balances"]["accounts"]
        if args.account not in accounts:
            print(f"error: account {args.account!r} not in report", file=sys.stderr)
            return EXIT_USAGE
        out["account"] = {
            "id": args.account,
            "free_balance": accounts[args.account],
            "claims": {
                n: fr["settlements"][args.account]
                for n, fr in report["frames"].items()
                if args.account in fr["settlements"]
            },
        }
        events = [e for e in events if e.get("account") == args.account]

    if args.events:
        for e in events:
            print(json.dumps(e, sort_keys=True))
        return EXIT_OK
    if not out:
        if args.format == "table":
            sys.stdout.write(render_table(report))
        else:
            summary = {k: report[k] for k in ("final_time", "balances", "frames", "checksum")}
            summary["rejected"] = [a for a in report["actions"] if a["status"] == "rejected"]
            sys.stdout.write(dumps_report(summary))
        return EXIT_OK
    sys.stdout.write(dumps_report(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htax", description="Harberger-tax prediction market simulator")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run a scenario and write its report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", help="write the machine report here (default: stdout)")
    p.add_argument("--events", help="also write the event log, one JSON record per line")
    p.add_argument("--format", choices=("machine", "table"), default="machine")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("inspect", help="query a machine report")
    p.add_argument("report")
    p.add_argument("--frame", type=int)
    p.add_argument("--account")
    p.add_argument("--events", action="store_true", help="print matching event records")
    p.add_argument("--format", choices=("machine", "table"), default="machine")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
