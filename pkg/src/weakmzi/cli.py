"""Command-line entry point: ``weakmzi run|sweep|verify|weak-value``.

Exit codes: 0 success, 1 usage or configuration error, 2 verification failure.
Floats are printed with 12 significant digits (``format(x, ".12g")``).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, TextIO

from .scenario import COLUMNS, SWEEP_COLUMNS, ConfigError, ScenarioConfig, SweepSpec, run_scenario, sweep
from .verify import GRIDS, parameter_grid, verify_identities
from .weak_values import DegeneratePostselectionError, joint_weak_value

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit 2, reserved for verify
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float):
        return None if math.isnan(value) else float(format(value, ".12g"))
    return value


def emit(rows: Sequence[dict[str, Any]], fmt: str, out: TextIO, single: bool = False) -> None:
    if fmt == "json":
        data = [{k: _json_value(v) for k, v in row.items()} for row in rows]
        json.dump(data[0] if single else data, out, indent=2)
        out.write("\n")
        return
    columns = list(rows[0]) if rows else []
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])


def _column_help(columns: dict[str, str]) -> str:
    width = max(map(len, columns))
    return "columns:\n" + "\n".join(f"  {k:<{width}}  {v}" for k, v in columns.items())


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with scenario fields; flags override it")
    g = p.add_argument_group("interferometer")
    g.add_argument("--r", type=float, help="outer splitter reflectivity")
    g.add_argument("--t", type=float, help="outer splitter transmissivity")
    g = p.add_argument_group("coupling")
    g.add_argument("--theta", type=float, help="coupling phase eta*tau")
    g.add_argument("--eta", type=float, help="coupling rate (with --tau)")
    g.add_argument("--tau", type=float, help="interaction time (with --eta)")
    g.add_argument("--position", help="coupling position: A, B, C, E or F (default C)")
    g.add_argument("--order", choices=["exact", "first"], help="evolution order (default exact)")
    p.add_argument("--outputs", help="comma-separated subset of columns")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weakmzi", description="Weak measurement in a nested Mach-Zehnder interferometer.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser(
        "run",
        help="evaluate one scenario",
        epilog=_column_help(COLUMNS),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _scenario_args(run)

    sw = sub.add_parser(
        "sweep",
        help="sweep theta or r",
        epilog=_column_help(SWEEP_COLUMNS),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _scenario_args(sw)
    sw.add_argument("--param", choices=["theta", "r"], default="theta")
    sw.add_argument("--start", type=float, required=True)
    sw.add_argument("--stop", type=float, required=True)
    sw.add_argument("--points", type=int, required=True)
    sw.add_argument("--log", action="store_true", help="geometric spacing")

    ver = sub.add_parser("verify", help="check the simulator against the closed-form results")
    ver.add_argument("--grid", choices=sorted(GRIDS), default="default",
                     help="default: 20x20 (r, t) grid; dense: 40x40")
    ver.add_argument("--corrupt-bs2", action="store_true",
                     help="negative control: reverse the second inner splitter (expected to fail)")

    wv = sub.add_parser("weak-value", help="weak value at one position, or a joint weak value")
    wv.add_argument("--r", type=float)
    wv.add_argument("--t", type=float)
    wv.add_argument("--position", nargs="+", default=["C"],
                    help="one position, or several in stage order for a joint weak value")
    wv.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def _load_config(args: argparse.Namespace) -> ScenarioConfig:
    raw: dict[str, Any] = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be an object")
    overrides = {
        "r": args.r,
        "t": args.t,
        "theta": args.theta,
        "eta": args.eta,
        "tau": args.tau,
        "position": args.position,
        "order": args.order,
        "outputs": args.outputs,
    }
    # A flag for r or t replaces both file values, so they cannot disagree.
    if args.r is not None or args.t is not None:
        raw = {k: v for k, v in raw.items() if k not in ("r", "t")}
    if args.theta is not None or args.eta is not None:
        raw = {k: v for k, v in raw.items() if k not in ("theta", "eta", "tau")}
    if args.position is not None:
        raw.pop("coupling_position", None)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig.from_mapping(raw)


def _cmd_run(args: argparse.Namespace, out: TextIO) -> int:
    emit([run_scenario(_load_config(args))], args.format, out, single=True)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace, out: TextIO) -> int:
    cfg = _load_config(args)
    spec = SweepSpec(args.param, args.start, args.stop, args.points, "log" if args.log else "linear")
    emit(sweep(cfg, spec), args.format, out)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    results = verify_identities(parameter_grid(GRIDS[args.grid]), corrupt_bs2=args.corrupt_bs2)
    width = max(len(r.name) for r in results)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        line = f"{status}  {res.name:<{width}}  residual={res.residual:.3e}  tol={res.tol:.0e}  [{res.anchor}]"
        if res.detail:
            line += f"  {res.detail}"
        out.write(line + "\n")
    failed = sum(not r.passed for r in results)
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def _cmd_weak_value(args: argparse.Namespace, out: TextIO) -> int:
    cfg = ScenarioConfig.from_mapping({"r": args.r, "t": args.t})
    try:
        res = joint_weak_value(cfg.r, cfg.t, *args.position)
    except DegeneratePostselectionError as exc:
        raise ConfigError("r", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("position", str(exc)) from None
    row = {
        "position": "+".join(p.name for p in res.positions),
        "r": cfg.r,
        "t": cfg.t,
        "re": res.value.real,
        "im": res.value.imag,
        "overlap_re": res.overlap.real,
        "overlap_im": res.overlap.imag,
    }
    emit([row], args.format, out, single=True)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "verify": _cmd_verify, "weak-value": _cmd_weak_value}


def main(argv: Optional[Iterable[str]] = None, out: Optional[TextIO] = None) -> int:
    args = build_parser().parse_args(None if argv is None else list(argv))
    out = sys.stdout if out is None else out
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"weakmzi {args.command}: invalid {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
