"""Command-line entry point.

Exit codes: 0 success, 1 solver or verification failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2
OUTPUT_ENV = "PHASEFEM_OUTPUT_DIR"

log = logging.getLogger("phasefem")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phasefem", description="Phase-field finite element scenarios.")
    p.add_argument("--version", action="version", version=f"phasefem {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a scenario from a TOML config")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_ENV}/<config stem> or ./runs/<config stem>)")
    run.add_argument("--max-increments", type=int, metavar="N")
    run.add_argument("--scheme", choices=["staggered", "staggered-multi", "monolithic-pair"])

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", choices=["kernels", "jacobian", "oracles"])

    orc = sub.add_parser("oracle", help="evaluate a closed-form oracle")
    osub = orc.add_subparsers(dest="oracle", required=True, parser_class=_Parser)
    pc = osub.add_parser("pc", help="critical pressure of a pressurised line crack")
    for name, h in (("--E", "Young's modulus"), ("--nu", "Poisson ratio"), ("--gc", "fracture toughness G_c"),
                    ("--a0", "crack half-length")):
        pc.add_argument(name, type=float, required=True, help=h)
    return p


def _out_dir(args) -> Path:
    if args.out is not None:
        return args.out
    root = Path(os.environ.get(OUTPUT_ENV) or "runs")
    return root / args.config.stem


def _cmd_run(args) -> int:
    from .io import parse_config, run_config
    from .scenarios import SpecError

    try:
        cfg = parse_config(args.config)
        out = _out_dir(args)
        outcome = run_config(cfg, out, max_increments=args.max_increments, scheme=args.scheme)
    except SpecError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    m = outcome.manifest
    print(f"{m.kind}: {m.increments} increments, output in {outcome.out_dir}")
    for k, v in sorted(outcome.metrics.items()):
        if not isinstance(v, list):
            print(f"  {k} = {v}")
    if m.solver_failed:
        print(f"solver failure: {m.message}", file=sys.stderr)
        return EXIT_SOLVER
    if not m.completed:
        print(f"stopped: {m.message}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from . import verification as v

    if args.suite == "oracles":
        checks = v.oracle_suite()
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: value {c.value:.6g} reference {c.reference:.6g} "
                  f"error {c.error:.3g} (tol {c.tol:g})")
        return EXIT_OK if all(c.passed for c in checks) else EXIT_SOLVER
    if args.suite == "kernels":
        rows, tol = v.kernel_suite(), 1e-6
    else:
        rows, tol = v.jacobian_suite(), 1e-5
    bad = 0
    for r in rows:
        ok = r.error < tol
        bad += not ok
        print(f"{'PASS' if ok else 'FAIL'} {r.case} {r.block}: {r.error:.3g}")
    print(f"{len(rows) - bad}/{len(rows)} blocks within {tol:g}")
    return EXIT_OK if bad == 0 else EXIT_SOLVER


def _cmd_oracle(args) -> int:
    from .scenarios import critical_pressure_oracle

    try:
        value = critical_pressure_oracle(args.E, args.nu, args.gc, args.a0)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{value:.6g}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "verify": _cmd_verify, "oracle": _cmd_oracle}[args.command]
    try:
        return handler(args)
    except KeyboardInterrupt:
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
