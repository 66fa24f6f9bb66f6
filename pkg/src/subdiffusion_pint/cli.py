"""Command line entry point.

Example::

    subdiffusion-pint --problem example1 --beta 0.5 --r 2 --M 32 --N 32 --method p --out results

Settings can also come from a ``key = value`` file given with ``--config``;
flags on the command line override the file.  ``--sweep FILE`` runs one
configuration per non-empty line (whitespace-separated ``key=value`` pairs
applied on top of the other settings).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .runner import ConfigError, RunConfig, format_table, parse_config_text, run

EXIT_OK = 0
EXIT_NONCONVERGED = 2
EXIT_INVALID = 3

_FLAG_FIELDS = {
    "problem": "problem", "beta": "beta", "r": "r", "M": "M", "N": "N", "method": "method",
    "alpha": "alpha", "rtol": "rtol", "inner_rtol": "inner_rtol", "newton_rtol": "newton_rtol",
    "maxit": "maxit", "threads": "threads", "time_budget": "time_budget", "seed": "seed",
    "dump_spectra": "dump_spectra", "out": "out",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="subdiffusion-pint",
        description="All-at-once solver for 2D subdiffusion equations on a graded/uniform time mesh.")
    p.add_argument("--config", type=Path, help="key=value configuration file")
    p.add_argument("--sweep", type=Path, help="file with one key=value list per run")
    p.add_argument("--problem", help="example1, example2 or a registered problem name")
    p.add_argument("--beta", type=float, help="fractional order in (0, 1)")
    p.add_argument("--r", type=float, help="grading exponent (>= 1)")
    p.add_argument("--M", type=int, help="number of time steps")
    p.add_argument("--N", type=int, help="number of cells per space direction")
    p.add_argument("--method", choices=["bfsm", "i", "p"],
                   help="bfsm: time stepping; i: BiCGSTAB; p: preconditioned BiCGSTAB")
    p.add_argument("--alpha", type=float, help="alpha-circulant parameter (default min(1e-4, tau/2))")
    p.add_argument("--rtol", type=float, help="Krylov tolerance for linear problems (default 1e-9)")
    p.add_argument("--inner-rtol", type=float, dest="inner_rtol",
                   help="Krylov tolerance inside Newton (default 1e-6)")
    p.add_argument("--newton-rtol", type=float, dest="newton_rtol",
                   help="relative Newton update tolerance (default 1e-10)")
    p.add_argument("--maxit", type=int, help="Krylov iteration cap (default 1000)")
    p.add_argument("--threads", type=int, help="worker threads for the FFT and sine transforms")
    p.add_argument("--time-budget", type=float, dest="time_budget",
                   help="abort a run after this many seconds and mark it '--'")
    p.add_argument("--seed", type=int, help="seed for randomised test vectors")
    p.add_argument("--dump-spectra", action="store_const", const=True, dest="dump_spectra",
                   help="write spectra_*.csv, decay.csv and bound.csv")
    p.add_argument("--out", help="output directory for runs.csv and dumps")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _configs(args) -> list[RunConfig]:
    values = {}
    if args.config is not None:
        values.update(parse_config_text(args.config.read_text(encoding="utf-8")))
    for flag, name in _FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    if args.sweep is None:
        return [RunConfig(**values)]
    configs = []
    for line in args.sweep.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            configs.append(RunConfig(**{**values, **parse_config_text("\n".join(line.split()))}))
    return configs


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        configs = _configs(args)
    except (ConfigError, TypeError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    reports = []
    for cfg in configs:
        try:
            reports.append(run(cfg))
        except (ConfigError, KeyError, ValueError) as exc:
            print(f"invalid configuration: {exc}", file=sys.stderr)
            return EXIT_INVALID
    print(format_table(reports))
    for rep in reports:
        if rep.message:
            print(f"{rep.config.problem} beta={rep.config.beta} r={rep.config.r} "
                  f"N={rep.config.N} {rep.config.method}: {rep.message}", file=sys.stderr)
    return EXIT_OK if all(rep.converged for rep in reports) else EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
