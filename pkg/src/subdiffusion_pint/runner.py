"""Run configuration, orchestration and the CSV report format."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import diagnostics
from .bfsm import NewtonDivergence, bfsm_linear, bfsm_semilinear
from .krylov import KrylovConfig
from .newton import NewtonConfig, solve_semilinear
from .preconditioners import default_alpha
from .problems import Problem, get_problem, make_system
from .solvers import solve_linear

__all__ = [
    "ConfigError",
    "TimeBudgetExceeded",
    "RunConfig",
    "SolveReport",
    "parse_config_text",
    "run",
    "solve",
    "append_report",
    "format_table",
    "METHODS",
]

log = logging.getLogger(__name__)

METHODS = ("bfsm", "i", "p")
_METHOD_ALIASES = {
    "bfsm": "bfsm",
    "i": "i", "iterative_unpreconditioned": "i",
    "p": "p", "iterative_preconditioned": "p",
}


class ConfigError(ValueError):
    pass


class TimeBudgetExceeded(RuntimeError):
    pass


@dataclass
class RunConfig:
    problem: str = "example1"
    beta: float = 0.5
    r: float = 2.0
    M: int = 32
    N: int = 32
    method: str = "p"
    alpha: Optional[float] = None
    rtol: float = 1e-9
    inner_rtol: float = 1e-6
    newton_rtol: float = 1e-10
    maxit: int = 1000
    threads: Optional[int] = None
    time_budget: Optional[float] = None
    seed: int = 0
    dump_spectra: bool = False
    out: Optional[str] = None

    def __post_init__(self):
        self.method = _METHOD_ALIASES.get(str(self.method).lower(), self.method)
        self.validate()

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0.0 < self.beta < 1.0:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if self.r < 1.0:
            raise ConfigError(f"r must be >= 1, got {self.r}")
        if self.M < 2:
            raise ConfigError(f"M must be >= 2, got {self.M}")
        if self.N < 2:
            raise ConfigError(f"N must be >= 2, got {self.N}")
        if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        for name in ("rtol", "inner_rtol"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if self.newton_rtol <= 0:
            raise ConfigError("newton_rtol must be positive")
        if self.maxit < 1:
            raise ConfigError("maxit must be >= 1")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ConfigError("time_budget must be positive")


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value: str):
    kind = _FIELD_TYPES[name]
    text = value.strip()
    if "Optional" in kind and text.lower() in ("", "none"):
        return None
    if "bool" in kind:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: not a boolean: {value!r}")
    try:
        if "int" in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {value!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys are allowed."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


@dataclass
class SolveReport:
    """One row of the results table.

    ``iter`` is set for linear iterative runs, ``iter_outer``/``iter_inner``
    for semilinear iterative runs and ``iter1`` for semilinear BFSM runs.
    ``dagger`` marks a Krylov solve that hit ``maxit``; ``dash`` marks a run
    aborted by the time budget.
    """

    config: RunConfig
    M0: int = 0
    alpha: Optional[float] = None
    iter: Optional[tuple[float, float]] = None
    iter_outer: Optional[tuple[int, int]] = None
    iter_inner: Optional[tuple[float, float]] = None
    iter1: Optional[float] = None
    time: float = float("nan")
    error_max: Optional[float] = None
    error_final: Optional[float] = None
    converged: bool = False
    dagger: bool = False
    dash: bool = False
    message: str = ""

    @property
    def exit_code(self) -> int:
        return 0 if self.converged else 2

    def row(self) -> dict:
        cfg = asdict(self.config)
        cfg.pop("out", None)

        def pair(p, i):
            return "" if p is None else p[i]

        def opt(v):
            return "" if v is None else v

        cfg.update({
            "M0": self.M0,
            "alpha_used": opt(self.alpha),
            "Iter1": opt(self.iter1),
            "Iter(1)": pair(self.iter, 0), "Iter(2)": pair(self.iter, 1),
            "Iter_O(1)": pair(self.iter_outer, 0), "Iter_O(2)": pair(self.iter_outer, 1),
            "Iter_I(1)": pair(self.iter_inner, 0), "Iter_I(2)": pair(self.iter_inner, 1),
            "Time": self.time,
            "error_max": opt(self.error_max),
            "error_final": opt(self.error_final),
            "converged": int(self.converged),
            "dagger": int(self.dagger),
            "dash": int(self.dash),
        })
        return {k: ("" if v is None else v) for k, v in cfg.items()}


def _errors(problem: Problem, sys, u: np.ndarray) -> tuple[Optional[float], Optional[float]]:
    if problem.exact is None:
        return None, None
    x, y = sys.op.grid()
    exact = np.vstack([problem.exact(x, y, t) for t in sys.mesh.points[1:]])
    err = np.abs(u - exact)
    return float(err.max()), float(err[-1].max())


def solve(config: RunConfig) -> tuple[SolveReport, Optional[np.ndarray], object]:
    """Run one configuration; returns ``(report, solution, system)``.

    Non-convergence is reported through the flags rather than raised.
    """
    problem = get_problem(config.problem, config.beta)
    sys = make_system(problem, config.beta, config.M, config.N, config.r, workers=config.threads)
    report = SolveReport(config=config, M0=sys.M0)
    if config.method != "bfsm":
        report.alpha = config.alpha if config.alpha is not None else default_alpha(sys.mesh.tau_tilde)

    start = time.perf_counter()
    deadline = None if config.time_budget is None else start + config.time_budget

    def check(*_):
        if deadline is not None and time.perf_counter() > deadline:
            raise TimeBudgetExceeded(f"time budget of {config.time_budget} s exceeded")

    u = None
    try:
        if problem.is_linear:
            if config.method == "bfsm":
                u = bfsm_linear(sys, check)
                report.converged = True
            else:
                kcfg = KrylovConfig(rtol=config.rtol, maxit=config.maxit)
                res = solve_linear(sys, precondition=config.method == "p", alpha=config.alpha,
                                   config=kcfg, callback=check)
                u = res.solution
                report.iter = res.iterations
                report.converged = res.converged
                report.dagger = res.sub1.exceeded_maxit or res.sub2.exceeded_maxit
                if not res.converged and not report.dagger:
                    report.message = f"breakdown: {res.sub1.breakdown or res.sub2.breakdown}"
        else:
            if config.method == "bfsm":
                rep = bfsm_semilinear(sys, problem.nonlinearity, step_rtol=config.newton_rtol,
                                      check=check)
                u = rep.solution
                report.iter1 = rep.iter1
                report.converged = True
            else:
                ncfg = NewtonConfig(step_rtol=config.newton_rtol,
                                    inner=KrylovConfig(rtol=config.inner_rtol, maxit=config.maxit),
                                    alpha=config.alpha, precondition=config.method == "p")
                u, nrep = solve_semilinear(sys, problem.nonlinearity, ncfg, callback=check)
                report.iter_outer = nrep.iter_outer
                report.iter_inner = nrep.iter_inner_avg
                # every inner solve has to reach its tolerance within maxit
                report.dagger = any(c >= config.maxit for c in
                                    nrep.sub1.inner_counts + nrep.sub2.inner_counts)
                report.converged = all(nrep.converged) and not report.dagger
    except TimeBudgetExceeded as exc:
        report.dash = True
        report.message = str(exc)
    except NewtonDivergence as exc:
        report.message = str(exc)
    report.time = time.perf_counter() - start
    if u is not None and not report.dash:
        report.error_max, report.error_final = _errors(problem, sys, u)
    return report, u, sys


def append_report(path, report: SolveReport) -> Path:
    path = Path(path)
    row = report.row()
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(row))
        if new:
            writer.writeheader()
        writer.writerow(row)
    return path


def dump_diagnostics(config: RunConfig, sys, out: Path) -> list[Path]:
    """Spectra of the four block operators, the weight decay and the bound summary."""
    written = []
    params = {"beta": config.beta, "r": config.r, "M": config.M, "N": config.N}
    alpha = config.alpha if config.alpha is not None else default_alpha(sys.mesh.tau_tilde)
    for tag in diagnostics.SPECTRUM_TAGS:
        dump = diagnostics.spectrum(sys, tag, alpha=alpha, params=params)
        written.append(diagnostics.write_spectrum_csv(out / f"spectra_{tag}.csv", dump))
    try:
        written.append(diagnostics.write_decay_csv(out / "decay.csv", diagnostics.decay_profile(sys)))
    except diagnostics.SizeGuardError as exc:
        log.warning("decay profile skipped: %s", exc)
    if sys.M - sys.M0 >= 2:
        lhs = diagnostics.palpha_distance(sys.weights.omega, sys.op.eig_full, alpha)
        try:
            rep = diagnostics.bound_constant(sys.weights, alpha, lhs=lhs)
            written.append(diagnostics.write_bound_csv(out / "bound.csv", [rep]))
        except diagnostics.SDDViolation as exc:
            log.warning("bound summary skipped: %s", exc)
    return written


def run(config: RunConfig) -> SolveReport:
    """Solve, then write ``runs.csv`` (and dumps if requested) under ``config.out``."""
    report, _, sys = solve(config)
    if config.out is not None:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        append_report(out / "runs.csv", report)
        if config.dump_spectra:
            dump_diagnostics(config, sys, out)
    return report


def _fmt_pair(p, digits=1):
    return "--" if p is None else f"({p[0]:.{digits}f}, {p[1]:.{digits}f})"


def format_table(reports: list[SolveReport]) -> str:
    """Group reports by ``(beta, r, N)`` into a text table with one column group per method."""
    groups: dict[tuple, dict[str, SolveReport]] = {}
    for rep in reports:
        c = rep.config
        groups.setdefault((c.beta, c.r, c.N), {})[c.method] = rep
    semilinear = any(rep.iter_outer is not None or rep.iter1 is not None for rep in reports)
    lines = []
    if semilinear:
        lines.append(f"{'(beta, r)':<11}{'N':>5}  {'BFSM Iter1':>10} {'Time':>9}  "
                     f"{'I Iter_O':>12} {'I Iter_I':>14} {'Time':>9}  "
                     f"{'P Iter_O':>12} {'P Iter_I':>12} {'Time':>9}")
    else:
        lines.append(f"{'(beta, r)':<11}{'N':>5}  {'BFSM Time':>9}  {'I Iter':>14} {'Time':>9}  "
                     f"{'P Iter':>12} {'Time':>9}")

    def cell_time(rep):
        if rep is None or rep.dash:
            return "--"
        return "†" if rep.dagger else f"{rep.time:.3f}"

    for (beta, r, N), by in sorted(groups.items()):
        b, i, p = by.get("bfsm"), by.get("i"), by.get("p")
        tag = f"({beta:g}, {r:g})"
        if semilinear:
            lines.append(
                f"{tag:<11}{N:>5}  {('--' if b is None or b.iter1 is None else f'{b.iter1:.1f}'):>10} "
                f"{cell_time(b):>9}  "
                f"{_fmt_pair(None if i is None else i.iter_outer):>12} "
                f"{_fmt_pair(None if i is None else i.iter_inner):>14} {cell_time(i):>9}  "
                f"{_fmt_pair(None if p is None else p.iter_outer):>12} "
                f"{_fmt_pair(None if p is None else p.iter_inner):>12} {cell_time(p):>9}")
        else:
            lines.append(
                f"{tag:<11}{N:>5}  {cell_time(b):>9}  "
                f"{_fmt_pair(None if i is None else i.iter):>14} {cell_time(i):>9}  "
                f"{_fmt_pair(None if p is None else p.iter):>12} {cell_time(p):>9}")
    return "\n".join(lines)
