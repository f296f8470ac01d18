"""Command-line front end: analyze, solve, residual, manufacture."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .charteq import analyze
from .errors import ConstantsArity, ProblemSchemaError, VolterraError
from .logpoly import LogPoly
from .problem import BivariatePoly, Problem, select_N, validate
from .verify import make_manufactured, residual, solve

COMMANDS = ("analyze", "solve", "residual", "manufacture")


@dataclass
class RunConfig:
    command: str
    problem_path: Path
    N_override: int | None = None
    q_max: float = 0.5
    constants: list[float] = field(default_factory=list)
    h: float | None = None
    tol: float = 1e-10
    l: float = 1.0
    quad_order: int = 32
    output_path: Path | None = None
    sample_count: int = 50
    diagnostics_path: Path | None = None


def _parse_constants(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ProblemSchemaError(f"--constants must be comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", required=True, type=Path, help="problem JSON file")
    common.add_argument("--N", type=int, default=None, help="override the regularization order")
    common.add_argument("--qmax", type=float, default=0.5, help="contraction target for N (default 0.5)")
    common.add_argument("--constants", default="", help="free constants c1,c2,...")
    common.add_argument("--h", type=float, default=None, help="tail grid step (default T/1000)")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--l", type=float, default=1.0, help="initial weight of the tail norm")
    common.add_argument("--quad-order", type=int, default=32)
    common.add_argument("--samples", type=int, default=50)
    common.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    common.add_argument("--diagnostics", type=Path, default=None,
                        help="solve: also write diagnostics JSON here")

    parser = argparse.ArgumentParser(
        prog="sectorvolterra",
        description="Volterra first-kind equations with sector-wise kernels")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="characteristic equation report")
    sub.add_parser("solve", parents=[common], help="asymptotics plus tail, CSV samples")
    sub.add_parser("residual", parents=[common], help="residual of the solved equation, CSV")
    sub.add_parser("manufacture", parents=[common],
                   help="build a problem JSON from kernels and a target solution")
    return parser


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return RunConfig(
        command=args.command,
        problem_path=args.problem,
        N_override=args.N,
        q_max=args.qmax,
        constants=_parse_constants(args.constants),
        h=args.h,
        tol=args.tol,
        l=args.l,
        quad_order=args.quad_order,
        output_path=args.out,
        sample_count=args.samples,
        diagnostics_path=args.diagnostics,
    )


def _read_json(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ProblemSchemaError(f"problem file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemSchemaError(f"invalid JSON in {path}: {exc}") from exc


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def sample_points(T: float, count: int) -> np.ndarray:
    return np.geomspace(0.01 * T, T, count)


def _solve(cfg: RunConfig, problem):
    params = select_N(problem, cfg.q_max)
    N = params.N if cfg.N_override is None else cfg.N_override
    report = analyze(problem, N)
    if len(cfg.constants) != report.free_constant_count:
        raise ConstantsArity(
            f"expected {report.free_constant_count} free constant(s), got {len(cfg.constants)}")
    return solve(problem, N=cfg.N_override, q_max=cfg.q_max, constants=cfg.constants,
                 h=cfg.h, l=cfg.l, tol=cfg.tol)


def _run(cfg: RunConfig) -> None:
    data = _read_json(cfg.problem_path)

    if cfg.command == "manufacture":
        try:
            kernels = [BivariatePoly.from_triples(k) for k in data["kernels"]]
            target = LogPoly.from_triples(data["x_target"])
            alphas, T = [float(a) for a in data["alphas"]], float(data["T"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemSchemaError(f"malformed manufacture spec: {exc}") from exc
        problem, _ = make_manufactured(kernels, alphas, target, T)
        _emit(_dump(problem.to_dict()), cfg.output_path)
        return

    problem = validate(Problem.from_dict(data))

    if cfg.command == "analyze":
        N = cfg.N_override if cfg.N_override is not None else select_N(problem, cfg.q_max).N
        _emit(_dump(analyze(problem, N).to_dict()), cfg.output_path)
        return

    sol, report, params = _solve(cfg, problem)
    ts = sample_points(problem.horizon, cfg.sample_count)

    if cfg.command == "solve":
        xN = sol.asymptotic.as_logpoly()(ts)
        u = sol.tail(ts)
        x = sol(ts)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "xN", "u"])
        for row in zip(ts, x, xN, u):
            w.writerow([f"{v:.17g}" for v in row])
        _emit(buf.getvalue(), cfg.output_path)
        diag = sol.tail.diagnostics()
        diag.update({"N": params.N, "q": params.q, "p": report.free_constant_count,
                     "asymptotic": sol.asymptotic.to_dict()})
        if cfg.diagnostics_path is not None:
            Path(cfg.diagnostics_path).write_text(_dump(diag))
        if cfg.output_path is not None:
            sys.stdout.write(_dump(diag))
        return

    if cfg.command == "residual":
        rep = residual(problem, sol, ts, cfg.quad_order)
        _emit(rep.to_csv(), cfg.output_path)
        return

    raise ValueError(f"unknown command {cfg.command!r}")


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        _run(cfg)
    except VolterraError as exc:
        _fail(exc.code, str(exc))
        return exc.exit_status
    except ValueError as exc:
        _fail("InvalidArgument", str(exc))
        return 2
    return 0


def _fail(code: str, message: str) -> None:
    message = " ".join(message.split())
    sys.stderr.write(f"error: {code}: {message}\n")


def main(argv: Sequence[str] | None = None) -> int:
    return run(config_from_args(argv))


if __name__ == "__main__":
    sys.exit(main())
