"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse failure, 2 validation errors,
3 computation error (for example a non-positive infrastructure value).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, financial
from .financial import AivLedger, NonPositiveInfrastructureValue, ZeroCost
from .model import Diagnostic, Severity, has_errors
from .protection import RmMode, danger_matrices, protection_matrix
from .render import (
    csv_text,
    fmt_2,
    json_text,
    matrix_csv,
    matrix_json,
    matrix_table,
    text_table,
)
from .scenario_io import BreakdownAle, Scenario, ScenarioError, load_scenario, validate_scenario
from .selection import Evaluation, InvalidMutation, InvalidTarget, evaluate_all, rank_candidates
from .uncertainty import AleUncertaintySpec, InvalidTriangle, UnknownLevel, simulate_ale

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_COMPUTE = 3

FORMATS = ("table", "csv", "json")


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class Context:
    """Parsed global options plus the output sinks."""

    def __init__(self, args: argparse.Namespace, stdout, stderr):
        self.args = args
        self.fmt: str = args.format
        self.quiet: bool = args.quiet
        self.stdout = stdout
        self.stderr = stderr

    def warn(self, diags: Sequence[Diagnostic]) -> None:
        for d in diags:
            if d.severity is Severity.ERROR or not self.quiet:
                print(str(d), file=self.stderr)

    def emit(self, text: str) -> None:
        if self.args.output:
            Path(self.args.output).write_text(text, encoding="utf-8", newline="")
        else:
            self.stdout.write(text)


def _load(ctx: Context) -> tuple[Scenario, list[Diagnostic]]:
    try:
        scenario = load_scenario(ctx.args.scenario)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot read scenario: {exc}") from None
    except ScenarioError as exc:
        lines = [f"{exc.kind} error: {issue}" for issue in exc.issues]
        raise CommandError(EXIT_IO, "\n".join(lines)) from None
    return scenario, validate_scenario(scenario)


def _load_valid(ctx: Context) -> tuple[Scenario, list[Diagnostic]]:
    scenario, diags = _load(ctx)
    if has_errors(diags):
        ctx.warn(diags)
        raise CommandError(EXIT_INVALID, "scenario has validation errors")
    return scenario, diags


def _require_financials(scenario: Scenario):
    if scenario.financials is None:
        raise CommandError(EXIT_INVALID, "scenario has no financials section")
    return scenario.financials


# ----------------------------------------------------------------- ALE


def _resolve_ale(ctx: Context, scenario: Scenario) -> tuple[float, dict, list[Diagnostic]]:
    """ALE value to use, a JSON description of how it was obtained, diagnostics."""
    fin = _require_financials(scenario)
    ale = fin.ale
    if isinstance(ale, AleUncertaintySpec):
        spec = ale
        if ctx.args.seed is not None:
            spec = dataclasses.replace(spec, seed=ctx.args.seed)
        iterations = getattr(ctx.args, "iterations", None)
        if iterations is not None:
            spec = dataclasses.replace(spec, iterations=iterations)
        summary = simulate_ale(spec, scenario.severity_scale, scenario.likelihood_scale, workers=ctx.args.jobs)
        diags = []
        if summary.clamped_iterations:
            diags.append(
                Diagnostic(
                    Severity.WARNING,
                    "financials.ale",
                    f"insurance exceeded losses in {summary.clamped_iterations} iterations; those clamped to 0",
                )
            )
        return summary.mean, {"form": "simulate", **summary.to_dict()}, diags
    if isinstance(ale, BreakdownAle):
        value, diags = financial.ale_with_diagnostics(ale.losses, ale.aro)
        return value, {"form": "breakdown", "value": value, "aro": ale.aro}, diags
    return float(ale), {"form": "value", "value": float(ale)}, []


def _resolve_aiv(scenario: Scenario) -> float:
    aiv = _require_financials(scenario).aiv
    if isinstance(aiv, AivLedger):
        return financial.aiv(aiv)
    if aiv <= 0:
        raise NonPositiveInfrastructureValue(f"AIV must be > 0, got {aiv:g}")
    return float(aiv)


# ------------------------------------------------------------ commands


def cmd_validate(ctx: Context) -> int:
    scenario, diags = _load(ctx)
    ctx.warn(diags)
    ok = not has_errors(diags)
    if ctx.fmt == "json":
        ctx.emit(json_text({"command": "validate", "valid": ok, "diagnostics": [d.to_dict() for d in diags]}))
    elif ctx.fmt == "csv":
        ctx.emit(csv_text(["severity", "location", "message"], [[d.severity.value, d.location, d.message] for d in diags]))
    elif not ctx.quiet:
        status = "valid" if ok else "INVALID"
        ctx.emit(
            f"{scenario.name}: {status} ({len(scenario.services)} services, {len(scenario.threats)} threats, "
            f"{len(scenario.candidates)} candidates, {len(diags)} diagnostics)\n"
        )
    return EXIT_OK if ok else EXIT_INVALID


_MATRIX_TITLES = {
    "assessed": "Assessed danger",
    "actual": "Actual danger",
    "protection": "Assessed protection",
}


def cmd_matrices(ctx: Context) -> int:
    scenario, diags = _load_valid(ctx)
    ctx.warn(diags)
    which = ctx.args.which
    if which == "protection":
        m = protection_matrix(scenario)
    else:
        assessed, actual = danger_matrices(scenario)
        m = assessed if which == "assessed" else actual
    if ctx.fmt == "json":
        payload = {"command": "matrices", "which": which, "scenario": scenario.name, **matrix_json(m)}
        payload["diagnostics"] = [d.to_dict() for d in diags]
        ctx.emit(json_text(payload))
    elif ctx.fmt == "csv":
        ctx.emit(matrix_csv(m))
    else:
        ctx.emit(matrix_table(m, f"{_MATRIX_TITLES[which]} matrix: {scenario.name}"))
    return EXIT_OK


def cmd_ale(ctx: Context) -> int:
    scenario, diags = _load_valid(ctx)
    value, info, ale_diags = _resolve_ale(ctx, scenario)
    diags = diags + ale_diags
    ctx.warn(diags)
    if ctx.fmt == "json":
        ctx.emit(json_text({"command": "ale", "currency": scenario.currency, "ale": info,
                            "diagnostics": [d.to_dict() for d in diags]}))
        return EXIT_OK
    keys = [k for k in ("form", "value", "aro", "mean", "p05", "p50", "p95", "iterations", "seed", "rng",
                        "clamped_iterations") if k in info]
    if ctx.fmt == "csv":
        ctx.emit(csv_text(keys, [[info[k] for k in keys]]))
        return EXIT_OK
    rows = []
    for k in keys:
        v = info[k]
        rows.append([k, fmt_2(v) if isinstance(v, float) else str(v)])
    unit = f" ({scenario.currency}/year)" if scenario.currency else ""
    ctx.emit(f"Annual loss expectancy{unit}: {scenario.name}\n" + text_table(["field", "value"], rows))
    return EXIT_OK


_RANK_HEADER = ["rank", "candidate", "arc", "rm", "rm_computed", "rori", "pl_current", "pl_potential", "flags"]


def _rank_rows(ranked: list[Evaluation]) -> list[list]:
    return [
        [k, e.candidate_id, e.arc, e.rm, e.rm_computed, e.rori, e.pl_current, e.pl_potential, ";".join(e.flags)]
        for k, e in enumerate(ranked, 1)
    ]


def _report(ctx: Context, command: str, scenario: Scenario, evaluations: list[Evaluation],
            mode: RmMode, ale: float, ale_info: dict, aiv: float, diags: list[Diagnostic]) -> None:
    ranked = rank_candidates(evaluations)
    diags = diags + [d for e in evaluations for d in e.diagnostics]
    if ale_info["form"] == "simulate":
        diags.append(Diagnostic(Severity.WARNING, "financials.ale",
                                f"ALE is the Monte Carlo mean over {ale_info['iterations']} iterations "
                                f"(seed {ale_info['seed']})"))
    ctx.warn(diags)
    target = ranked[0].target
    if ctx.fmt == "json":
        descriptions = {c.id: c.description for c in scenario.candidates}
        rows = [
            {
                "rank": k,
                "candidate": e.candidate_id,
                "description": descriptions.get(e.candidate_id, ""),
                "arc": e.arc,
                "rm": e.rm,
                "rm_computed": e.rm_computed,
                "rori": e.rori,
                "pl_current": e.pl_current,
                "pl_potential": e.pl_potential,
                "flags": list(e.flags),
            }
            for k, e in enumerate(ranked, 1)
        ]
        ctx.emit(json_text({
            "command": command,
            "scenario": scenario.name,
            "currency": scenario.currency,
            "rm_mode": mode.value,
            "target": {"threat": target[0], "service": target[1]},
            "ale": ale_info,
            "ale_used": ale,
            "aiv": aiv,
            "evaluations": rows,
            "diagnostics": [d.to_dict() for d in diags],
        }))
    elif ctx.fmt == "csv":
        ctx.emit(csv_text(_RANK_HEADER, _rank_rows(ranked)))
    else:
        rows = [
            [str(r[0]), r[1], fmt_2(r[2]), fmt_2(r[3]), fmt_2(r[4]), fmt_2(r[5]), fmt_2(r[6]), fmt_2(r[7]), r[8]]
            for r in _rank_rows(ranked)
        ]
        header = ["rank", "candidate", "ARC", "RM", "RM (computed)", "RORI %", "PL current", "PL potential", "flags"]
        cur = f" {scenario.currency}" if scenario.currency else ""
        head = (
            f"Countermeasure evaluation: {scenario.name}\n"
            f"target: {target[0]} / {target[1]}; ALE {fmt_2(ale)}{cur}; AIV {fmt_2(aiv)}{cur}; RM mode {mode.value}\n"
        )
        table = text_table(header, rows, left=(0, 1, 8))
        ctx.emit(head + table + f"selected: {ranked[0].candidate_id}\n")


def _evaluate(ctx: Context, candidate_ids: Optional[list[str]]) -> int:
    scenario, diags = _load_valid(ctx)
    fin = _require_financials(scenario)
    candidates = list(scenario.candidates)
    if candidate_ids is not None:
        try:
            candidates = [scenario.candidate(cid) for cid in candidate_ids]
        except KeyError as exc:
            raise CommandError(EXIT_INVALID, f"unknown candidate {exc.args[0]!r}") from None
    if not candidates:
        raise CommandError(EXIT_INVALID, "scenario has no candidates")
    ale, ale_info, ale_diags = _resolve_ale(ctx, scenario)
    aiv = _resolve_aiv(scenario)
    mode = RmMode(ctx.args.rm_mode)
    evaluations = evaluate_all(
        scenario, candidates, fin.target, ale, aiv, mode,
        use_override=not ctx.args.ignore_rm_override, workers=ctx.args.jobs,
    )
    _report(ctx, ctx.args.command, scenario, evaluations, mode, ale, ale_info, aiv, diags + ale_diags)
    return EXIT_OK


def cmd_rank(ctx: Context) -> int:
    return _evaluate(ctx, None)


def cmd_evaluate(ctx: Context) -> int:
    return _evaluate(ctx, [ctx.args.candidate])


# -------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, metavar="PATH", help="scenario JSON file")
    common.add_argument("--format", choices=FORMATS, default="table", help="output format (default: table)")
    common.add_argument("--output", metavar="PATH", help="write the report here instead of standard output")
    common.add_argument("--seed", type=int, default=None,
                        help="Monte Carlo seed (default: the scenario's seed, 0 if absent)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads; output does not depend on it")
    common.add_argument("--quiet", action="store_true", help="suppress warnings on standard error")

    rm = argparse.ArgumentParser(add_help=False)
    rm.add_argument("--rm-mode", choices=[m.value for m in RmMode], default=RmMode.EXACT.value,
                    help="exact: unrounded chain; paper-rounded: integer AD/AP/PL, RM to 2 decimals")
    rm.add_argument("--ignore-rm-override", action="store_true",
                    help="use the computed RM even where the scenario states one")

    parser = argparse.ArgumentParser(prog="cmselect", description="Rank security countermeasures by RORI.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a scenario file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("matrices", parents=[common], help="assessed / actual danger or protection matrix")
    p.add_argument("--which", choices=["assessed", "actual", "protection"], default="assessed")
    p.set_defaults(func=cmd_matrices)

    p = sub.add_parser("ale", parents=[common], help="annual loss expectancy (Monte Carlo if rated)")
    p.add_argument("--iterations", type=int, default=None,
                   help="Monte Carlo iterations (default: the scenario's, 250 if absent)")
    p.set_defaults(func=cmd_ale)

    p = sub.add_parser("rank", parents=[common, rm], help="evaluate and rank all candidates")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("evaluate", parents=[common, rm], help="evaluate a single candidate")
    p.add_argument("--candidate", required=True, metavar="ID")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would collide with "validation failed"
        return EXIT_OK if exc.code == 0 else EXIT_IO
    if getattr(args, "iterations", None) is not None and args.iterations < 1:
        print("error: --iterations must be >= 1", file=stderr)
        return EXIT_IO
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be in [0, 2**64)", file=stderr)
        return EXIT_IO
    ctx = Context(args, stdout, stderr)
    try:
        return args.func(ctx)
    except CommandError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.code
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return EXIT_IO
    except (NonPositiveInfrastructureValue, ZeroCost, InvalidMutation, InvalidTarget, InvalidTriangle,
            UnknownLevel, ValueError) as exc:
        print(f"computation error: {exc}", file=stderr)
        return EXIT_COMPUTE


def run() -> None:
    sys.exit(main())
