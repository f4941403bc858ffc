"""``examforge`` command line.

Exit codes::

    0 success / unique match      5 enumeration cap exceeded
    2 invalid input or artifacts  6 output directory not empty
    3 not enough usable variants  7 ambiguous match
    4 evaluation error            8 no match
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from examforge.errors import (
    CapExceededError,
    ExamForgeError,
    GenerationError,
    InsufficientVariantsError,
    OutputExistsError,
)
from examforge.forensics import (
    AMBIGUOUS,
    NO_MATCH,
    UNIQUE,
    LeakQuery,
    extract_values,
    identify,
    parse_value_list,
)
from examforge.generator import (
    DEFAULT_CAP,
    build_report,
    count_raw,
    enumerate_bundle,
    evaluate_variant,
)
from examforge.manifest import load_bundle, load_roster
from examforge.pipeline import generate
from examforge.store import load_artifacts

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INSUFFICIENT = 3
EXIT_EVAL = 4
EXIT_CAP = 5
EXIT_OUTPUT_EXISTS = 6
EXIT_AMBIGUOUS = 7
EXIT_NO_MATCH = 8

SECRET_ENV = "EXAMFORGE_SECRET"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(args, payload: dict, table: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(table)


def _read_secret(args) -> bytes:
    if args.secret_file:
        try:
            data = Path(args.secret_file).read_bytes()
        except OSError as exc:
            raise CliError(f"cannot read secret file: {exc.strerror}", EXIT_INVALID) from None
        data = data.rstrip(b"\r\n")
    else:
        data = os.environ.get(SECRET_ENV, "").encode("utf-8")
    if not data:
        raise CliError(
            f"no exam secret: pass --secret-file or set {SECRET_ENV}", EXIT_INVALID
        )
    return data


def cmd_validate(args) -> int:
    bundle = load_bundle(args.bundle)
    lines = []
    per_problem = {}
    for prob in bundle.problems:
        raw = count_raw(prob)
        per_problem[prob.id] = raw
        evaluate_variant(prob, 0)
        lines.append(f"  {prob.id}: {raw} raw variants")
    k = len(bundle.problems)
    total = sum(per_problem.values())
    head = f"{k} problem{'s' if k != 1 else ''}, {total} raw variants"
    warn = [f"warning: {w}" for w in bundle.warnings]
    _emit(
        args,
        {"ok": True, "problems": per_problem, "raw_total": total, "warnings": list(bundle.warnings)},
        "\n".join([head] + (lines if k > 1 else []) + warn),
    )
    return EXIT_OK


def cmd_count(args) -> int:
    bundle = load_bundle(args.bundle)
    variants = enumerate_bundle(bundle, cap=args.cap, workers=args.workers)
    report = build_report(bundle, variants, args.exclude_flagged)
    _emit(args, report.to_dict(), report.to_table())
    return EXIT_OK


def cmd_generate(args) -> int:
    bundle = load_bundle(args.bundle)
    roster = load_roster(args.roster)
    secret = _read_secret(args)
    result = generate(
        bundle,
        roster,
        secret,
        args.out,
        exclude_flagged=args.exclude_flagged,
        cap=args.cap,
        force=args.force,
        extend=args.extend,
        workers=args.workers,
    )
    n_exams = sum(1 for f in result.files if f.startswith("exams/"))
    summary = (
        f"{n_exams} exams for {len(result.table.rows)} students, "
        f"{len(bundle.problems)} problems; {len(result.files)} files in {args.out}"
    )
    _emit(
        args,
        {"students": len(result.table.rows), "files": result.files, "report": result.report.to_dict()},
        summary,
    )
    return EXIT_OK


def cmd_identify(args) -> int:
    db, table, _ = load_artifacts(args.artifacts)
    stop = [s.strip() for s in args.stop.split(",") if s.strip()] if args.stop else []
    if args.snippet:
        try:
            text = Path(args.snippet).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot read snippet: {exc.strerror}", EXIT_INVALID) from None
        observed = extract_values(text, stop)
        from_snippet = True
    else:
        observed = parse_value_list(args.values)
        from_snippet = False
    query = LeakQuery(tuple(observed), args.problem, from_snippet)
    result = identify(query, db.variants, table, db.constants)

    lines = [f"verdict: {result.verdict}" + (f" ({result.n_candidates} candidates)" if result.verdict == AMBIGUOUS else "")]
    for c in result.candidates[: args.limit]:
        lines.append(
            f"  {c.student_id}  {c.problem_id}  matched={c.matched_count}  "
            f"score={c.discrimination_score:.3f}  values={','.join(c.matched_values)}"
        )
    if len(result.candidates) > args.limit:
        lines.append(f"  ... {len(result.candidates) - args.limit} more")
    _emit(args, result.to_dict(), "\n".join(lines))
    return {UNIQUE: EXIT_OK, AMBIGUOUS: EXIT_AMBIGUOUS, NO_MATCH: EXIT_NO_MATCH}[result.verdict]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="examforge",
        description="Per-student unique exams from one skeleton.",
        allow_abbrev=False,  # no prefix matching: "--secret" must not reach --secret-file
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("table", "json"), default="table")

    def enumeration(p):
        p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max combinations per problem")
        p.add_argument("--exclude-flagged", action="store_true", help="treat flagged variants as unusable")
        p.add_argument("--workers", type=int, default=1, help="worker processes for enumeration")

    p = sub.add_parser("validate", allow_abbrev=False, help="check a bundle without enumerating it")
    p.add_argument("bundle", help="path to exam.json")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("count", allow_abbrev=False, help="enumerate variants and print the feasibility report")
    p.add_argument("bundle")
    enumeration(p)
    common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("generate", allow_abbrev=False, help="write per-student exams, solutions and keys")
    p.add_argument("bundle")
    p.add_argument("--roster", required=True, help="CSV with student_id,display_name")
    p.add_argument("--secret-file", help=f"file holding the exam secret (else ${SECRET_ENV})")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    p.add_argument("--extend", action="store_true", help="add new roster students, keep issued exams")
    enumeration(p)
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("identify", allow_abbrev=False, help="trace a leaked fragment to a student")
    p.add_argument("--artifacts", required=True, help="output directory of a generate run")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--snippet", help="text file with the leaked fragment")
    src.add_argument("--values", help='comma-separated observed values, e.g. "200,0.45"')
    p.add_argument("--problem", help="restrict matching to one problem id")
    p.add_argument("--stop", help="stop-list: problem-numbers, years, or literal numbers")
    p.add_argument("--limit", type=int, default=10, help="candidates shown in table output")
    common(p)
    p.set_defaults(func=cmd_identify)
    return parser


def _exit_code(exc: Exception, command: str) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, InsufficientVariantsError):
        return EXIT_INSUFFICIENT
    if isinstance(exc, GenerationError):
        return EXIT_INVALID if command == "validate" else EXIT_EVAL
    if isinstance(exc, CapExceededError):
        return EXIT_CAP
    if isinstance(exc, OutputExistsError):
        return EXIT_OUTPUT_EXISTS
    return EXIT_INVALID


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ExamForgeError) as exc:
        code = _exit_code(exc, args.command)
        print(f"examforge: {exc}", file=sys.stderr)
        if args.format == "json":
            payload = {"error": str(exc), "exit_code": code}
            if isinstance(exc, InsufficientVariantsError):
                payload.update(problem=exc.problem_id, shortfall=exc.shortfall)
            print(json.dumps(payload, indent=2, sort_keys=True))
        return code


if __name__ == "__main__":
    sys.exit(main())
