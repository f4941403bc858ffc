"""End-to-end generate step: enumerate, assign, render, persist."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from examforge.assigner import AssignmentTable, parse_assignment_csv, secret_digest, select_and_assign
from examforge.errors import ManifestError
from examforge.generator import DEFAULT_CAP, FeasibilityReport, build_report, enumerate_bundle
from examforge.manifest import ExamBundle, Roster
from examforge.render import MANAGED, emit_outputs, prepare_out_dir, write_text
from examforge.store import ASSIGNMENT_CSV, RUN_FILE, VARIANT_DB, run_json, variant_db_json


@dataclass
class GenerateResult:
    report: FeasibilityReport
    table: AssignmentTable
    files: list[str]


def generate(
    bundle: ExamBundle,
    roster: Roster,
    secret: bytes,
    out_dir: str | Path,
    *,
    exclude_flagged: bool = False,
    cap: int = DEFAULT_CAP,
    force: bool = False,
    extend: bool = False,
    workers: int = 1,
) -> GenerateResult:
    out_dir = Path(out_dir)
    previous = None
    if extend:
        path = out_dir / ASSIGNMENT_CSV
        if not path.exists():
            raise ManifestError(f"--extend needs an existing {ASSIGNMENT_CSV} in {out_dir}")
        previous = parse_assignment_csv(path.read_text(encoding="utf-8"), secret_digest(secret))
        force = True

    variants = enumerate_bundle(bundle, cap=cap, workers=workers)
    report = build_report(bundle, variants, exclude_flagged)
    table = select_and_assign(bundle, variants, roster, secret, exclude_flagged, previous)

    prepare_out_dir(out_dir, force, MANAGED + (VARIANT_DB, ASSIGNMENT_CSV, RUN_FILE))
    files = emit_outputs(table, bundle, variants, out_dir, force=True)
    write_text(out_dir / VARIANT_DB, variant_db_json(bundle, variants))
    write_text(out_dir / ASSIGNMENT_CSV, table.to_csv())
    files = sorted(files + [VARIANT_DB, ASSIGNMENT_CSV, RUN_FILE])
    write_text(out_dir / RUN_FILE, run_json(table, exclude_flagged, files))
    return GenerateResult(report, table, files)
