"""Durable artifacts written by ``generate`` and read back by ``identify``.

``variants.json``  every variant of every problem, values tagged by type
``assignment.csv`` the audit table linking students to variant indices
``run.json``       secret digest, flags and the list of files written
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from examforge.assigner import AssignmentTable, parse_assignment_csv
from examforge.errors import ExamForgeError
from examforge.forensics import template_constants
from examforge.generator import VariantBinding
from examforge.manifest import ExamBundle
from examforge.values import decode, encode

VARIANT_DB = "variants.json"
ASSIGNMENT_CSV = "assignment.csv"
RUN_FILE = "run.json"
FORMAT_VERSION = 1


class ArtifactError(ExamForgeError):
    pass


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def variant_db_json(bundle: ExamBundle, variants: Mapping[str, Sequence[VariantBinding]]) -> str:
    problems = []
    for prob in bundle.problems:
        problems.append(
            {
                "id": prob.id,
                "independents": [p.name for p in prob.independents],
                "constants": template_constants(prob.template_text),
                "variants": [
                    {
                        "index": b.index,
                        "status": b.status,
                        "failed": b.failed,
                        "flags": list(b.flags),
                        "values": {k: encode(v) for k, v in b.values.items()},
                    }
                    for b in variants[prob.id]
                ],
            }
        )
    return dumps({"format": FORMAT_VERSION, "title": bundle.title, "problems": problems})


@dataclass
class VariantDB:
    title: str
    problem_ids: tuple[str, ...]
    variants: dict[str, list[VariantBinding]]
    constants: dict[str, list[str]]


def parse_variant_db(text: str) -> VariantDB:
    try:
        doc = json.loads(text)
        if doc.get("format") != FORMAT_VERSION:
            raise ArtifactError(f"unsupported variant database format {doc.get('format')!r}")
        variants: dict[str, list[VariantBinding]] = {}
        constants: dict[str, list[str]] = {}
        for prob in doc["problems"]:
            names = tuple(prob["independents"])
            variants[prob["id"]] = [
                VariantBinding(
                    prob["id"],
                    v["index"],
                    {k: decode(x) for k, x in v["values"].items()},
                    v["status"],
                    v["failed"],
                    tuple(v["flags"]),
                    names,
                )
                for v in prob["variants"]
            ]
            constants[prob["id"]] = list(prob["constants"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"variant database is malformed: {exc}") from None
    return VariantDB(doc.get("title", ""), tuple(variants), variants, constants)


def load_artifacts(out_dir: str | Path) -> tuple[VariantDB, AssignmentTable, dict]:
    out_dir = Path(out_dir)
    try:
        db = parse_variant_db((out_dir / VARIANT_DB).read_text(encoding="utf-8"))
        run = json.loads((out_dir / RUN_FILE).read_text(encoding="utf-8"))
        digest = int(run["secret_digest"], 16)
        table = parse_assignment_csv(
            (out_dir / ASSIGNMENT_CSV).read_text(encoding="utf-8"), digest
        )
    except (OSError, KeyError, ValueError) as exc:
        raise ArtifactError(f"cannot read artifacts in {out_dir}: {exc}") from None
    if table.problem_ids != db.problem_ids:
        raise ArtifactError("assignment and variant database disagree on problems")
    for row in table.rows:
        for pid in table.problem_ids:
            idx = row.indices[pid]
            known = db.variants[pid]
            if not (0 <= idx < len(known) and known[idx].index == idx):
                raise ArtifactError(
                    f"student {row.student_id!r} refers to missing variant {idx} of {pid!r}"
                )
    return db, table, run


def run_json(table: AssignmentTable, exclude_flagged: bool, files: Sequence[str]) -> str:
    return dumps(
        {
            "format": FORMAT_VERSION,
            "secret_digest": format(table.secret_digest, "016x"),
            "exclude_flagged": exclude_flagged,
            "problems": list(table.problem_ids),
            "students": len(table.rows),
            "files": sorted(files),
        }
    )
