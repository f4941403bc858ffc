"""Per-student unique exams from one parameterised skeleton.

Typical use::

    from examforge import load_bundle, load_roster, generate
    bundle = load_bundle("exam.json")
    generate(bundle, load_roster("roster.csv"), b"secret", "out/")
"""

from examforge.assigner import AssignmentTable, select_and_assign
from examforge.forensics import LeakQuery, MatchResult, extract_values, identify
from examforge.generator import (
    FeasibilityReport,
    VariantBinding,
    build_report,
    count_raw,
    enumerate_bundle,
    enumerate_variants,
    fingerprint,
)
from examforge.manifest import (
    ExamBundle,
    ParameterSpec,
    ProblemSkeleton,
    Roster,
    dependency_order,
    load_bundle,
    load_roster,
    parse_manifest,
)
from examforge.pipeline import generate
from examforge.render import emit_outputs, render_template

__all__ = [
    "AssignmentTable",
    "ExamBundle",
    "FeasibilityReport",
    "LeakQuery",
    "MatchResult",
    "ParameterSpec",
    "ProblemSkeleton",
    "Roster",
    "VariantBinding",
    "build_report",
    "count_raw",
    "dependency_order",
    "emit_outputs",
    "enumerate_bundle",
    "enumerate_variants",
    "extract_values",
    "fingerprint",
    "generate",
    "identify",
    "load_bundle",
    "load_roster",
    "parse_manifest",
    "render_template",
    "select_and_assign",
]
