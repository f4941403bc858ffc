"""Template instantiation, number formatting and output files."""

from __future__ import annotations

import csv
import io
import shutil
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from examforge.assigner import AssignmentTable
from examforge.errors import OutputExistsError, RenderError
from examforge.generator import VariantBinding
from examforge.manifest import ExamBundle, Kind
from examforge.template import FormatSpec, Placeholder, parse_template
from examforge.values import Value, canonical

EXAMS_DIR = "exams"
SOLUTIONS_DIR = "solutions"
ANSWER_KEY = "answer_key.csv"


def _exact(value: Value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _fixed(q: Fraction, k: int) -> str:
    scaled = round(q * 10 ** k)  # Fraction.__round__ rounds half to even
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def _scientific(q: Fraction, k: int) -> str:
    if q == 0:
        mantissa = "0" if k == 1 else "0." + "0" * (k - 1)
        return f"{mantissa}e+00"
    sign = "-" if q < 0 else ""
    a = abs(q)
    e = len(str(a.numerator)) - len(str(a.denominator))
    while a >= Fraction(10) ** (e + 1):
        e += 1
    while a < Fraction(10) ** e:
        e -= 1
    m = round(a / Fraction(10) ** e * 10 ** (k - 1))
    if m >= 10 ** k:
        m //= 10
        e += 1
    d = str(m)
    mantissa = d if k == 1 else f"{d[0]}.{d[1:]}"
    return f"{sign}{mantissa}e{'-' if e < 0 else '+'}{abs(e):02d}"


def format_value(value: Value, fmt: FormatSpec) -> str:
    """Render one value; dec/sci round the exact value half to even."""
    kind = fmt.kind
    if kind == "canonical":
        return canonical(value)
    numeric = isinstance(value, (Fraction, float)) and not isinstance(value, bool)
    if kind in ("raw", "frac"):
        if not isinstance(value, Fraction):
            raise RenderError(f"format {fmt} needs an exact rational, got {value!r}")
        if kind == "raw" or value.denominator == 1:
            return canonical(value)
        sign = "-" if value < 0 else ""
        return f"{sign}\\frac{{{abs(value.numerator)}}}{{{value.denominator}}}"
    if not numeric:
        raise RenderError(f"format {fmt} needs a number, got {value!r}")
    if kind == "dec":
        return _fixed(_exact(value), fmt.digits)
    return _scientific(_exact(value), fmt.digits)


def render_template(template_text: str, values: Mapping[str, Value]) -> str:
    out = []
    for seg in parse_template(template_text):
        if isinstance(seg, Placeholder):
            if seg.name not in values:
                raise RenderError(f"unresolved placeholder {{{{{seg.name}}}}}")
            out.append(format_value(values[seg.name], seg.fmt))
        else:
            out.append(seg)
    return "".join(out)


@dataclass(frozen=True)
class ExamInstance:
    student_id: str
    student_token: str
    exam_text: str
    solution_text: str | None
    bindings: tuple[VariantBinding, ...]


def _by_index(variants: Mapping[str, Sequence[VariantBinding]]) -> dict[str, dict[int, VariantBinding]]:
    return {pid: {b.index: b for b in bs} for pid, bs in variants.items()}


def build_instances(
    table: AssignmentTable,
    bundle: ExamBundle,
    variants: Mapping[str, Sequence[VariantBinding]],
) -> list[ExamInstance]:
    lookup = _by_index(variants)
    has_solutions = any(p.solution_template_text is not None for p in bundle.problems)
    out = []
    for row in table.rows:
        bindings = tuple(lookup[p.id][row.indices[p.id]] for p in bundle.problems)
        parts = [render_template(p.template_text, b.values) for p, b in zip(bundle.problems, bindings)]
        exam = "\n".join(parts)
        solution = None
        if has_solutions:
            solution = "\n".join(
                render_template(p.solution_template_text, b.values)
                for p, b in zip(bundle.problems, bindings)
                if p.solution_template_text is not None
            )
        out.append(ExamInstance(row.student_id, row.token, exam, solution, bindings))
    return out


def key_columns(bundle: ExamBundle) -> list[str]:
    """Dependent and solution parameter names, first-seen order across problems."""
    cols: list[str] = []
    for prob in bundle.problems:
        for p in prob.parameters:
            if p.kind in (Kind.DEPENDENT, Kind.SOLUTION) and p.name not in cols:
                cols.append(p.name)
    return cols


def answer_key_csv(instances: Sequence[ExamInstance], bundle: ExamBundle) -> str:
    cols = key_columns(bundle)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["student_id", "token", "problem_id", "variant_index"] + cols)
    for inst in instances:
        for prob, b in zip(bundle.problems, inst.bindings):
            shown = {
                p.name for p in prob.parameters if p.kind in (Kind.DEPENDENT, Kind.SOLUTION)
            }
            w.writerow(
                [inst.student_id, inst.student_token, prob.id, b.index]
                + [canonical(b.values[c]) if c in shown else "" for c in cols]
            )
    return buf.getvalue()


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


MANAGED = (EXAMS_DIR, SOLUTIONS_DIR, ANSWER_KEY)


def prepare_out_dir(out_dir: Path, force: bool, managed: Sequence[str] = MANAGED) -> None:
    """Refuse a non-empty directory unless forced; when forced, clear our files."""
    if out_dir.exists() and any(out_dir.iterdir()):
        if not force:
            raise OutputExistsError(f"output directory {out_dir} is not empty (use --force)")
        for name in managed:
            target = out_dir / name
            if target.is_dir():
                shutil.rmtree(target)
            elif target.exists():
                target.unlink()
    out_dir.mkdir(parents=True, exist_ok=True)


def emit_outputs(
    table: AssignmentTable,
    bundle: ExamBundle,
    variants: Mapping[str, Sequence[VariantBinding]],
    out_dir: str | Path,
    force: bool = False,
) -> list[str]:
    """Write exams, solutions and the answer key; return sorted relative paths."""
    out_dir = Path(out_dir)
    prepare_out_dir(out_dir, force)
    instances = build_instances(table, bundle, variants)
    written = []
    for inst in instances:
        rel = f"{EXAMS_DIR}/{inst.student_token}.tex"
        write_text(out_dir / rel, inst.exam_text)
        written.append(rel)
        if inst.solution_text is not None:
            rel = f"{SOLUTIONS_DIR}/{inst.student_token}.tex"
            write_text(out_dir / rel, inst.solution_text)
            written.append(rel)
    write_text(out_dir / ANSWER_KEY, answer_key_csv(instances, bundle))
    written.append(ANSWER_KEY)
    return sorted(written)
