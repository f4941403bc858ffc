"""Variant enumeration, classification and feasibility reporting."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from examforge.errors import CapExceededError, ExprError, GenerationError
from examforge.expr import evaluate
from examforge.manifest import ExamBundle, Kind, ProblemSkeleton, evaluation_plan
from examforge.values import Value, canonical

DEFAULT_CAP = 1_000_000

VALID = "valid"
FAILED = "failed_conditional"
FLAGGED = "flagged"


@dataclass(frozen=True)
class VariantBinding:
    problem_id: str
    index: int
    values: dict[str, Value] = field(compare=False)
    status: str = VALID
    failed: str | None = None
    flags: tuple[str, ...] = ()
    independent_names: tuple[str, ...] = field(default=(), compare=False, repr=False)

    @property
    def valid(self) -> bool:
        return self.status != FAILED

    def usable(self, exclude_flagged: bool = False) -> bool:
        if self.status == FAILED:
            return False
        return not (exclude_flagged and self.flags)


Fingerprint = tuple[str, ...]


def fingerprint(binding: VariantBinding) -> Fingerprint:
    """Sorted canonical strings of the binding's independent values (a multiset)."""
    if binding.status == FAILED:
        raise ValueError("failed variants have no fingerprint")
    return tuple(sorted(canonical(binding.values[n]) for n in binding.independent_names))


def count_raw(problem: ProblemSkeleton) -> int:
    return math.prod(len(p.values) for p in problem.independents)


def _combination(problem: ProblemSkeleton, index: int) -> dict[str, Value]:
    out: dict[str, Value] = {}
    for p in reversed(problem.independents):
        index, digit = divmod(index, len(p.values))
        out[p.name] = p.values[digit]
    return out


def _evaluate_one(problem: ProblemSkeleton, plan, names: tuple[str, ...], index: int) -> VariantBinding:
    env = _combination(problem, index)
    flags: list[str] = []
    for p in plan:
        if p.kind is Kind.INDEPENDENT:
            continue
        try:
            value = evaluate(p.ast, env)
        except (ExprError, ArithmeticError) as exc:
            raise GenerationError(problem.id, index, p.name, exc) from None
        env[p.name] = value
        if p.kind is Kind.CONDITIONAL and not value:
            return VariantBinding(problem.id, index, env, FAILED, p.name, (), names)
        if p.kind is Kind.FLAG and value:
            flags.append(p.name)
    status = FLAGGED if flags else VALID
    ordered = {p.name: env[p.name] for p in problem.parameters}
    return VariantBinding(problem.id, index, ordered, status, None, tuple(flags), names)


def _enumerate_range(problem: ProblemSkeleton, start: int, stop: int) -> list[VariantBinding]:
    plan = evaluation_plan(problem)
    names = tuple(p.name for p in problem.independents)
    return [_evaluate_one(problem, plan, names, i) for i in range(start, stop)]


def evaluate_variant(problem: ProblemSkeleton, index: int) -> VariantBinding:
    """Evaluate the single combination at ``index`` of the canonical order."""
    if not 0 <= index < count_raw(problem):
        raise IndexError(index)
    names = tuple(p.name for p in problem.independents)
    return _evaluate_one(problem, evaluation_plan(problem), names, index)


def enumerate_variants(
    problem: ProblemSkeleton,
    *,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
    chunk: int = 2048,
) -> Iterator[VariantBinding]:
    """Yield every combination of independent values in canonical order.

    Order is lexicographic over independents in declaration order with the
    last one varying fastest. Evaluation stops at the first false
    conditional. With ``workers > 1`` index ranges are evaluated in worker
    processes and re-emitted in index order, so output is identical.
    """
    raw = count_raw(problem)
    if raw > cap:
        raise CapExceededError(problem.id, raw, cap)
    ranges = [(s, min(s + chunk, raw)) for s in range(0, raw, chunk)]
    if workers <= 1 or len(ranges) == 0:
        for s, e in ranges:
            yield from _enumerate_range(problem, s, e)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_enumerate_range, problem, s, e) for s, e in ranges]
        for fut in futures:
            yield from fut.result()


def enumerate_bundle(
    bundle: ExamBundle, *, cap: int = DEFAULT_CAP, workers: int = 1
) -> dict[str, list[VariantBinding]]:
    """Materialised variants of every problem, keyed by problem id."""
    for problem in bundle.problems:
        raw = count_raw(problem)
        if raw > cap:
            raise CapExceededError(problem.id, raw, cap)
    if workers <= 1:
        return {p.id: list(enumerate_variants(p, cap=cap)) for p in bundle.problems}
    # one pool for all problems; chunks stay in canonical order per problem
    chunk = 256
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = {
            p.id: [
                pool.submit(_enumerate_range, p, s, min(s + chunk, count_raw(p)))
                for s in range(0, count_raw(p), chunk)
            ]
            for p in bundle.problems
        }
        return {pid: [b for f in futs for b in f.result()] for pid, futs in pending.items()}


# -- reporting ---------------------------------------------------------------


@dataclass
class ProblemReport:
    problem_id: str
    raw: int
    valid: int
    failed: dict[str, int]
    flagged: dict[str, int]
    flagged_variants: int

    def usable(self, exclude_flagged: bool) -> int:
        return self.valid - self.flagged_variants if exclude_flagged else self.valid

    def to_dict(self) -> dict:
        return {
            "raw": self.raw,
            "valid": self.valid,
            "failed": dict(self.failed),
            "flagged": dict(self.flagged),
            "flagged_variants": self.flagged_variants,
        }


@dataclass
class FeasibilityReport:
    problems: list[ProblemReport]
    exclude_flagged: bool = False

    @property
    def usable(self) -> int:
        """Exam-level usable count: the scarcest problem bounds the class size."""
        if not self.problems:
            return 0
        return min(p.usable(self.exclude_flagged) for p in self.problems)

    def to_dict(self) -> dict:
        return {
            "problems": {p.problem_id: p.to_dict() for p in self.problems},
            "exclude_flagged": self.exclude_flagged,
            "usable": self.usable,
        }

    def to_table(self) -> str:
        rows = [("problem", "raw", "valid", "failed", "flagged", "usable")]
        for p in self.problems:
            failed = ", ".join(f"{k}={v}" for k, v in p.failed.items()) or "-"
            flagged = ", ".join(f"{k}={v}" for k, v in p.flagged.items()) or "-"
            rows.append(
                (p.problem_id, str(p.raw), str(p.valid), failed, flagged,
                 str(p.usable(self.exclude_flagged)))
            )
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        note = " (flagged excluded)" if self.exclude_flagged else ""
        lines.append(f"usable exams{note}: {self.usable}")
        return "\n".join(lines)


def problem_report(problem: ProblemSkeleton, bindings: Iterable[VariantBinding]) -> ProblemReport:
    failed = {p.name: 0 for p in problem.of_kind(Kind.CONDITIONAL)}
    flagged = {p.name: 0 for p in problem.of_kind(Kind.FLAG)}
    raw = valid = flagged_variants = 0
    for b in bindings:
        raw += 1
        if b.status == FAILED:
            failed[b.failed] += 1
            continue
        valid += 1
        if b.flags:
            flagged_variants += 1
        for name in b.flags:
            flagged[name] += 1
    return ProblemReport(problem.id, raw, valid, failed, flagged, flagged_variants)


def build_report(
    bundle: ExamBundle,
    variants: dict[str, Sequence[VariantBinding]],
    exclude_flagged: bool = False,
) -> FeasibilityReport:
    return FeasibilityReport(
        [problem_report(p, variants[p.id]) for p in bundle.problems], exclude_flagged
    )
