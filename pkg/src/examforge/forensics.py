"""Tracing a leaked exam fragment back to the student it was issued to.

The evidence is the multiset of independent-parameter values in the leak.
Each value is weighted by how rare it is among the variants actually handed
out, so a value every student saw contributes nothing.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from examforge.assigner import AssignmentTable
from examforge.errors import ForensicsError
from examforge.generator import VariantBinding, fingerprint
from examforge.template import strip_placeholders
from examforge.values import canonical, canonical_number, is_number_token

STOP_PATTERNS: dict[str, str] = {
    "problem-numbers": r"(?i)\b(?:problem|question|part|exercise|q)\s*\.?\s*\d+",
    "years": r"\b(?:19|20)\d{2}\b",
}

_FRAC_RE = re.compile(r"\\[dt]?frac\s*\{\s*(-?\d+)\s*\}\s*\{\s*(\d+)\s*\}")
_NUMBER_RE = re.compile(
    r"(?<![\w.])-?\d+/\d+(?![\w/])"  # simple fraction a/b
    r"|(?<![\w.])-(?:\d+(?:\.\d+)?|\.\d+)"  # negative number after a non-word char
    r"|(?<![\w.])(?:\d+(?:\.\d+)?|\.\d+)"  # digits glued to a name (v1, p_2) are not values
)


def extract_values(snippet: str, stop: Iterable[str] = ()) -> list[str]:
    """Numbers found in ``snippet``, canonicalised, in reading order.

    ``stop`` entries are either names from :data:`STOP_PATTERNS` (matching
    spans are blanked before scanning) or literal numbers to drop.
    """
    stop = list(stop)
    text = snippet
    literal_stop: set[str] = set()
    for entry in stop:
        if entry in STOP_PATTERNS:
            text = re.sub(STOP_PATTERNS[entry], lambda m: " " * len(m.group()), text)
        elif is_number_token(entry):
            literal_stop.add(canonical_number(entry))
        else:
            raise ForensicsError(f"unknown stop-list entry {entry!r}")

    found: list[tuple[int, str]] = []

    def take_frac(m: re.Match) -> str:
        num, den = int(m.group(1)), int(m.group(2))
        if den != 0:
            found.append((m.start(), canonical_number(f"{num}/{den}")))
        return " " * len(m.group())

    text = _FRAC_RE.sub(take_frac, text)
    for m in _NUMBER_RE.finditer(text):
        tok = m.group()
        if "/" in tok and tok.split("/")[1].strip("0") == "":
            continue
        found.append((m.start(), canonical_number(tok)))
    found.sort(key=lambda item: item[0])
    return [v for _, v in found if v not in literal_stop]


def parse_value_list(text: str) -> list[str]:
    """``--values`` syntax: comma separated, numbers or double-quoted strings."""
    out = []
    for raw in re.findall(r'\s*"(?:[^"\\]|\\.)*"\s*|[^,]+', text):
        item = raw.strip()
        if not item:
            continue
        if item.startswith('"'):
            out.append(re.sub(r"\\(.)", r"\1", item[1:-1]))
        elif is_number_token(item):
            out.append(canonical_number(item))
        else:
            out.append(item)
    return out


@dataclass(frozen=True)
class LeakQuery:
    observed_values: tuple[str, ...]
    problem_id: str | None = None
    from_snippet: bool = False


@dataclass(frozen=True)
class Candidate:
    student_id: str
    problem_id: str
    matched_count: int
    discrimination_score: float
    matched_values: tuple[str, ...]
    complete: bool = field(default=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "student_id": self.student_id,
            "problem_id": self.problem_id,
            "matched": self.matched_count,
            "score": round(self.discrimination_score, 6),
            "matched_values": list(self.matched_values),
        }


UNIQUE = "unique_match"
AMBIGUOUS = "ambiguous"
NO_MATCH = "no_match"


@dataclass(frozen=True)
class MatchResult:
    verdict: str
    candidates: tuple[Candidate, ...]
    ignored_values: tuple[str, ...] = ()

    @property
    def n_candidates(self) -> int:
        """Candidates tied on the best matched count (the ambiguity width)."""
        if not self.candidates:
            return 0
        top = self.candidates[0].matched_count
        return sum(1 for c in self.candidates if c.matched_count == top)

    @property
    def student(self) -> str | None:
        return self.candidates[0].student_id if self.verdict == UNIQUE else None

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "candidates": [c.to_dict() for c in self.candidates]}
        if self.verdict == AMBIGUOUS:
            out["n"] = self.n_candidates
        if self.ignored_values:
            out["ignored_values"] = list(self.ignored_values)
        return out


def _rank_key(c: Candidate):
    return (-c.matched_count, -c.discrimination_score, c.student_id.encode("utf-8"), c.problem_id)


def _score_problem(
    pid: str,
    observed: Counter,
    assigned: Sequence[tuple[str, Counter]],
) -> tuple[list[Candidate], Counter]:
    """Candidates for one problem plus the observed values it could explain."""
    holders = Counter()
    for _, fp in assigned:
        holders.update(set(fp))
    attributable = Counter({v: c for v, c in observed.items() if holders[v] > 0})
    needed = sum(attributable.values())
    total = len(assigned)
    out = []
    for sid, fp in assigned:
        overlap = attributable & fp
        matched = sum(overlap.values())
        if matched == 0:
            continue
        score = 0.0
        for v, c in overlap.items():
            frac = holders[v] / total
            score += c * (-math.log2(frac)) if frac < 1 else 0.0
        out.append(
            Candidate(sid, pid, matched, score, tuple(sorted(overlap.elements())), matched == needed)
        )
    return out, attributable


def identify(
    query: LeakQuery,
    variants: Mapping[str, Sequence[VariantBinding]],
    table: AssignmentTable,
    constants: Mapping[str, Sequence[str]] | None = None,
) -> MatchResult:
    """Rank (student, problem) pairs by how well they explain the leak.

    Observed values that no assigned variant of a problem contains cannot
    discriminate and are set aside for that problem (reported as
    ``ignored_values`` when no problem explains them). For snippet queries
    the problem's template constants are subtracted first, so literal
    numbers in the skeleton are not mistaken for parameters.
    """
    if not query.observed_values:
        raise ForensicsError("no observed values to match")
    if query.problem_id is not None:
        if query.problem_id not in table.problem_ids:
            raise ForensicsError(f"unknown problem id {query.problem_id!r}")
        scope = [query.problem_id]
    else:
        scope = list(table.problem_ids)

    lookup = {pid: {b.index: b for b in variants[pid]} for pid in scope}
    observed_all = Counter(query.observed_values)
    candidates: list[Candidate] = []
    explained: set[str] = set()
    for pid in scope:
        observed = observed_all.copy()
        if query.from_snippet and constants:
            observed -= Counter(constants.get(pid, ()))
        assigned = [
            (r.student_id, Counter(fingerprint(lookup[pid][r.indices[pid]])))
            for r in table.rows
        ]
        found, attributable = _score_problem(pid, observed, assigned)
        explained.update(attributable)
        candidates.extend(found)

    candidates.sort(key=_rank_key)
    ignored = tuple(sorted(v for v in observed_all if v not in explained))
    if not candidates:
        return MatchResult(NO_MATCH, (), ignored)
    # Certainty needs every rival to miss at least one value the leader
    # matched; a better score alone is not enough, since a rival variant of
    # another problem can contain the very same numbers.
    top = candidates[0]
    rivals = [c for c in candidates[1:] if c.matched_count >= top.matched_count]
    verdict = UNIQUE if top.complete and not rivals else AMBIGUOUS
    return MatchResult(verdict, tuple(candidates), ignored)


def template_constants(template_text: str) -> list[str]:
    """Numbers written literally in a template (outside placeholders)."""
    return extract_values(strip_placeholders(template_text))


def observed_from_binding(binding: VariantBinding) -> list[str]:
    return [canonical(binding.values[n]) for n in binding.independent_names]
