"""Keyed, reproducible mapping of students to per-problem variants."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

from examforge.errors import AssignmentError, InsufficientVariantsError
from examforge.generator import VariantBinding
from examforge.manifest import ExamBundle, Roster, student_sort_key
from examforge.prng import SplitMix64, derive_seed, shuffle


@dataclass(frozen=True)
class AssignmentRow:
    student_id: str
    token: str
    indices: Mapping[str, int]


@dataclass(frozen=True)
class AssignmentTable:
    secret_digest: int
    problem_ids: tuple[str, ...]
    rows: tuple[AssignmentRow, ...]

    def row(self, student_id: str) -> AssignmentRow:
        for r in self.rows:
            if r.student_id == student_id:
                return r
        raise KeyError(student_id)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["student_id", "token"] + [f"{p}_variant_index" for p in self.problem_ids])
        for r in self.rows:
            w.writerow([r.student_id, r.token] + [r.indices[p] for p in self.problem_ids])
        return buf.getvalue()


def parse_assignment_csv(text: str, secret_digest: int = 0) -> AssignmentTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise AssignmentError("assignment CSV is empty") from None
    if header[:2] != ["student_id", "token"] or not all(
        h.endswith("_variant_index") for h in header[2:]
    ):
        raise AssignmentError("assignment CSV has an unexpected header")
    pids = tuple(h[: -len("_variant_index")] for h in header[2:])
    rows = []
    for line, rec in enumerate(reader, start=2):
        if len(rec) != len(header):
            raise AssignmentError(f"assignment CSV line {line}: wrong field count")
        try:
            idx = {p: int(v) for p, v in zip(pids, rec[2:])}
        except ValueError:
            raise AssignmentError(f"assignment CSV line {line}: bad variant index") from None
        rows.append(AssignmentRow(rec[0], rec[1], idx))
    return AssignmentTable(secret_digest, pids, tuple(rows))


def secret_digest(secret: bytes) -> int:
    return derive_seed(secret, b"audit")


def student_token(secret: bytes, student_id: str) -> str:
    return format(derive_seed(secret, b"tok:" + student_id.encode("utf-8")), "016x")


def shuffled_usable(
    problem_id: str,
    bindings: Sequence[VariantBinding],
    secret: bytes,
    exclude_flagged: bool = False,
) -> list[int]:
    """Usable variant indices of one problem in keyed shuffled order."""
    order = [b.index for b in bindings if b.usable(exclude_flagged)]
    shuffle(order, SplitMix64(derive_seed(secret, problem_id.encode("utf-8"))))
    return order


def select_and_assign(
    bundle: ExamBundle,
    variants: Mapping[str, Sequence[VariantBinding]],
    roster: Roster,
    secret: bytes,
    exclude_flagged: bool = False,
    previous: AssignmentTable | None = None,
) -> AssignmentTable:
    """Give the student of roster rank r shuffled position r in every problem.

    With ``previous`` (extend mode) existing rows are kept untouched and
    students not yet assigned take the lowest unused shuffled positions.
    """
    pids = tuple(p.id for p in bundle.problems)
    kept = list(previous.rows) if previous else []
    if previous is not None and previous.problem_ids != pids:
        raise AssignmentError("existing assignment was made for different problems")
    if previous is not None and previous.secret_digest != secret_digest(secret):
        raise AssignmentError("existing assignment was made with a different secret")
    known = {r.student_id for r in kept}
    newcomers = [s.student_id for s in roster.students if s.student_id not in known]
    total = len(kept) + len(newcomers)

    shuffled: dict[str, list[int]] = {}
    for pid in pids:
        order = shuffled_usable(pid, variants[pid], secret, exclude_flagged)
        if len(order) < total:
            raise InsufficientVariantsError(pid, len(order), total)
        shuffled[pid] = order

    free: dict[str, list[int]] = {}
    for pid in pids:
        position = {idx: pos for pos, idx in enumerate(shuffled[pid])}
        used = set()
        for r in kept:
            if r.indices[pid] not in position:
                raise AssignmentError(
                    f"student {r.student_id!r}: variant {r.indices[pid]} of {pid!r} "
                    "is no longer usable; the bundle or flags changed"
                )
            used.add(position[r.indices[pid]])
        free[pid] = [i for i in range(len(shuffled[pid])) if i not in used]

    rows = list(kept)
    for rank, sid in enumerate(newcomers):
        idx = {pid: shuffled[pid][free[pid][rank]] for pid in pids}
        rows.append(AssignmentRow(sid, student_token(secret, sid), idx))
    rows.sort(key=lambda r: student_sort_key(r.student_id))

    tokens = [r.token for r in rows]
    if len(set(tokens)) != len(tokens):
        raise AssignmentError("two students received the same token; choose another secret")
    return AssignmentTable(secret_digest(secret), pids, tuple(rows))
