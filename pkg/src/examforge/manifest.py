"""Exam bundle data model, manifest parsing and structural validation."""

from __future__ import annotations

import csv
import enum
import heapq
import io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

from examforge.errors import ExprError, ManifestError, RenderError
from examforge.expr import free_names, parse_expr, to_source, type_check, uses_real
from examforge.expr.syntax import Expr
from examforge.template import placeholders
from examforge.values import VType, Value, canonical, is_number_token, parse_number

IDENT_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*")


class Kind(enum.Enum):
    INDEPENDENT = "independent"
    DEPENDENT = "dependent"
    CONDITIONAL = "conditional"
    FLAG = "flag"
    SOLUTION = "solution"


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    kind: Kind
    values: tuple[Value, ...] | None = None
    expr: str | None = field(default=None, compare=False)
    message: str | None = None
    ast: Expr | None = field(default=None, repr=False)

    @property
    def is_independent(self) -> bool:
        return self.kind is Kind.INDEPENDENT


@dataclass(frozen=True)
class ProblemSkeleton:
    id: str
    template_text: str
    solution_template_text: str | None
    parameters: tuple[ParameterSpec, ...]
    template_name: str = field(default="", compare=False)
    solution_template_name: str | None = field(default=None, compare=False)
    types: Mapping[str, VType] = field(default_factory=dict, compare=False, repr=False)

    def param(self, name: str) -> ParameterSpec:
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def independents(self) -> list[ParameterSpec]:
        return [p for p in self.parameters if p.kind is Kind.INDEPENDENT]

    def of_kind(self, kind: Kind) -> list[ParameterSpec]:
        return [p for p in self.parameters if p.kind is kind]


@dataclass(frozen=True)
class ExamBundle:
    title: str
    problems: tuple[ProblemSkeleton, ...]
    manifest_path: str | None = field(default=None, compare=False)
    template_dir: str | None = field(default=None, compare=False)
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def problem(self, problem_id: str) -> ProblemSkeleton:
        for p in self.problems:
            if p.id == problem_id:
                return p
        raise KeyError(problem_id)


@dataclass(frozen=True)
class Student:
    student_id: str
    display_name: str = ""


def student_sort_key(student_id: str) -> bytes:
    return student_id.encode("utf-8")


@dataclass(frozen=True)
class Roster:
    students: tuple[Student, ...]

    def __post_init__(self):
        ids = [s.student_id for s in self.students]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestError(f"duplicate student ids in roster: {', '.join(dup)}")
        ordered = tuple(sorted(self.students, key=lambda s: student_sort_key(s.student_id)))
        object.__setattr__(self, "students", ordered)

    def __len__(self) -> int:
        return len(self.students)

    @property
    def ids(self) -> list[str]:
        return [s.student_id for s in self.students]


# -- dependency analysis -----------------------------------------------------


def _edges(problem_params: Sequence[ParameterSpec]) -> dict[str, set[str]]:
    """name -> set of names it references."""
    return {
        p.name: (free_names(p.ast) if p.ast is not None else set())
        for p in problem_params
    }


def _find_cycle(deps: Mapping[str, set[str]], order: Sequence[str]) -> list[str] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in order}
    stack: list[str] = []

    def visit(n: str) -> list[str] | None:
        color[n] = GREY
        stack.append(n)
        for m in sorted(deps[n], key=order.index):
            if color[m] == GREY:
                return stack[stack.index(m):] + [m]
            if color[m] == WHITE:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = BLACK
        return None

    for n in order:
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    return None


def dependency_order(problem: ProblemSkeleton) -> list[str]:
    """Stable topological order of parameter names.

    Among parameters whose inputs are all available, the one declared first
    goes next.
    """
    params = problem.parameters
    index = {p.name: i for i, p in enumerate(params)}
    deps = _edges(params)
    pending = {n: len(d) for n, d in deps.items()}
    users: dict[str, list[str]] = {n: [] for n in deps}
    for n, d in deps.items():
        for m in d:
            users[m].append(n)
    ready = [index[n] for n, c in pending.items() if c == 0]
    heapq.heapify(ready)
    out: list[str] = []
    while ready:
        name = params[heapq.heappop(ready)].name
        out.append(name)
        for u in users[name]:
            pending[u] -= 1
            if pending[u] == 0:
                heapq.heappush(ready, index[u])
    if len(out) != len(params):
        raise ManifestError(f"problem {problem.id!r}: dependency cycle")
    return out


def evaluation_plan(problem: ProblemSkeleton) -> list[ParameterSpec]:
    """Dependency order with solutions moved last (nothing may depend on them
    except other solutions, so the move preserves every edge)."""
    order = [problem.param(n) for n in dependency_order(problem)]
    return [p for p in order if p.kind is not Kind.SOLUTION] + [
        p for p in order if p.kind is Kind.SOLUTION
    ]


# -- parsing -----------------------------------------------------------------

_TOP_KEYS = {"title", "problems"}
_PROBLEM_KEYS = {"id", "template", "solution_template", "parameters"}
_PARAM_KEYS = {"name", "kind", "values", "expr", "message"}


def _fail(where: str, msg: str) -> ManifestError:
    return ManifestError(f"{where}: {msg}" if where else msg)


def _require_str(obj: dict, key: str, where: str) -> str:
    if key not in obj:
        raise _fail(where, f"missing field {key!r}")
    value = obj[key]
    if not isinstance(value, str) or not value.strip():
        raise _fail(where, f"field {key!r} must be a nonempty string")
    return value


def _check_keys(obj, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise _fail(where, "expected a JSON object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise _fail(where, f"unknown field(s) {', '.join(map(repr, extra))}")


def _parse_values(raw, where: str) -> tuple[Value, ...]:
    if not isinstance(raw, list) or not raw:
        raise _fail(where, "independent parameter needs a nonempty 'values' list")
    out: list[Value] = []
    for item in raw:
        if not isinstance(item, str):
            raise _fail(where, f"value {item!r} must be a string or number")
        out.append(parse_number(item) if is_number_token(item) else item)
    kinds = {isinstance(v, Fraction) for v in out}
    if len(kinds) > 1:
        raise _fail(where, "values mix numbers and text")
    seen: set = set()
    for src, v in zip(raw, out):
        if v in seen:
            raise _fail(where, f"duplicate value {src!r}")
        seen.add(v)
    return tuple(out)


def _parse_param(raw, where: str) -> ParameterSpec:
    _check_keys(raw, _PARAM_KEYS, where)
    name = _require_str(raw, "name", where)
    if not IDENT_RE.fullmatch(name):
        raise _fail(where, f"parameter name {name!r} is not an identifier")
    where = f"{where} ({name})"
    kind_text = _require_str(raw, "kind", where)
    try:
        kind = Kind(kind_text)
    except ValueError:
        raise _fail(where, f"unknown kind {kind_text!r}") from None
    if "message" in raw and kind is not Kind.FLAG:
        raise _fail(where, "'message' is only allowed on flag parameters")
    message = raw.get("message")
    if message is not None and not isinstance(message, str):
        raise _fail(where, "'message' must be a string")
    if kind is Kind.INDEPENDENT:
        if "expr" in raw:
            raise _fail(where, "independent parameters take 'values', not 'expr'")
        return ParameterSpec(name, kind, values=_parse_values(raw.get("values"), where))
    if "values" in raw:
        raise _fail(where, f"{kind.value} parameters take 'expr', not 'values'")
    source = _require_str(raw, "expr", where)
    try:
        ast = parse_expr(source)
    except ExprError as exc:
        raise _fail(where, f"in expression {source!r}: {exc}") from None
    return ParameterSpec(name, kind, expr=source, message=message, ast=ast)


def _validate_problem(problem: ProblemSkeleton, where: str, warnings: list[str]) -> ProblemSkeleton:
    params = problem.parameters
    names = [p.name for p in params]
    dups = sorted({n for n in names if names.count(n) > 1})
    if dups:
        raise _fail(where, f"duplicate parameter name(s) {', '.join(dups)}")
    if not problem.independents:
        raise _fail(where, "needs at least one independent parameter")
    if not problem.of_kind(Kind.SOLUTION):
        raise _fail(where, "needs at least one solution parameter")

    deps = _edges(params)
    solutions = {p.name for p in problem.of_kind(Kind.SOLUTION)}
    for p in params:
        for ref in sorted(deps[p.name]):
            if ref not in deps:
                raise _fail(where, f"parameter {p.name!r} references undeclared name {ref!r}")
            if ref in solutions and p.kind is not Kind.SOLUTION:
                raise _fail(
                    where,
                    f"{p.kind.value} parameter {p.name!r} may not reference solution {ref!r}",
                )
    cycle = _find_cycle(deps, names)
    if cycle:
        raise _fail(where, f"dependency cycle: {' -> '.join(cycle)}")

    types: dict[str, VType] = {}
    for p in params:
        if p.kind is Kind.INDEPENDENT:
            types[p.name] = VType.RATIONAL if isinstance(p.values[0], Fraction) else VType.TEXT
    for name in dependency_order(problem):
        p = problem.param(name)
        if p.kind is Kind.INDEPENDENT:
            continue
        local: list[str] = []
        try:
            t = type_check(p.ast, types, local)
        except ExprError as exc:
            raise _fail(where, f"parameter {name!r}: {exc}") from None
        boolean = p.kind in (Kind.CONDITIONAL, Kind.FLAG)
        if boolean and t is not VType.BOOL:
            raise _fail(where, f"{p.kind.value} {name!r} must be boolean, got {t.value}")
        if not boolean and t is VType.BOOL:
            raise _fail(where, f"{p.kind.value} {name!r} must be a value, got bool")
        types[name] = t
        warnings.extend(f"{where}, parameter {name!r}: {w}" for w in local)
        if p.kind is Kind.CONDITIONAL and uses_real(p.ast, types):
            warnings.append(
                f"{where}, conditional {name!r} uses approximate reals; "
                "prefer exact rational conditions"
            )

    for label, text in (("template", problem.template_text), ("solution template", problem.solution_template_text)):
        if text is None:
            continue
        try:
            holes = placeholders(text)
        except RenderError as exc:
            raise _fail(where, f"{label}: {exc}") from None
        for h in holes:
            if h.name not in types:
                raise _fail(where, f"{label} placeholder {{{{{h.name}}}}} names no parameter")
            t = types[h.name]
            kind = h.fmt.kind
            if kind in ("raw", "frac") and t is not VType.RATIONAL:
                raise _fail(where, f"{label}: format {h.fmt} needs an exact number, {h.name!r} is {t.value}")
            if kind in ("dec", "sci") and not t.numeric:
                raise _fail(where, f"{label}: format {h.fmt} needs a number, {h.name!r} is {t.value}")
    object.__setattr__(problem, "types", types)
    return problem


TemplateLoader = Callable[[str], str]


def parse_manifest(
    manifest_bytes: bytes | str,
    template_loader: TemplateLoader,
    *,
    manifest_path: str | None = None,
    template_dir: str | None = None,
) -> ExamBundle:
    """Parse and fully validate an exam manifest.

    JSON numbers are accepted as well as numeric strings; either way the
    source token text is converted straight to an exact rational.
    """
    if isinstance(manifest_bytes, bytes):
        try:
            text = manifest_bytes.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ManifestError(f"manifest is not UTF-8: {exc}") from None
    else:
        text = manifest_bytes
    try:
        doc = json.loads(text, parse_int=str, parse_float=str)
    except json.JSONDecodeError as exc:
        raise ManifestError(
            f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None

    _check_keys(doc, _TOP_KEYS, "manifest")
    title = doc.get("title", "")
    if not isinstance(title, str):
        raise ManifestError("manifest: 'title' must be a string")
    raw_problems = doc.get("problems")
    if not isinstance(raw_problems, list) or not raw_problems:
        raise ManifestError("manifest: 'problems' must be a nonempty list")

    warnings: list[str] = []
    problems: list[ProblemSkeleton] = []
    seen_ids: set[str] = set()
    for i, raw in enumerate(raw_problems):
        where = f"problems[{i}]"
        _check_keys(raw, _PROBLEM_KEYS, where)
        pid = _require_str(raw, "id", where)
        if not IDENT_RE.fullmatch(pid):
            raise _fail(where, f"problem id {pid!r} is not an identifier")
        if pid in seen_ids:
            raise _fail(where, f"duplicate problem id {pid!r}")
        seen_ids.add(pid)
        where = f"problem {pid!r}"
        tname = _require_str(raw, "template", where)
        sname = raw.get("solution_template")
        if sname is not None and (not isinstance(sname, str) or not sname):
            raise _fail(where, "'solution_template' must be a nonempty string")
        raw_params = raw.get("parameters")
        if not isinstance(raw_params, list) or not raw_params:
            raise _fail(where, "'parameters' must be a nonempty list")
        params = tuple(
            _parse_param(rp, f"{where}, parameters[{j}]") for j, rp in enumerate(raw_params)
        )
        try:
            ttext = template_loader(tname)
            stext = template_loader(sname) if sname else None
        except OSError as exc:
            raise _fail(where, f"cannot read template: {exc}") from None
        problem = ProblemSkeleton(pid, ttext, stext, params, tname, sname)
        problems.append(_validate_problem(problem, where, warnings))

    return ExamBundle(
        title,
        tuple(problems),
        manifest_path=manifest_path,
        template_dir=template_dir,
        warnings=tuple(warnings),
    )


def load_bundle(path: str | Path) -> ExamBundle:
    """Read ``exam.json`` and its sidecar templates from disk."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    base = path.parent

    def loader(name: str) -> str:
        return (base / name).read_text(encoding="utf-8")

    return parse_manifest(data, loader, manifest_path=str(path), template_dir=str(base))


def dump_manifest(bundle: ExamBundle) -> tuple[str, dict[str, str]]:
    """Canonical manifest JSON plus the template files it names."""
    templates: dict[str, str] = {}
    problems = []
    for prob in bundle.problems:
        tname = prob.template_name or f"{prob.id}.tmpl"
        templates[tname] = prob.template_text
        entry: dict = {"id": prob.id, "template": tname}
        if prob.solution_template_text is not None:
            sname = prob.solution_template_name or f"{prob.id}.sol.tmpl"
            templates[sname] = prob.solution_template_text
            entry["solution_template"] = sname
        params = []
        for p in prob.parameters:
            item: dict = {"name": p.name, "kind": p.kind.value}
            if p.kind is Kind.INDEPENDENT:
                item["values"] = [canonical(v) for v in p.values]
            else:
                item["expr"] = to_source(p.ast)
            if p.message is not None:
                item["message"] = p.message
            params.append(item)
        entry["parameters"] = params
        problems.append(entry)
    doc = {"title": bundle.title, "problems": problems}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n", templates


# -- roster ------------------------------------------------------------------


def parse_roster(text: str) -> Roster:
    """Roster CSV with header ``student_id,display_name`` (name optional)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or "student_id" not in reader.fieldnames:
        raise ManifestError("roster CSV needs a 'student_id' header column")
    students = []
    for line, row in enumerate(reader, start=2):
        sid = (row.get("student_id") or "").strip()
        if not sid:
            raise ManifestError(f"roster line {line}: empty student_id")
        students.append(Student(sid, (row.get("display_name") or "").strip()))
    return Roster(tuple(students))


def load_roster(path: str | Path) -> Roster:
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise ManifestError(f"cannot read roster {path}: {exc}") from None
    return parse_roster(text)
