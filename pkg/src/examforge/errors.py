"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class ExamForgeError(Exception):
    """Base class for all errors raised by examforge."""


class ManifestError(ExamForgeError):
    """The exam bundle is malformed or fails structural validation."""


class ExprError(ExamForgeError):
    """Base class for expression-language errors.

    ``pos`` is the 0-based character offset into the expression source,
    or ``None`` when no single location applies.
    """

    def __init__(self, message: str, pos: int | None = None):
        self.message = message
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at offset {pos})")


class ExprSyntaxError(ExprError):
    pass


class ExprTypeError(ExprError):
    pass


class EvalError(ExprError):
    pass


class GenerationError(ExamForgeError):
    """An expression failed while enumerating a problem's variants."""

    def __init__(self, problem_id: str, index: int, parameter: str, cause: Exception):
        self.problem_id = problem_id
        self.index = index
        self.parameter = parameter
        self.cause = cause
        super().__init__(
            f"problem {problem_id!r}, variant {index}, parameter {parameter!r}: {cause}"
        )


class CapExceededError(ExamForgeError):
    def __init__(self, problem_id: str, raw: int, cap: int):
        self.problem_id = problem_id
        self.raw = raw
        self.cap = cap
        super().__init__(
            f"problem {problem_id!r} has {raw} combinations, above the cap of {cap}"
        )


class InsufficientVariantsError(ExamForgeError):
    def __init__(self, problem_id: str, usable: int, needed: int):
        self.problem_id = problem_id
        self.usable = usable
        self.needed = needed
        self.shortfall = needed - usable
        super().__init__(
            f"problem {problem_id!r} has {usable} usable variants for {needed} "
            f"students (shortfall {self.shortfall})"
        )


class AssignmentError(ExamForgeError):
    pass


class RenderError(ExamForgeError):
    pass


class OutputExistsError(ExamForgeError):
    pass


class ForensicsError(ExamForgeError):
    pass
