"""Example exam bundles shipped with the package."""

from __future__ import annotations

from pathlib import Path

BUNDLE_DIR = Path(__file__).resolve().parent

NAMES = ("joint_pdf", "bit_trace", "binomial", "casestudy")


def bundle_path(name: str) -> Path:
    """Path to the ``exam.json`` of a bundled example."""
    if name not in NAMES:
        raise KeyError(f"no bundled exam {name!r}; choose from {', '.join(NAMES)}")
    return BUNDLE_DIR / name / "exam.json"
