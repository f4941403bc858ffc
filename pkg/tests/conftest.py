from __future__ import annotations

import pytest

from examforge.bundles import bundle_path
from examforge.manifest import Roster, Student, load_bundle


@pytest.fixture(scope="session")
def joint_pdf():
    return load_bundle(bundle_path("joint_pdf"))


@pytest.fixture(scope="session")
def bit_trace():
    return load_bundle(bundle_path("bit_trace"))


@pytest.fixture(scope="session")
def binomial():
    return load_bundle(bundle_path("binomial"))


@pytest.fixture(scope="session")
def casestudy():
    return load_bundle(bundle_path("casestudy"))


def make_roster(n: int, prefix: str = "s") -> Roster:
    return Roster(tuple(Student(f"{prefix}{i:04d}", f"Student {i}") for i in range(n)))


def roster_csv(n: int) -> str:
    return "student_id,display_name\n" + "".join(f"s{i:04d},Student {i}\n" for i in range(n))
