"""
One exam per student
====================

The four-problem case-study bundle, a roster of 361 students and a secret.
Everything lands in a temporary directory.
"""

import tempfile
from pathlib import Path

from examforge import generate, load_bundle
from examforge.bundles import bundle_path
from examforge.manifest import Roster, Student

bundle = load_bundle(bundle_path("casestudy"))
roster = Roster(tuple(Student(f"stu{i:03d}", f"Student {i}") for i in range(361)))

out = Path(tempfile.mkdtemp()) / "midterm"
result = generate(bundle, roster, b"keep-this-out-of-git", out)
print(len(result.files), "files written to", out)

row = result.table.rows[0]
print(row.student_id, row.token, dict(row.indices))
print((out / "exams" / f"{row.token}.tex").read_text()[:400])

key = (out / "answer_key.csv").read_text().splitlines()
print(key[0])
print(*key[1:5], sep="\n")

# Same inputs, same bytes; the roster order does not matter either
again = generate(bundle, Roster(tuple(reversed(roster.students))), b"keep-this-out-of-git",
                 out, force=True)
print("identical assignment:", again.table == result.table)
