"""
Tracing a leaked problem
========================

Someone posts one problem from their exam. The numbers in it are matched
against the variants actually handed out.
"""

import tempfile
from pathlib import Path

from examforge import generate, load_bundle
from examforge.bundles import bundle_path
from examforge.forensics import LeakQuery, extract_values, identify
from examforge.manifest import Roster, Student
from examforge.store import load_artifacts

bundle = load_bundle(bundle_path("binomial"))
roster = Roster(tuple(Student(f"stu{i:03d}", "") for i in range(120)))
out = Path(tempfile.mkdtemp()) / "quiz"
generate(bundle, roster, b"instructor-only", out)

db, table, _ = load_artifacts(out)
victim = table.rows[17]
posted = (out / "exams" / f"{victim.token}.tex").read_text()
print(posted)

observed = extract_values(posted)
print("numbers in the post:", observed)

result = identify(LeakQuery(tuple(observed), from_snippet=True), db.variants, table, db.constants)
print(result.verdict, result.student, "(really", victim.student_id + ")")
for c in result.candidates[:3]:
    print(" ", c.student_id, c.matched_count, round(c.discrimination_score, 2), c.matched_values)

# A partial post (just the class size) narrows things down but proves nothing
partial = identify(LeakQuery((observed[0],)), db.variants, table)
print(partial.verdict, partial.n_candidates, "candidates")
