"""
How many exams can a skeleton produce?
======================================

Enumerate every combination of independent values, drop the ones that
fail a conditional and count the flagged ones.
"""

from examforge import build_report, enumerate_bundle, load_bundle
from examforge.bundles import bundle_path
from examforge.generator import FAILED
from examforge.values import canonical

bundle = load_bundle(bundle_path("binomial"))
variants = enumerate_bundle(bundle)
print(build_report(bundle, variants).to_table())

# Which combinations failed? All of them have the smaller class at n2 = 50
# with a low success probability, so the normal approximation is poor.
failed = [b for b in variants["binomial"] if b.status == FAILED]
print(sorted({(str(b.values["n2"]), str(b.values["p2"])) for b in failed}))

# Equal probabilities are legal but make the wording odd; they are flagged
flagged = [b for b in variants["binomial"] if b.flags]
print(len(flagged), "flagged, e.g.", {k: canonical(v) for k, v in flagged[0].values.items()})

# Excluding them shrinks the pool
print("usable without flagged:", build_report(bundle, variants, exclude_flagged=True).usable)
