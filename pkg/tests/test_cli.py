import json
from pathlib import Path

import pytest

from examforge.bundles import bundle_path
from examforge.cli import main
from examforge.generator import fingerprint
from examforge.store import load_artifacts

from conftest import roster_csv

SECRET = "correct-horse-battery-7731"


def write_bundle(root: Path, params, template="{{x}}") -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "p.tmpl").write_text(template)
    doc = {"title": "t", "problems": [{"id": "p", "template": "p.tmpl", "parameters": params}]}
    (root / "exam.json").write_text(json.dumps(doc))
    return root / "exam.json"


@pytest.fixture
def secret_file(tmp_path):
    path = tmp_path / "secret.txt"
    path.write_text(SECRET + "\n")
    return path


@pytest.fixture
def roster(tmp_path):
    def make(n):
        path = tmp_path / f"roster{n}.csv"
        path.write_text(roster_csv(n))
        return path
    return make


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# -- validate --------------------------------------------------------------------


def test_validate_joint_pdf(capsys):
    code, out, _ = cli(capsys, "validate", bundle_path("joint_pdf"))
    assert code == 0
    assert "1 problem, 81 raw variants" in out


def test_validate_cycle(capsys, tmp_path):
    path = write_bundle(tmp_path / "b", [
        {"name": "x", "kind": "independent", "values": ["1"]},
        {"name": "a", "kind": "dependent", "expr": "b + x"},
        {"name": "b", "kind": "dependent", "expr": "a"},
        {"name": "s", "kind": "solution", "expr": "a"},
    ])
    code, _, err = cli(capsys, "validate", path)
    assert code == 2
    assert "a -> b -> a" in err


def test_validate_first_combination_divides_by_zero(capsys, tmp_path):
    path = write_bundle(tmp_path / "b", [
        {"name": "x", "kind": "independent", "values": ["0", "1"]},
        {"name": "inv", "kind": "dependent", "expr": "1 / x"},
        {"name": "s", "kind": "solution", "expr": "inv"},
    ])
    code, _, err = cli(capsys, "validate", path)
    assert code == 2
    assert "inv" in err and "division by zero" in err


def test_validate_missing_file(capsys, tmp_path):
    assert cli(capsys, "validate", tmp_path / "nope.json")[0] == 2


# -- count ---------------------------------------------------------------------------


def test_count_binomial_json(capsys):
    code, out, _ = cli(capsys, "count", bundle_path("binomial"), "--format", "json")
    assert code == 0
    report = json.loads(out)["problems"]["binomial"]
    assert (report["raw"], report["valid"], report["flagged"]) == (420, 399, {"w1": 10})


def test_count_bit_trace(capsys):
    code, out, _ = cli(capsys, "count", bundle_path("bit_trace"), "--format", "json")
    report = json.loads(out)["problems"]["mystery"]
    assert code == 0 and (report["raw"], report["valid"]) == (128, 128)


def test_count_reports_min_usable(capsys):
    code, out, _ = cli(capsys, "count", bundle_path("casestudy"), "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["usable"] == min(p["valid"] for p in doc["problems"].values()) == 399


def test_count_table(capsys):
    code, out, _ = cli(capsys, "count", bundle_path("binomial"), "--exclude-flagged")
    assert code == 0 and "usable exams (flagged excluded): 389" in out


def test_count_cap(capsys):
    assert cli(capsys, "count", bundle_path("binomial"), "--cap", "100")[0] == 5


def test_count_evaluation_error_mid_enumeration(capsys, tmp_path):
    path = write_bundle(tmp_path / "b", [
        {"name": "x", "kind": "independent", "values": ["1", "0"]},
        {"name": "inv", "kind": "dependent", "expr": "1 / x"},
        {"name": "s", "kind": "solution", "expr": "inv"},
    ])
    assert cli(capsys, "validate", path)[0] == 0
    code, _, err = cli(capsys, "count", path)
    assert code == 4 and "inv" in err


# -- generate ---------------------------------------------------------------------------


def test_generate_casestudy_and_rerun(capsys, tmp_path, roster, secret_file):
    out = tmp_path / "out"
    args = ["generate", bundle_path("casestudy"), "--roster", roster(361),
            "--secret-file", secret_file, "--out", out]
    code, stdout, _ = cli(capsys, *args)
    assert code == 0 and "361 exams for 361 students" in stdout
    assert len(list((out / "exams").iterdir())) == 361
    first = {p: p.read_bytes() for p in out.rglob("*") if p.is_file()}
    assert cli(capsys, *args)[0] == 6
    assert cli(capsys, *args, "--force")[0] == 0
    assert {p: p.read_bytes() for p in out.rglob("*") if p.is_file()} == first


def test_generate_shortfall(capsys, tmp_path, roster, secret_file):
    code, out, err = cli(capsys, "generate", bundle_path("joint_pdf"), "--roster", roster(400),
                         "--secret-file", secret_file, "--out", tmp_path / "o", "--format", "json")
    assert code == 3
    doc = json.loads(out)
    assert doc["problem"] == "joint_pdf" and doc["shortfall"] == 319
    assert "joint_pdf" in err


def test_generate_needs_secret(capsys, tmp_path, roster, monkeypatch):
    monkeypatch.delenv("EXAMFORGE_SECRET", raising=False)
    code, _, err = cli(capsys, "generate", bundle_path("joint_pdf"), "--roster", roster(3),
                       "--out", tmp_path / "o")
    assert code == 2 and "secret" in err


def test_secret_is_not_an_argv_option(capsys):
    with pytest.raises(SystemExit):
        main(["generate", str(bundle_path("joint_pdf")), "--roster", "r", "--out", "o", "--secret", "x"])


def test_secret_from_environment(capsys, tmp_path, roster, monkeypatch, secret_file):
    monkeypatch.setenv("EXAMFORGE_SECRET", SECRET)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli(capsys, "generate", bundle_path("binomial"), "--roster", roster(5), "--out", a)[0] == 0
    monkeypatch.delenv("EXAMFORGE_SECRET")
    assert cli(capsys, "generate", bundle_path("binomial"), "--roster", roster(5), "--out", b,
               "--secret-file", secret_file)[0] == 0
    assert (a / "assignment.csv").read_bytes() == (b / "assignment.csv").read_bytes()


def test_no_secret_anywhere(capsys, tmp_path, roster, secret_file):
    out = tmp_path / "out"
    logs = []
    for args in (
        ["generate", bundle_path("casestudy"), "--roster", roster(30), "--out", out],
        ["generate", bundle_path("casestudy"), "--roster", roster(30), "--out", out],
        ["generate", bundle_path("joint_pdf"), "--roster", roster(100), "--out", tmp_path / "o2"],
    ):
        for fmt in ("table", "json"):
            cli_out = cli(capsys, *args, "--secret-file", secret_file, "--format", fmt)
            logs.extend(cli_out[1:])
    files = [p for p in out.rglob("*") if p.is_file()]
    assert files
    for p in files:
        assert SECRET.encode() not in p.read_bytes()
    assert all(SECRET not in text for text in logs)


def test_extend(capsys, tmp_path, roster, secret_file):
    out = tmp_path / "out"
    base = ["generate", bundle_path("binomial"), "--secret-file", secret_file, "--out", out]
    assert cli(capsys, *base, "--roster", roster(10))[0] == 0
    before = (out / "assignment.csv").read_text().splitlines()
    assert cli(capsys, *base, "--roster", roster(12), "--extend")[0] == 0
    after = (out / "assignment.csv").read_text().splitlines()
    assert len(after) == 13 and set(before) <= set(after)


# -- identify ---------------------------------------------------------------------------


@pytest.fixture
def joint_pdf_artifacts(tmp_path, roster, secret_file, capsys):
    out = tmp_path / "joint_pdfout"
    code = main(["generate", str(bundle_path("joint_pdf")), "--roster", str(roster(60)),
                 "--secret-file", str(secret_file), "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    return out


def test_identify_round_trip(capsys, joint_pdf_artifacts, tmp_path):
    db, table, _ = load_artifacts(joint_pdf_artifacts)
    prints = [
        sorted(fingerprint(db.variants["joint_pdf"][r.indices["joint_pdf"]])) for r in table.rows
    ]
    # a student whose value multiset no classmate shares
    row = next(r for r, fp in zip(table.rows, prints) if prints.count(fp) == 1)
    sid, token = row.student_id, row.token
    snippet = tmp_path / "leak.txt"
    snippet.write_text((joint_pdf_artifacts / "exams" / f"{token}.tex").read_text())
    code, out, _ = cli(capsys, "identify", "--artifacts", joint_pdf_artifacts, "--snippet", snippet,
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "unique_match" and doc["candidates"][0]["student_id"] == sid


def test_identify_ambiguous(capsys, joint_pdf_artifacts):
    code, out, _ = cli(capsys, "identify", "--artifacts", joint_pdf_artifacts, "--values", "1,2,3",
                       "--format", "json")
    assert code == 7
    doc = json.loads(out)
    assert doc["verdict"] == "ambiguous" and doc["n"] >= 2 and doc["candidates"]


def test_identify_no_match(capsys, joint_pdf_artifacts):
    code, out, _ = cli(capsys, "identify", "--artifacts", joint_pdf_artifacts, "--values", "999999")
    assert code == 8 and "no_match" in out


def test_identify_unreadable_artifacts(capsys, tmp_path):
    assert cli(capsys, "identify", "--artifacts", tmp_path, "--values", "1")[0] == 2


def test_identify_corrupt_artifacts(capsys, joint_pdf_artifacts):
    (joint_pdf_artifacts / "variants.json").write_text("{not json")
    code, out, _ = cli(capsys, "identify", "--artifacts", joint_pdf_artifacts, "--values", "1",
                       "--format", "json")
    assert code == 2 and json.loads(out)["exit_code"] == 2


# -- json everywhere -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["validate", bundle_path("binomial")],
        ["validate", "missing.json"],
        ["count", bundle_path("bit_trace")],
        ["count", bundle_path("binomial"), "--cap", "3"],
    ],
)
def test_json_output_parses(capsys, argv):
    _, out, _ = cli(capsys, *argv, "--format", "json")
    json.loads(out)


def test_json_output_parses_for_generate_and_identify(capsys, tmp_path, roster, secret_file):
    out = tmp_path / "o"
    for argv in (
        ["generate", bundle_path("binomial"), "--roster", roster(5), "--secret-file", secret_file, "--out", out],
        ["generate", bundle_path("binomial"), "--roster", roster(5), "--secret-file", secret_file, "--out", out],
        ["identify", "--artifacts", out, "--values", "200,0.45"],
        ["identify", "--artifacts", out, "--values", "0.45", "--problem", "nope"],
    ):
        _, stdout, _ = cli(capsys, *argv, "--format", "json")
        json.loads(stdout)
