import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semilinear_ast.action import TriplePartition
from semilinear_ast.artifact import (
    MAGIC,
    ArtifactError,
    from_bytes,
    read_artifact,
    rle_decode,
    rle_encode,
    to_bytes,
    write_artifact,
)
from semilinear_ast.cli import EXIT_IO, EXIT_MISMATCH, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, EXIT_VERIFY, main
from semilinear_ast.report import CSV_COLUMNS, SCHEMA_VERSION

from conftest import SMALL, ids, partition, spec


def flags(p, a, w, k, *extra):
    return ["-p", str(p), "-a", str(a), "-w", str(w), "-k", str(k), *extra]


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------------
# artifacts


@settings(max_examples=50)
@given(st.lists(st.integers(0, 5), max_size=200))
def test_rle_round_trip(xs):
    flat = np.asarray(xs, dtype=np.uint8)
    values, lengths = rle_encode(flat)
    assert np.array_equal(rle_decode(values, lengths), flat)
    assert np.all(values[1:] != values[:-1])


@pytest.mark.parametrize("m", SMALL + [(3, 2, 1, 2)], ids=ids)
@pytest.mark.parametrize("variant", ["asl", "agl"])
def test_artifact_round_trip(m, variant, tmp_path):
    s, P = spec(*m, variant), partition(*m, variant)
    path = tmp_path / "x.ast"
    write_artifact(path, s, P)
    s2, P2 = read_artifact(path)
    assert (s2.variant, s2.k, s2.tower.p, s2.tower.alpha, s2.tower.omega) == (variant, *m[3:], *m[:3])
    assert P2.labels.tobytes() == P.labels.tobytes()
    assert path.read_bytes()[:4] == MAGIC


def test_corrupted_artifacts():
    data = to_bytes(spec(3, 1, 1, 2), partition(3, 1, 1, 2))
    with pytest.raises(ArtifactError, match="magic"):
        from_bytes(b"XXXX" + data[4:])
    with pytest.raises(ArtifactError, match="truncated"):
        from_bytes(data[:10])
    with pytest.raises(ArtifactError, match="truncated"):
        from_bytes(data[:-3])
    with pytest.raises(ArtifactError, match="trailing"):
        from_bytes(data + b"\0")
    bad = bytearray(data)
    bad[20] = 7  # variant byte
    with pytest.raises(ArtifactError, match="variant"):
        from_bytes(bytes(bad))
    # change one class size
    off = 21 + 4 + 4 * 2 + 4
    bad = bytearray(data)
    bad[off] ^= 1
    with pytest.raises(ArtifactError, match="class sizes"):
        from_bytes(bytes(bad))
    # change a polynomial coefficient
    bad = bytearray(data)
    bad[25] ^= 1
    with pytest.raises(ArtifactError, match="polynomial"):
        from_bytes(bytes(bad))


# ---------------------------------------------------------------------------
# commands and exit codes


def test_build_and_verify(capsys, tmp_path):
    path = tmp_path / "a.ast"
    code, out, _ = run(capsys, ["build", *flags(3, 1, 1, 2), "-o", str(path), "--oracle"])
    assert code == EXIT_OK
    assert "classes=7" in out and "oracle=equal" in out
    summary = json.loads((tmp_path / "a.ast.json").read_text())
    assert summary["summary"]["nontrivial"] == 3
    code, out, _ = run(capsys, ["verify", str(path)])
    assert code == EXIT_OK
    assert out.count("PASS") == 4


def test_build_default_path(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["build", *flags(2, 1, 1, 2)]) == EXIT_OK
    assert (tmp_path / "ast-asl-2-1-1-2.ast").exists()


def test_verify_from_flags_with_oracle(capsys):
    code, out, _ = run(capsys, ["verify", *flags(2, 2, 1, 2), "--oracle", "--format", "json"])
    assert code == EXIT_OK
    doc = json.loads(out)
    conds = {c["condition"]: c for c in doc["verification"]["conditions"]}
    assert conds["oracle_equivalence"]["passed"] and conds["oracle_equivalence"]["detail"] == "equal"
    assert doc["summary"] == {"regularity": "full", "passed": True}


def test_verify_failure_exits_2(capsys, tmp_path):
    s, P = spec(2, 2, 1, 2), partition(2, 2, 1, 2)
    L = P.labels.copy()
    L[tuple(np.argwhere(L == 4)[0])] = 5
    path = tmp_path / "bad.ast"
    write_artifact(path, s, TriplePartition(L))
    code, out, _ = run(capsys, ["verify", str(path), "--format", "csv"])
    assert code == EXIT_VERIFY
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["passed"] for r in rows] == ["True", "False", "False", "False"]
    assert json.loads(rows[1]["witness"])["pair"]


def test_params(capsys):
    code, out, _ = run(capsys, ["params", *flags(2, 2, 1, 2), "--format", "json"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [r["valencies"][2] for r in doc["relations"][4:]] == [2, 4, 8]
    assert doc["summary"]["nontrivial_n3_sum"] == 14
    assert all(set(e) == {"i", "j", "k", "l", "p", "names"} for e in doc["intersection"])


def test_crosscheck_exit_codes(capsys):
    code, out, _ = run(capsys, ["crosscheck", *flags(2, 2, 1, 2), "--format", "json"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["summary"]["clean"] and not doc["summary"]["strict_clean"]
    assert doc["oracles"] == {"representative": "ok", "full_class": "agree"}
    code, _, _ = run(capsys, ["crosscheck", *flags(2, 2, 1, 2), "--strict"])
    assert code == EXIT_MISMATCH
    code, _, _ = run(capsys, ["crosscheck", *flags(2, 2, 2, 2), "--strict"])
    assert code == EXIT_OK


def test_compare(capsys, tmp_path):
    code, out, _ = run(capsys, ["compare", *flags(2, 2, 1, 3), "--format", "json"])
    assert code == EXIT_OK and json.loads(out)["comparison"]["verdict"] == "equal"
    code, out, _ = run(capsys, ["compare", *flags(2, 2, 1, 2)])
    assert code == EXIT_OK and "a_refines_b" in out
    code, out, _ = run(capsys, ["compare", *flags(2, 2, 1, 2), "--variant-b", "asl", "--omega-b", "2"])
    assert "b_refines_a" in out
    a, b = tmp_path / "a.ast", tmp_path / "b.ast"
    write_artifact(a, spec(2, 1, 1, 3), partition(2, 1, 1, 3))
    write_artifact(b, spec(2, 1, 1, 3, "agl"), partition(2, 1, 1, 3, "agl"))
    code, out, _ = run(capsys, ["compare", str(a), str(b)])
    assert code == EXIT_OK and "verdict: equal" in out
    # different vector spaces
    write_artifact(b, spec(3, 1, 1, 2), partition(3, 1, 1, 2))
    code, _, err = run(capsys, ["compare", str(a), str(b)])
    assert code == EXIT_USAGE


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["build", *flags(4, 1, 1, 2)], EXIT_USAGE),
        (["build", *flags(2, 3, 2, 2)], EXIT_USAGE),
        (["build", "-p", "2", "-k", "2"], EXIT_USAGE),
        (["build", *flags(2, 1, 1, 1)], EXIT_USAGE),
        (["crosscheck", *flags(2, 1, 1, 2), "--variant", "agl"], EXIT_USAGE),
        (["build", *flags(2, 1, 1, 2), "--workers", "0"], EXIT_USAGE),
        (["compare", "only-one.ast"], EXIT_USAGE),
        (["build", *flags(2, 4, 1, 3)], EXIT_RESOURCE),
        (["build", *flags(2, 1, 1, 3), "--max-domain", "4"], EXIT_RESOURCE),
        (["verify", *flags(3, 2, 1, 2), "--oracle"], EXIT_RESOURCE),
        (["verify", "does-not-exist.ast"], EXIT_IO),
    ],
)
def test_exit_codes(argv, expected, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run(capsys, argv)
    assert code == expected
    assert err


def test_argparse_errors_exit_1(capsys):
    for argv in (["frobnicate"], ["build", "-p", "x"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_USAGE
    capsys.readouterr()


def test_corrupted_artifact_exits_io(capsys, tmp_path):
    path = tmp_path / "c.ast"
    path.write_bytes(b"AST1garbage")
    code, _, err = run(capsys, ["verify", str(path)])
    assert code == EXIT_IO and "truncated" in err


def test_unwritable_output_exits_io(capsys, tmp_path):
    code, _, _ = run(capsys, ["build", *flags(2, 1, 1, 2), "-o", str(tmp_path / "missing" / "x.ast")])
    assert code == EXIT_IO


# ---------------------------------------------------------------------------
# formats


@pytest.mark.parametrize("command", ["build", "params", "verify", "crosscheck", "compare"])
def test_json_schema_and_csv_columns(command, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    base = [command, *flags(3, 1, 1, 2)]
    code, out, _ = run(capsys, base + ["--format", "json"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schema_version"] == SCHEMA_VERSION
    assert set(doc["spec"]) == {"p", "alpha", "omega", "k", "variant", "n", "q", "polynomial", "domain_size"}
    assert "seed" not in out and "workers" not in out
    section = {"build": "relations", "params": "intersection", "verify": "verification",
               "crosscheck": "crosscheck", "compare": "comparison"}[command]
    assert section in doc
    code, out, _ = run(capsys, base + ["--format", "csv"])
    assert code == EXIT_OK
    assert out.splitlines()[0].split(",") == CSV_COLUMNS[command]
    code, out, _ = run(capsys, base + ["--format", "text"])
    assert code == EXIT_OK and out.startswith("ASL_H(2,3)")


def test_relation_rows_carry_elements(capsys):
    code, out, _ = run(capsys, ["params", *flags(2, 2, 1, 2), "--format", "json"])
    rows = json.loads(out)["relations"]
    assert [r["name"] for r in rows] == ["R0", "R1", "R2", "R3", "R^2", "^1R", "^2R"]
    assert rows[4]["element"] == 2 and rows[4]["poly"]


def test_output_file(capsys, tmp_path):
    path = tmp_path / "p.csv"
    assert main(["params", *flags(2, 1, 1, 2), "--format", "csv", "-o", str(path)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert path.read_text().startswith("table,id,name")


def test_plots(capsys, tmp_path):
    assert main(["params", *flags(2, 2, 1, 2), "--plot", str(tmp_path / "fig")]) == EXIT_OK
    assert main(["crosscheck", *flags(2, 2, 1, 2), "--plot", str(tmp_path / "fig")]) == EXIT_OK
    capsys.readouterr()
    names = sorted(p.name for p in (tmp_path / "fig").iterdir())
    assert names == ["crosscheck-asl-2-2-1-2.png", "valencies-asl-2-2-1-2.png"]
    assert all((tmp_path / "fig" / n).read_bytes()[:4] == b"\x89PNG" for n in names)


# ---------------------------------------------------------------------------
# determinism


@pytest.mark.parametrize("m", [(2, 2, 1, 2), (2, 1, 1, 3)], ids=ids)
def test_outputs_identical_across_workers_and_seed(m, capsys, tmp_path):
    outs = []
    for workers, seed in [("1", "1"), ("3", "99")]:
        d = tmp_path / workers
        d.mkdir()
        run(capsys, ["build", *flags(*m), "--workers", workers, "-o", str(d / "a.ast")])
        reports = [(d / "a.ast").read_bytes(), (d / "a.ast.json").read_bytes()]
        for cmd in ("verify", "params", "crosscheck"):
            for fmt in ("json", "csv"):
                _, out, _ = run(capsys, [cmd, *flags(*m), "--workers", workers, "--seed", seed,
                                         "--regularity", "sampled", "--format", fmt])
                reports.append(out)
        outs.append(reports)
    assert outs[0] == outs[1]


def test_k3_asl_agl_artifacts_share_payload(tmp_path, capsys):
    a, b = tmp_path / "a.ast", tmp_path / "b.ast"
    assert main(["build", *flags(2, 1, 1, 3), "-o", str(a)]) == EXIT_OK
    assert main(["build", *flags(2, 1, 1, 3), "--variant", "agl", "-o", str(b)]) == EXIT_OK
    capsys.readouterr()
    da, db = a.read_bytes(), b.read_bytes()
    # only the variant byte differs
    assert len(da) == len(db)
    assert [i for i in range(len(da)) if da[i] != db[i]] == [20]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "semilinear_ast", "params", *flags(2, 1, 1, 2)],
                         capture_output=True, text=True, cwd=tmp_path)
    assert res.returncode == 0
    assert res.stdout.startswith("ASL_H(2,2)")
