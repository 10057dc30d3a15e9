"""Every report the CLI writes validates against docs/report.schema.json."""
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

import jsonschema

cli, schema_path, bench_dir = sys.argv[1:4]
schema = json.loads(pathlib.Path(schema_path).read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)


def run(*args):
    p = subprocess.run([cli, *args], capture_output=True, text=True)
    doc = json.loads(p.stdout)
    validator.validate(doc)
    return p.returncode, doc


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    for f in pathlib.Path(bench_dir).glob("*.qil"):
        shutil.copy(f, tmp / f.name)
    (tmp / "broken.qil").write_text("fn broken(")
    (tmp / "illtyped.qil").write_text("fn f(R: rel(a:int)) { var n: int = 0; n = R; return n; }")
    (tmp / "ones.qil").write_text(
        "fn ones(R: rel(a:int)) { var out: list(a:int); for i in 0..size(R) { out.append({a: 1}); } return out; }")

    code, summary = run("bench", str(tmp), "--cases", "200")
    assert code == 1, code
    assert summary["benchmarks"] == len(summary["reports"]) == 15
    assert summary["synthesized"] + summary["failed"] + summary["errors"] == summary["benchmarks"]
    assert (summary["synthesized"], summary["failed"], summary["errors"]) == (12, 1, 2)

    code, report = run("synth", str(tmp / "count.qil"), "--timing", "--jobs", "2")
    assert code == 0 and isinstance(report["stats"]["wallSeconds"], float)
    code, report = run("synth", str(tmp / "joinselproj.qil"), "--timeout", "0.000001")
    assert code == 2 and report["reason"] == "timeout"
    code, report = run("synth", str(tmp / "missing.qil"))
    assert code == 1 and report["error"]["kind"] == "io"

print("all reports validate")
