#!/usr/bin/env python3
"""Run the gridbatch CLI on the shipped fixtures and validate every artifact
against the JSON schemas and CSV column lists in schemas/."""

import argparse
import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema


def run(cli, *args, expect=0):
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(f"{' '.join(args)}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return proc.stdout


def check_json(text, schema, what):
    doc = json.loads(text)
    jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    print(f"ok  {what}")
    return doc


def check_csv(path_or_text, columns, what, is_text=False):
    lines = path_or_text.splitlines() if is_text else Path(path_or_text).read_text().splitlines()
    rows = list(csv.reader(lines))
    if rows[0] != columns:
        raise AssertionError(f"{what}: header {rows[0]} != {columns}")
    for row in rows[1:]:
        if len(row) != len(columns):
            raise AssertionError(f"{what}: row {row} has {len(row)} fields")
    print(f"ok  {what} ({len(rows) - 1} rows)")
    return [dict(zip(columns, r)) for r in rows[1:]]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schemas", required=True, type=Path)
    ap.add_argument("--data", required=True, type=Path)
    ap.add_argument("--workdir", required=True, type=Path)
    a = ap.parse_args()
    a.workdir.mkdir(parents=True, exist_ok=True)

    schema = {n: json.loads((a.schemas / f"{n}.schema.json").read_text())
              for n in ("report", "transmission", "distribution", "verify")}
    columns = json.loads((a.schemas / "csv_columns.json").read_text())
    tx = str(a.data / "transmission" / "case118.m")
    dist = str(a.data / "distribution" / "ieee13.json")

    for case, kind in ((tx, "tx"), (dist, "dist")):
        rep = check_json(run(a.cli, "solve", "--case", case, "--batch", "3", "--seed", "7", "-q"),
                         schema["report"], f"report {kind}")
        assert rep["count"] == len(rep["scenarios"]) == len(rep["solutions"]) == 3
        assert len(rep["elements"]) == len(rep["solutions"][0]["vm"])
        assert rep["aggregate"]["n_converged"] == 3

        summary = check_json(run(a.cli, "solve", "--case", case, "--batch", "3", "--summary-only", "-q"),
                             schema["report"], f"summary report {kind}")
        assert "solutions" not in summary

        out = a.workdir / f"{kind}.csv"
        run(a.cli, "solve", "--case", case, "--batch", "3", "--format", "csv", "--out", str(out), "-q")
        recs = check_csv(out, columns["records"], f"records csv {kind}")
        assert all(r["converged"] in ("0", "1") and math.isfinite(float(r["residual"])) for r in recs)
        sols = check_csv(a.workdir / f"{kind}_solutions.csv", columns["solutions"], f"solutions csv {kind}")
        assert len(sols) == 3 * len(rep["elements"])

        bench = check_csv(run(a.cli, "bench", "--case", case, "--sizes", "1,2", "--workers", "1", "-q"),
                          columns["bench"], f"bench csv {kind}", is_text=True)
        assert [int(r["batch"]) for r in bench] == [1, 2]

        check_json(run(a.cli, "verify", "--case", case, "--format", "json"), schema["verify"], f"verify {kind}")

    check_json(run(a.cli, "verify", "--case", dist, "--oracle", "--batch", "2", "--format", "json"),
               schema["verify"], "verify dist oracle")
    failed = check_json(run(a.cli, "verify", "--case", dist, "--threshold", "0", "--format", "json", expect=2),
                        schema["verify"], "verify failing threshold")
    assert failed["pass"] is False

    for rel, name in (("transmission/case118.m", "transmission"), ("transmission/case1354pegase.m", "transmission"),
                      ("transmission/gb2224.m", "transmission"), ("distribution/ieee13.json", "distribution"),
                      ("distribution/ieee123.json", "distribution"), ("distribution/eulv.json", "distribution")):
        check_json(run(a.cli, "convert", "--case", str(a.data / rel)), schema[name], f"convert {rel}")
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except (AssertionError, jsonschema.ValidationError, json.JSONDecodeError) as e:
        print(f"FAIL {e}", file=sys.stderr)
        sys.exit(1)
