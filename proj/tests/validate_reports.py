"""Runs every CLI command once and validates each envelope against the schema."""

import json
import os
import subprocess
import sys

import jsonschema


def main():
    cli, schema_path, work = sys.argv[1:4]
    os.makedirs(work, exist_ok=True)
    with open(schema_path) as fh:
        schema = json.load(fh)
    validator = jsonschema.Draft202012Validator(schema)

    catalog = os.path.join(work, "catalog.json")
    data = os.path.join(work, "data.csv")
    runs = {
        "catalog": ["catalog", "--out", catalog],
        "selection": ["experiment", "selection", "--n", "200,400", "--reps", "3", "--seed", "1"],
        "coverage": ["experiment", "coverage", "--dgp", "correlated", "--n", "300", "--reps", "100",
                     "--seed", "2"],
        "rate": ["experiment", "rate", "--dgp", "null-f", "--n", "128,256,512,1024", "--reps", "2",
                 "--seed", "3"],
        "sigma": ["experiment", "sigma", "--n", "200,400", "--reps", "2", "--seed", "4"],
    }
    failures = 0
    envelopes = {}
    for name, args in runs.items():
        out = os.path.join(work, name + ".json")
        if "--out" not in args:
            args = args + ["--out", out]
        proc = subprocess.run([cli] + args, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{name}: exit {proc.returncode}: {proc.stderr}")
            failures += 1
            continue
        with open(out) as fh:
            envelopes[name] = json.load(fh)

    # A small CSV for fit/select, built from a generated design.
    with open(data, "w") as fh:
        fh.write("t,y,x1,x2\n")
        for i in range(300):
            t = (i + 0.5) / 300
            x1 = ((i * 37) % 101) / 50.0 - 1.0
            x2 = ((i * 53) % 97) / 48.0 - 1.0 + 0.2 * t
            y = 1.5 * x1 + (0.5 if t < 0.5 else -0.5) + 0.1 * (((i * 71) % 89) / 44.0 - 1.0)
            fh.write(f"{t},{y},{x1},{x2}\n")
    base = ["--csv", data, "--y", "y", "--t", "t"]
    for name, args in {
        "fit": ["fit"] + base + ["--i0", "x1", "--K", "4"],
        "select": ["select"] + base + ["--case", "full"],
        "select_case3": ["select"] + base + ["--case", "case3", "--a", "0.1"],
    }.items():
        proc = subprocess.run([cli] + args, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{name}: exit {proc.returncode}: {proc.stderr}")
            failures += 1
            continue
        envelopes[name] = json.loads(proc.stdout)

    for name, env in envelopes.items():
        errors = sorted(validator.iter_errors(env), key=lambda e: list(e.path))
        for err in errors[:5]:
            print(f"{name}: {'/'.join(map(str, err.path))}: {err.message}")
        failures += 1 if errors else 0
        print(f"{name}: {'ok' if not errors else 'INVALID'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
