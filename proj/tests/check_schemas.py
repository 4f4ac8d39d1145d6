"""Run the CLI, validate every JSON document it prints against schemas/,
and check that `validate --kind` reads each one back."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}

try:
    from referencing import Registry, Resource

    registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())

    def validator(name):
        return jsonschema.Draft202012Validator(schemas[name], registry=registry)
except ImportError:  # older jsonschema
    def validator(name):
        resolver = jsonschema.RefResolver(base_uri="", referrer=schemas[name], store=schemas)
        return jsonschema.Draft202012Validator(schemas[name], resolver=resolver)

tmp = pathlib.Path(tempfile.mkdtemp(prefix="affpr_schema_"))
failures = 0


def run(*args, expect=0):
    r = subprocess.run([cli, *args], capture_output=True, text=True)
    if r.returncode != expect:
        raise SystemExit(f"{args}: exit {r.returncode}, stderr {r.stderr}")
    return r


def check(schema, text, kind=None):
    global failures
    doc = json.loads(text)
    errors = list(validator(schema + ".schema.json").iter_errors(doc))
    for e in errors:
        print(f"FAIL {schema}: {e.message}")
    failures += bool(errors)
    path = tmp / f"{schema}.json"
    path.write_text(text)
    if kind:
        again = run("validate", "--in", str(path), "--kind", kind)
        check("validation", again.stdout)
    return path


ens = check("ensemble", run("construct", "--kind", "real-minimal", "--d", "2").stdout, "ensemble")
cens = check("ensemble", run("construct", "--kind", "generic", "--field", "complex", "--m", "8", "--d", "2", "--seed", "3").stdout)
pens = check("ensemble", run("construct", "--kind", "perturbation-base", "--field", "complex", "--d", "2").stdout)
sig = tmp / "x.json"
sig.write_text(json.dumps({"field": "complex", "d": 2, "entries": [[0.5, -1.0], [2.0, 0.25]]}))
check("signal", sig.read_text(), "signal")
mags = check("magnitudes", run("measure", "--in", str(cens), "--signal", str(sig)).stdout, "magnitudes")
check("recovery", run("recover", "--in", str(cens), "--mags", str(mags), "--seed", "1").stdout, "recovery")
check("verdict", run("certify", "--in", str(ens)).stdout, "verdict")
check("verdict", run("certify", "--in", str(pens)).stdout, "verdict")
check("verdict", run("falsify", "--in", str(cens), "--restarts", "4").stdout, "verdict")
check("perturbation", run("perturb", "--kind", "real", "--d", "2", "--delta", "0.1").stdout, "perturbation")
check("perturbation", run("perturb", "--kind", "complex", "--d", "2", "--delta", "0.1").stdout, "perturbation")
sub = tmp / "sub.json"
sub.write_text(run("construct", "--kind", "generic", "--m", "2", "--d", "3", "--seed", "1").stdout)
check("sparse_verdict", run("sparse-certify", "--in", str(sub), "--s", "1").stdout, "sparse-verdict")
check("lipschitz", run("stability", "--in", str(ens), "--pairs", "50", "--seed", "1").stdout, "lipschitz")
pairs = tmp / "pairs.json"
pairs.write_text(json.dumps({"pairs": [[1, 0], [2, 3]]}))
check("shift_pairs", pairs.read_text(), "shift-pairs")
triples = tmp / "triples.json"
triples.write_text(json.dumps({"triples": [[[0, 0], [1, 0], [0, 1]]], "B": [[[2, 0]]]}))
check("shift_triples", triples.read_text(), "shift-triples")
check("error", run("construct", "--kind", "real-minimal", "--d", "0", expect=1).stderr)

print("schema check:", "FAILED" if failures else "ok")
sys.exit(1 if failures else 0)
