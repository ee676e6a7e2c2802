#!/usr/bin/env python3
"""Run the CLI on the fast configs and validate every JSON output against the shipped schemas.

usage: validate_schemas.py <sgq binary> <schema dir> <config dir>
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

# (config, subcommand, schema); the slow GTG and shuffle sweeps are exercised by the acceptance tests.
RUNS = [
    ("mg_ring_ground.json", "ground", "ground.schema.json"),
    ("pump_mg.json", "protocol", "protocol.schema.json"),
    ("twist_mg.json", "protocol", "protocol.schema.json"),
    ("teleport_h.json", "protocol", "protocol.schema.json"),
    ("phase_scan_5x5.json", "phase-scan", "phase_scan.schema.json"),
    ("duality_check.json", "duality-check", "duality_check.schema.json"),
]


def load_registry(schema_dir: Path) -> Registry:
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


def main() -> int:
    if len(sys.argv) != 4:
        print(__doc__, file=sys.stderr)
        return 2
    binary, schema_dir, config_dir = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    registry = load_registry(schema_dir)
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for config, sub, schema_name in RUNS:
            out = Path(tmp) / (config + ".out")
            proc = subprocess.run([binary, sub, str(config_dir / config), "--json", str(out)],
                                  capture_output=True, text=True)
            if proc.returncode != 0:
                print(f"FAIL {config}: exit {proc.returncode}\n{proc.stderr}")
                failures += 1
                continue
            schema = json.loads((schema_dir / schema_name).read_text())
            validator = jsonschema.Draft202012Validator(schema, registry=registry)
            errors = sorted(validator.iter_errors(json.loads(out.read_text())), key=lambda e: list(e.path))
            for e in errors[:5]:
                print(f"FAIL {config}: {'/'.join(map(str, e.path))}: {e.message}")
            failures += bool(errors)
            if not errors:
                print(f"ok   {config} against {schema_name}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
