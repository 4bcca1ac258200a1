"""
Reproducible runs from a manifest
=================================

The same experiment through the ``spivc pipeline`` entry point.  A manifest
fixes every seed, so the report is identical on every run.
"""

import json
import os
import tempfile

from spivc.cli import main
from spivc.pipeline import RunManifest

manifest = RunManifest(
    scheme="opaque-qr",
    dims=[33, 33],
    n=2178,
    seeds={"share": 11, "pattern": 7},
    inputs={"text": "Nanophotonics Research Center", "version": 4, "ec": "H", "secret_text": "OK"},
    outputs={"dir": "out"},
    thresholds={"require_decode": True, "min_dot_accuracy": 0.99},
)

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "opaque.json")
    with open(path, "w") as f:
        f.write(manifest.to_json())
    report_path = os.path.join(tmp, "report.json")
    code = main(["pipeline", path, "--out", report_path])
    with open(report_path) as f:
        report = json.load(f)
    print("exit code", code)
    for check in report["checks"]:
        print(f"  {'ok ' if check['passed'] else 'BAD'} {check['name']}: {check['value']}")
    print("files:", sorted(os.listdir(os.path.join(tmp, "out"))))
