"""Run find-map and rat-pts on the packaged genus-6 bundle and print the headline numbers."""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from modec.cli import main

BUNDLE = Path(__file__).resolve().parents[1] / "src" / "modec" / "data" / "36.108.6.g.1.json"


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", help="keep the full JSON report here")
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args(argv)
    out = args.out or tempfile.NamedTemporaryFile(suffix=".json", delete=False).name
    extra = ["--verbose"] if args.verbose else []
    code = main(["rat-pts", str(BUNDLE), "-o", out] + extra)
    rep = json.loads(Path(out).read_text())
    print("status        ", rep["status"])
    print("optimal curve ", rep["optimal_curve"], " c =", rep["manin_constant"], " degree =", rep["degree"])
    cert = rep["certificate"] or {}
    print("certificate   ", "passed" if cert.get("passed") else "FAILED", " threshold", cert.get("threshold"), " totals", cert.get("totals"))
    for j in rep["j_values"]:
        print("point         ", j["point"], " j =", j["j"], f"({j['tag']})")
    print("total seconds ", round(sum(rep["timings"].values()), 1))
    return code


if __name__ == "__main__":
    sys.exit(run())
