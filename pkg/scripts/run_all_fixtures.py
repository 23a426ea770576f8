"""Run every bundled scenario sequentially and in parallel; compare reports byte for byte."""
import argparse
import filecmp
import sys
import tempfile
from pathlib import Path

from covalgebra.cli import bundled_scenarios, main


def run_all(out_root, parallel):
    codes = {}
    for name in bundled_scenarios():
        args = ["run", name, "--report-dir", str(out_root), "--quiet"]
        if parallel:
            args.append("--parallel")
        codes[name] = main(args)
    return codes


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=None, help="keep reports here instead of a temp dir")
    a = ap.parse_args()
    root = Path(a.out or tempfile.mkdtemp(prefix="covalgebra-"))
    seq = run_all(root / "sequential", False)
    par = run_all(root / "parallel", True)
    bad = 0
    for name, code in seq.items():
        stem = name[:-5]
        same = all(filecmp.cmp(root / "sequential" / stem / f, root / "parallel" / stem / f, shallow=False)
                   for f in ("report.json", "report.txt"))
        print(f"{stem:24s} exit={code} parallel_exit={par[name]} identical={same}")
        bad += code != 0 or par[name] != 0 or not same
    print(f"reports under {root}")
    sys.exit(1 if bad else 0)
