#!/usr/bin/env python3
"""Convert the public BAPPS directory layout into edoks manifest CSVs.

Expected input (as unpacked from the BAPPS download):

    <root>/2afc/<split>/<subset>/{ref,p0,p1}/<id>.png  and  judge/<id>.npy
    <root>/jnd/<split>/<subset>/{p0,p1}/<id>.png       and  same/<id>.npy

Writes <out>/2afc.csv (ref_path,p0_path,p1_path,judge) and
<out>/jnd.csv (ref_path,dist_path,votes_same,judges). Paths are written
relative to <out>.
"""

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np


def scalar(path):
    return float(np.asarray(np.load(path)).reshape(-1)[0])


def subsets(root, kind, split, only):
    base = root / kind / split
    if not base.is_dir():
        return []
    names = sorted(p.name for p in base.iterdir() if p.is_dir())
    if only:
        names = [n for n in names if n in only]
    return [base / n for n in names]


def rel(path, out):
    return Path(os.path.relpath(path, out)).as_posix()


def convert_2afc(root, out, split, only):
    rows = []
    for sub in subsets(root, "2afc", split, only):
        for judge in sorted((sub / "judge").glob("*.npy")):
            stem = judge.stem
            paths = [sub / d / f"{stem}.png" for d in ("ref", "p0", "p1")]
            if not all(p.is_file() for p in paths):
                print(f"skipping {sub.name}/{stem}: missing image", file=sys.stderr)
                continue
            rows.append([rel(p, out) for p in paths] + [repr(scalar(judge))])
    with open(out / "2afc.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ref_path", "p0_path", "p1_path", "judge"])
        w.writerows(rows)
    return len(rows)


def convert_jnd(root, out, split, only, judges):
    rows = []
    for sub in subsets(root, "jnd", split, only):
        for same in sorted((sub / "same").glob("*.npy")):
            stem = same.stem
            p0, p1 = sub / "p0" / f"{stem}.png", sub / "p1" / f"{stem}.png"
            if not (p0.is_file() and p1.is_file()):
                print(f"skipping {sub.name}/{stem}: missing image", file=sys.stderr)
                continue
            votes = int(round(scalar(same) * judges))
            rows.append([rel(p0, out), rel(p1, out), votes, judges])
    with open(out / "jnd.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ref_path", "dist_path", "votes_same", "judges"])
        w.writerows(rows)
    return len(rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("root", type=Path, help="BAPPS dataset root (contains 2afc/ and jnd/)")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory for the manifests")
    ap.add_argument("--split", default="val", help="dataset split (default: val)")
    ap.add_argument("--subset", action="append", help="restrict to a subset, e.g. traditional (repeatable)")
    ap.add_argument("--judges", type=int, default=3, help="JND judges per pair (default: 3)")
    args = ap.parse_args(argv)

    if not args.root.is_dir():
        ap.error(f"{args.root} is not a directory")
    args.out.mkdir(parents=True, exist_ok=True)
    out = args.out.resolve()
    root = args.root.resolve()
    n2 = convert_2afc(root, out, args.split, args.subset)
    nj = convert_jnd(root, out, args.split, args.subset, args.judges)
    print(f"wrote {n2} 2AFC rows and {nj} JND rows to {out}")
    return 0 if n2 + nj > 0 else 1


if __name__ == "__main__":
    sys.exit(main())
