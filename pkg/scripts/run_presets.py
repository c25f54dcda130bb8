"""Run named presets and write one trajectory CSV each plus a summary CSV."""

import argparse
import csv
from pathlib import Path

from qfridge.experiments import PRESETS, emit_trajectory_csv, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", help="preset names (default: all)")
    ap.add_argument("--out", default="out/presets")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = args.names or sorted(PRESETS)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["preset", "class", "T1_t", "T1_s", "t_s", "oracle_T1_s", "error"])
        for name in names:
            traj, rec = run_scenario(name)
            if traj is not None:
                emit_trajectory_csv(traj, out / f"{name}.csv")
            w.writerow([name, rec.classification, rec.T1_t, rec.T1_s, rec.t_s,
                        rec.oracle_T1_s, rec.error])
            print(f"{name:32s} {rec.classification:9s} T1_t={rec.T1_t:.5f} T1_s={rec.T1_s:.5f}")


if __name__ == "__main__":
    main()
