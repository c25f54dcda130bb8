"""Steady-temperature parameter sweeps for every model, written as CSV."""

import argparse
from dataclasses import replace
from pathlib import Path

from qfridge.experiments import PRESETS, Scenario, SweepSpec, emit_sweep_csv, run_sweep

DELTA_E = (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
G = (0.01, 0.025, 0.05, 0.1, 0.175, 0.25, 0.375, 0.5)
DELTA_TAU = (0.0, 0.5, 1.0, 2.0, 3.0, 4.0)
KAPPA1 = {"weak": (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0),
          "strong": (0.0, 0.5, 1.0, 2.0, 3.0, 4.0)}
KAPPA2 = (0.0, 10.0, 20.0, 40.0, 70.0)
RESET_BASE = Scenario(model="reset", g=1e-2, p1=10**-3.5, p2=10**-2.5)


def jobs():
    for label in ("weak", "strong"):
        for regime in ("S1", "S2", "S3"):
            yield f"kappa1_{regime}_{label}", SweepSpec("kappa1", KAPPA1[label],
                                                        PRESETS[f"{regime}_{label}"])
        for regime in ("S2", "S3"):
            yield f"kappa2_{regime}_{label}", SweepSpec("kappa2", KAPPA2,
                                                        PRESETS[f"{regime}_{label}"])
        for k in (0.0, 1.0, 2.0):
            base = replace(PRESETS[f"S2_{label}"], kappa1=k)
            yield f"delta_e_{label}_k{k:g}", SweepSpec("delta_e", DELTA_E, base)
            yield f"delta_tau_{label}_k{k:g}", SweepSpec("delta_tau", DELTA_TAU, base)
    for k in (0.0, 1.0, 2.0):
        yield f"g_k{k:g}", SweepSpec("g", G, replace(PRESETS["S2_weak"], kappa1=k))
    yield "reset_delta_e", SweepSpec("delta_e", DELTA_E, RESET_BASE)
    yield "reset_g", SweepSpec("g", G, RESET_BASE)
    yield "reset_delta_tau", SweepSpec("delta_tau", DELTA_TAU, RESET_BASE)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/sweeps")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--only", help="run only sweeps whose name contains this")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in jobs():
        if args.only and args.only not in name:
            continue
        recs = run_sweep(spec, args.workers)
        emit_sweep_csv(recs, out / f"{name}.csv")
        print(name, " ".join(f"{r.T1_s:.4f}" for r in recs))


if __name__ == "__main__":
    main()
