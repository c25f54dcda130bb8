"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments as ex
from .analysis import negativity_1_23, qubit1_coherence
from .dynamics import as_generator
from .errors import ConfigError, NumericalError, QFridgeError
from .qubits import validate_density_matrix

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


def _summary(rec: ex.SweepRecord) -> str:
    return (f"T1_s={rec.T1_s!r} T1_t={rec.T1_t!r} t_s={rec.t_s!r} class={rec.classification} "
            f"rwa={rec.rwa} oracle_T1_s={rec.oracle_T1_s!r}")


def _finish_point(traj, rec, out) -> int:
    if traj is not None and out:
        ex.emit_trajectory_csv(traj, out)
    print(_summary(rec))
    if rec.error:
        print(f"error: {rec.error}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = ex.load_config(args.config)
    traj, rec = ex.run_point(sc)
    return _finish_point(traj, rec, args.out)


def cmd_scenario(args) -> int:
    if args.preset not in ex.PRESETS:
        print(f"unknown preset {args.preset!r}; available: {', '.join(sorted(ex.PRESETS))}",
              file=sys.stderr)
        return EXIT_USAGE
    traj, rec = ex.run_scenario(args.preset)
    return _finish_point(traj, rec, args.out)


def cmd_sweep(args) -> int:
    sc = ex.load_config(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}")
    spec = ex.SweepSpec(args.param, values, sc, allow_rwa_violation=args.allow_rwa_violation)
    records = ex.run_sweep(spec, args.workers)
    if args.out:
        ex.emit_sweep_csv(records, args.out)
    else:
        print(",".join(ex.SWEEP_COLUMNS))
        for r in records:
            print(",".join(ex._fmt(v) for v in r.row()))
    failed = [r for r in records if r.error]
    for r in failed:
        print(f"error at {r.param}={r.value!r}: {r.error}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_steady(args) -> int:
    sc = ex.load_config(args.config)
    t1 = ex.oracle_T1(sc)
    text = f"T1_s={t1!r}"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = ex.load_config(args.config)
    setup = ex.build_setup(sc)
    report = {"model": sc.model, "schedule": sc.resolved_schedule}
    if sc.model != "reset":
        rwa = ex.validate_rwa(setup.dissipation, sc.system)
        report.update(rwa=rwa.verdict, max_rate=rwa.max_rate, rwa_ratio=rwa.ratio)
    else:
        report["rwa"] = "n/a"
    rho = setup.rho0
    validate_density_matrix(rho)
    out = as_generator(setup.h_s, setup.dissipation)(rho)
    report.update(
        rhs_trace=float(abs(np.trace(out))),
        rhs_hermiticity=float(np.max(np.abs(out - out.conj().T))),
        negativity_1_23=negativity_1_23(rho),
        qubit1_coherence=qubit1_coherence(rho),
    )
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_NUMERICAL if report["rwa"] == "fail" else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfridge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="evolve one configuration")
    s.add_argument("config")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("sweep", help="vary one parameter")
    s.add_argument("config")
    s.add_argument("--param", required=True, choices=ex.SWEEP_PARAMETERS)
    s.add_argument("--values", required=True, help="comma-separated list")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--allow-rwa-violation", action="store_true")
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("steady", help="steady state from the generator null space only")
    s.add_argument("config")
    s.set_defaults(fn=cmd_steady)

    s = sub.add_parser("validate", help="rotating-wave and generator checks")
    s.add_argument("config")
    s.set_defaults(fn=cmd_validate)

    s = sub.add_parser("scenario", help="run a named preset")
    s.add_argument("preset")
    s.set_defaults(fn=cmd_scenario)

    for p in sub.choices.values():
        p.add_argument("--out", default=None, help="output file")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.fn(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QFridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
