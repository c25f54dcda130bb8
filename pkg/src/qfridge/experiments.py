"""Scenario presets, parameter sweeps, config files and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .dissipator import (BathParams, CouplingParams, bath1_channels, bath2_channels,
                         validate_rwa)
from .dynamics import (TRAJECTORY_COLUMNS, SimulationConfig, Trajectory,
                       classify_temperatures, evolve, local_temperature,
                       steady_state_direct)
from .errors import ConfigError, DegeneracyError, QFridgeError
from .hamiltonian import (SystemParams, build_system_hamiltonian, closed_form_eigensystem,
                          initial_product_state)
from .reset import ResetDissipator, ResetParams
from .singlebath import build_single_bath_dissipator

log = logging.getLogger(__name__)

MODELS = ("two_bath_bosonic", "single_bath_bosonic", "reset")
SWEEP_PARAMETERS = ("kappa1", "kappa2", "delta_e", "g", "delta_tau")
SWEEP_COLUMNS = ("param", "value", "T1_s", "T1_t", "t_s", "class", "rwa", "oracle_T1_s")
WORKERS_ENV = "QFRIDGE_WORKERS"
# rates at or below this make the sampled criterion impractically slow
WEAK_DISSIPATION = 1e-7


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one simulation; field names are the config keys."""

    model: str = "two_bath_bosonic"
    e1: float = 1.0
    e2: float = 2.0
    e3: float = 1.0
    g: float = 1e-2
    tau1: float = 1.0
    tau2: float = 5.0
    delta1: float = 1e-4
    delta2: float = 1e-5
    omega_cutoff: float = 1e3
    omega_max: float | None = None
    kappa1: float = 0.0
    kappa2: float = 0.0
    p1: float = 1e-3
    p2: float = 1e-4
    step: float = 1e-2
    t_max: float = 2e5
    steady_tol: float = 1e-9
    steady_sample: float = 0.1
    steady_window: float = 5e2
    record_stride: int = 1000
    schedule: str = "auto"
    transient_window: float = 2e4

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {', '.join(MODELS)}, got {self.model!r}")
        if self.schedule not in ("auto", "full", "two_phase"):
            raise ConfigError(f"schedule must be auto, full or two_phase, got {self.schedule!r}")
        try:
            self.system, self.bath1, self.coupling
            if self.model == "two_bath_bosonic":
                self.bath2
            if self.model == "reset":
                self.reset_params
            self.sim_config
        except (ValueError, QFridgeError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def system(self) -> SystemParams:
        return SystemParams(self.e1, self.e2, self.e3, self.g)

    @property
    def bath1(self) -> BathParams:
        return BathParams(self.tau1, self.delta1, self.omega_cutoff, self.omega_max)

    @property
    def bath2(self) -> BathParams:
        return BathParams(self.tau2, self.delta2, self.omega_cutoff, self.omega_max)

    @property
    def coupling(self) -> CouplingParams:
        return CouplingParams(self.kappa1, self.kappa2)

    @property
    def reset_params(self) -> ResetParams:
        return ResetParams(self.p1, self.p2, self.tau1, self.tau2)

    @property
    def resolved_schedule(self) -> str:
        if self.schedule != "auto":
            return self.schedule
        if self.model == "reset":
            weakest = min(self.p1, self.p2)
        elif self.model == "single_bath_bosonic":
            weakest = self.delta1
        else:
            weakest = min(self.delta1, self.delta2)
        return "two_phase" if weakest <= WEAK_DISSIPATION else "full"

    @property
    def sim_config(self) -> SimulationConfig:
        return SimulationConfig(
            step=self.step, t_max=self.t_max, steady_tol=self.steady_tol,
            steady_sample=self.steady_sample, steady_window=self.steady_window,
            record_stride=int(self.record_stride), schedule=self.resolved_schedule,
            transient_window=self.transient_window)


@dataclass
class Setup:
    """Assembled operators for a scenario."""

    h_s: np.ndarray
    dissipation: object  # channel list or ResetDissipator
    per_bath: list
    bath_temps: tuple
    rho0: np.ndarray


def build_setup(sc: Scenario) -> Setup:
    p = sc.system
    h_s = build_system_hamiltonian(p)
    if sc.model == "two_bath_bosonic":
        eig = closed_form_eigensystem(p)
        c1 = bath1_channels(p, sc.bath1, sc.coupling, eig)
        c2 = bath2_channels(p, sc.bath2, eig)
        return Setup(h_s, c1 + c2, [c1, c2], (sc.tau1, sc.tau2),
                     initial_product_state(p, sc.tau1, sc.tau2))
    if sc.model == "single_bath_bosonic":
        chans = build_single_bath_dissipator(p, sc.bath1, sc.kappa1)
        return Setup(h_s, chans, [chans], (sc.tau1,),
                     initial_product_state(p, sc.tau1, sc.tau1))
    reset = ResetDissipator(sc.reset_params, p)
    return Setup(h_s, reset, [], (sc.tau1, sc.tau2),
                 initial_product_state(p, sc.tau1, sc.tau2))


def oracle_T1(sc: Scenario, setup: Setup | None = None) -> float:
    """Steady-state T1 from the generator's null vector; NaN if not unique."""
    setup = setup or build_setup(sc)
    if isinstance(setup.dissipation, ResetDissipator):
        rho = steady_state_direct(setup.h_s, (), setup.dissipation)
    else:
        rho = steady_state_direct(setup.h_s, setup.dissipation)
    return local_temperature(rho, 1, sc.e1)


def rwa_verdict(sc: Scenario, setup: Setup) -> str:
    if sc.model == "reset":
        return "n/a"
    return validate_rwa(setup.dissipation, sc.system).verdict


# --- presets -------------------------------------------------------------------------

WEAK_G = 1e-2
STRONG_G = 0.5
REGIME_DELTAS = {"S1": (1e-8, 1e-4), "S2": (1e-4, 1e-5), "S3": (1e-4, 1e-8)}
RESET_PROBS = {"S1": (10**-7.5, 10**-3.5), "S2": (10**-3.5, 10**-7.5), "S3": (1e-3, 1e-4)}
SINGLE_BATH_KAPPAS = {"weak": (0.0, 1.0, 2.0), "strong": (0.0, 1.0, 4.0)}


def _build_presets() -> dict[str, Scenario]:
    out = {}
    for regime, (d1, d2) in REGIME_DELTAS.items():
        for label, g in (("weak", WEAK_G), ("strong", STRONG_G)):
            out[f"{regime}_{label}"] = Scenario(g=g, delta1=d1, delta2=d2)
    for regime, (p1, p2) in RESET_PROBS.items():
        out[f"reset_{regime}"] = Scenario(model="reset", g=WEAK_G, p1=p1, p2=p2)
    for label, g in (("weak", WEAK_G), ("strong", STRONG_G)):
        for k in SINGLE_BATH_KAPPAS[label]:
            for de in (1.0, 2.0, 3.0):
                name = f"single_bath_{label}_k{k:g}_dE{de:g}"
                out[name] = Scenario(model="single_bath_bosonic", e1=1.0, e2=1.0 + de,
                                     e3=de, g=g, tau1=1.0, tau2=1.0, delta1=1e-4,
                                     delta2=1e-4, kappa1=k)
    out["single_bath"] = out["single_bath_weak_k0_dE2"]
    return out


PRESETS: dict[str, Scenario] = _build_presets()


# --- running ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    param: str
    value: float
    T1_s: float
    T1_t: float
    t_s: float
    classification: str
    rwa: str
    oracle_T1_s: float
    error: str = ""

    def row(self) -> list:
        return [self.param, self.value, self.T1_s, self.T1_t, self.t_s,
                self.classification, self.rwa, self.oracle_T1_s]


def run_point(sc: Scenario, param: str = "", value: float = math.nan,
              allow_rwa_violation: bool = False) -> tuple[Trajectory | None, SweepRecord]:
    """Evolve one scenario and summarise it.  Failures land in the record."""
    try:
        setup = build_setup(sc)
        rwa = rwa_verdict(sc, setup)
    except QFridgeError as exc:
        return None, SweepRecord(param, value, math.nan, math.nan, math.nan, "Error",
                                 "n/a", math.nan, str(exc))
    if rwa == "fail" and not allow_rwa_violation:
        return None, SweepRecord(param, value, math.nan, math.nan, math.nan, "Error",
                                 rwa, math.nan, "rotating-wave approximation violated")
    try:
        oracle = oracle_T1(sc, setup)
    except DegeneracyError as exc:
        log.warning("%s=%s: %s", param, value, exc)
        oracle = math.nan
    try:
        traj = evolve(setup.rho0, setup.h_s, setup.dissipation, sc.sim_config,
                      energies=(sc.e1, sc.e2, sc.e3))
    except QFridgeError as exc:
        return None, SweepRecord(param, value, math.nan, math.nan, math.nan, "Error",
                                 rwa, oracle, str(exc))
    if traj.steady is None:
        return traj, SweepRecord(param, value, math.nan, traj.T1_t, math.nan, "Error", rwa,
                                 oracle, "no steady state before t_max")
    cls = classify_temperatures(traj.T1_t, traj.T1_s, sc.tau1)
    return traj, SweepRecord(param, value, traj.T1_s, traj.T1_t, traj.t_s, str(cls), rwa, oracle)


def run_scenario(name: str) -> tuple[Trajectory | None, SweepRecord]:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    return run_point(PRESETS[name], "scenario", math.nan)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: Scenario = field(default_factory=Scenario)
    e3_follows_delta_e: bool = True
    allow_rwa_violation: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}")
        if not self.values or not all(math.isfinite(v) for v in self.values):
            raise ConfigError("sweep values must be a non-empty list of finite numbers")
        if self.base.model == "reset" and self.parameter in ("kappa1", "kappa2"):
            raise ConfigError(f"{self.parameter} does not apply to the reset model")
        if self.base.model == "single_bath_bosonic" and self.parameter in ("kappa2", "delta_tau"):
            raise ConfigError(f"{self.parameter} does not apply to the single-bath model")

    @property
    def model(self) -> str:
        return self.base.model

    def scenario_at(self, value: float) -> Scenario:
        b = self.base
        if self.parameter == "delta_e":
            e3 = value if self.e3_follows_delta_e else b.e3
            return replace(b, e2=b.e1 + value, e3=e3)
        if self.parameter == "delta_tau":
            return replace(b, tau2=b.tau1 + value)
        return replace(b, **{self.parameter: value})


def _sweep_point(args) -> SweepRecord:
    spec, value = args
    try:
        sc = spec.scenario_at(value)
    except ConfigError as exc:
        return SweepRecord(spec.parameter, value, math.nan, math.nan, math.nan, "Error",
                           "n/a", math.nan, str(exc))
    return run_point(sc, spec.parameter, value, spec.allow_rwa_violation)[1]


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[SweepRecord]:
    """One record per value, in input order regardless of completion order."""
    workers = workers or default_workers()
    jobs = [(spec, v) for v in spec.values]
    if workers == 1 or len(jobs) == 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_sweep_point, jobs))


# --- config files ------------------------------------------------------------------------

CONFIG_KEYS = tuple(f.name for f in fields(Scenario))
_STRING_KEYS = ("model", "schedule")
_INT_KEYS = ("record_stride",)


def _parse_value(key: str, raw: str, lineno: int):
    if key in _STRING_KEYS:
        return raw
    if key == "omega_max" and raw.lower() == "none":
        return None
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects a number, got {raw!r}") from None


def parse_config(text: str) -> Scenario:
    """Flat ``key = value`` lines; ``#`` starts a comment; absent keys take defaults."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not raw:
            raise ConfigError(f"line {lineno}: missing value for {key!r}")
        values[key] = _parse_value(key, raw, lineno)
    return Scenario(**values)


def emit_config(sc: Scenario) -> str:
    lines = []
    for key in CONFIG_KEYS:
        v = getattr(sc, key)
        lines.append(f"{key} = {'none' if v is None else v if isinstance(v, str) else repr(v)}")
    return "\n".join(lines) + "\n"


def load_config(path: str | os.PathLike) -> Scenario:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# --- CSV -------------------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def _write_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def emit_trajectory_csv(traj: Trajectory | np.ndarray, path) -> None:
    samples = traj.samples if isinstance(traj, Trajectory) else np.asarray(traj)
    _write_rows(path, TRAJECTORY_COLUMNS, samples.reshape(-1, len(TRAJECTORY_COLUMNS)))


def emit_sweep_csv(records: Sequence[SweepRecord], path) -> None:
    _write_rows(path, SWEEP_COLUMNS, (r.row() for r in records))


def emit_csv(obj, path) -> None:
    if isinstance(obj, (Trajectory, np.ndarray)):
        emit_trajectory_csv(obj, path)
    else:
        emit_sweep_csv(obj, path)


def read_trajectory_csv(path) -> np.ndarray:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TRAJECTORY_COLUMNS:
        raise ConfigError(f"{path}: unexpected header {rows[0]}")
    return np.array([[float(x) for x in r] for r in rows[1:]],
                    dtype=float).reshape(-1, len(TRAJECTORY_COLUMNS))


def read_sweep_csv(path) -> list[SweepRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != SWEEP_COLUMNS:
        raise ConfigError(f"{path}: unexpected header {rows[0]}")
    out = []
    for r in rows[1:]:
        out.append(SweepRecord(r[0], float(r[1]), float(r[2]), float(r[3]), float(r[4]),
                               r[5], r[6], float(r[7])))
    return out


def record_as_dict(rec: SweepRecord) -> dict:
    return dataclasses.asdict(rec)
