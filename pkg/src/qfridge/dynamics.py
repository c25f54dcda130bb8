"""Time evolution under the Lindblad master equation.

The integrator is classical RK4.  For a time-independent linear generator
one RK4 step of size h is exactly multiplication by the degree-4 Taylor
polynomial of hL, so :func:`evolve` forms that propagator once in Liouville
space (row-major vectorisation, 64x64) and advances whole blocks of
sampling intervals with precomputed powers.  :func:`rk4_step` is the plain
stepwise form and is kept as the reference implementation.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dissipator import DissipationChannel
from .errors import DegeneracyError, IntegrationError, ModelViolation
from .qubits import DIM, PROJ_EXCITED, embed, hermitize, partial_trace
from .reset import ResetDissipator

log = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t", "T1", "T2", "T3", "r1", "r2", "r3", "trace_error", "min_eig")

POSITIVITY_TOL = 1e-8
RENORM_TOL = 1e-12
BLOCK = 256
NULL_RTOL = 1e-12


# --- generator ------------------------------------------------------------------

class LindbladGenerator:
    """rho -> -i[H, rho] + sum_k gamma_k D[L_k](rho) (+ optional reset term)."""

    def __init__(self, h_s: np.ndarray, channels: Sequence[DissipationChannel] = (),
                 reset: ResetDissipator | None = None):
        self.h_s = np.asarray(h_s, dtype=complex)
        self.channels = list(channels)
        self.reset = reset
        live = [ch for ch in self.channels if ch.rate != 0]
        if live:
            self._ops = np.array([ch.lindblad_op for ch in live], dtype=complex)
            self._rates = np.array([ch.rate for ch in live])
            self._ops_dag = self._ops.conj().transpose(0, 2, 1)
            self._decay = np.einsum("k,kij,kjl->il", self._rates, self._ops_dag, self._ops)
        else:
            self._ops = None
            self._decay = np.zeros((DIM, DIM), dtype=complex)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.h_s @ rho - rho @ self.h_s)
        if self._ops is not None:
            jumps = np.einsum("k,kij,jl,klm->im", self._rates, self._ops, rho, self._ops_dag)
            out += jumps - 0.5 * (self._decay @ rho + rho @ self._decay)
        if self.reset is not None:
            out += self.reset(rho)
        return out

    def superoperator(self) -> np.ndarray:
        eye = np.eye(DIM)
        sup = -1j * (np.kron(self.h_s, eye) - np.kron(eye, self.h_s.T))
        if self._ops is not None:
            for rate, op in zip(self._rates, self._ops):
                sup += rate * np.kron(op, op.conj())
            sup -= 0.5 * (np.kron(self._decay, eye) + np.kron(eye, self._decay.T))
        if self.reset is not None:
            sup += superoperator_from_map(self.reset)
        return sup


def as_generator(h_s, dissipation) -> LindbladGenerator:
    if isinstance(dissipation, LindbladGenerator):
        return dissipation
    if isinstance(dissipation, ResetDissipator):
        return LindbladGenerator(h_s, (), dissipation)
    return LindbladGenerator(h_s, dissipation or ())


def superoperator_from_map(fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Matrix of a linear map on 8x8 matrices, built column by column."""
    sup = np.zeros((DIM * DIM, DIM * DIM), dtype=complex)
    for k in range(DIM * DIM):
        e = np.zeros(DIM * DIM, dtype=complex)
        e[k] = 1.0
        sup[:, k] = np.asarray(fn(e.reshape(DIM, DIM))).ravel()
    return sup


def lindblad_rhs(rho, h_s, channels=(), reset: ResetDissipator | None = None) -> np.ndarray:
    return LindbladGenerator(h_s, channels, reset)(rho)


# --- stepping ---------------------------------------------------------------------

def rk4_step(rho: np.ndarray, h: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    if not h > 0:
        raise ValueError(f"step must be positive, got {h!r}")
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * h * k1)
    k3 = rhs(rho + 0.5 * h * k2)
    k4 = rhs(rho + h * k3)
    out = hermitize(rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
    tr = np.trace(out).real
    if abs(tr - 1.0) > RENORM_TOL:
        log.info("renormalising trace %.3e away from 1", tr - 1.0)
        out = out / tr
    lo = np.linalg.eigvalsh(out)[0]
    if lo < -POSITIVITY_TOL:
        raise IntegrationError(f"state lost positivity: min eigenvalue {lo:.3e}")
    return out


def rk4_propagator(sup: np.ndarray, h: float) -> np.ndarray:
    """One RK4 step as a matrix: I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24."""
    x = h * sup
    eye = np.eye(sup.shape[0], dtype=complex)
    # Horner form
    return eye + x @ (eye + x @ (eye + x @ (eye + x / 4.0) / 3.0) / 2.0)


# --- observables -----------------------------------------------------------------

def qubit_energies(h_s: np.ndarray) -> tuple[float, float, float]:
    """E_i read off the diagonal: <000|H|000> minus the entry with qubit i flipped."""
    d = np.real(np.diag(h_s))
    return (d[0] - d[4], d[0] - d[2], d[0] - d[1])


def temperature_from_population(r: float, e: float) -> float:
    if r >= 0.5 - 1e-12:
        return math.inf
    if r <= 0.0:
        return 0.0
    return e / math.log((1.0 - r) / r)


def local_temperature(rho: np.ndarray, qubit: int, e: float, diag_tol: float = 1e-8) -> float:
    red = partial_trace(rho, [qubit])
    if abs(red[0, 1]) > diag_tol:
        raise ModelViolation(
            f"reduced state of qubit {qubit} has coherence {abs(red[0, 1]):.3e}")
    return temperature_from_population(float(red[0, 0].real), e)


def _temperatures(r: np.ndarray, e: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = e / np.log((1.0 - r) / r)
    t = np.where(r >= 0.5 - 1e-12, np.inf, t)
    return np.where(r <= 0.0, 0.0, t)


# --- configuration and results ---------------------------------------------------

@dataclass(frozen=True)
class SimulationConfig:
    step: float = 1e-2
    t_max: float = 2e5
    steady_tol: float = 1e-9
    steady_sample: float = 0.1
    steady_window: float = 5e2
    record_stride: int = 1000
    schedule: str = "full"
    transient_window: float = 2e4
    stop_at_steady: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.steady_sample > 0 or not self.steady_tol > 0:
            raise ValueError("steady_sample and steady_tol must be positive")
        ratio = self.steady_sample / self.step
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ValueError("steady_sample must be an integer multiple of step")
        if self.steady_window / self.steady_sample < 100:
            raise ValueError("steady_window must be at least 100 x steady_sample")
        if not self.t_max > self.steady_window:
            raise ValueError("t_max must exceed steady_window")
        if self.record_stride < 1:
            raise ValueError("record_stride must be a positive number of steps")
        if self.schedule not in ("full", "two_phase"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if not self.transient_window > 0:
            raise ValueError("transient_window must be positive")

    @property
    def steps_per_sample(self) -> int:
        return int(round(self.steady_sample / self.step))

    @property
    def window_samples(self) -> int:
        return int(round(self.steady_window / self.steady_sample))


@dataclass(frozen=True)
class SteadyState:
    t_s: float
    T1_s: float
    t_detected: float
    source: str  # "criterion" or "direct"
    state: np.ndarray = field(repr=False)


@dataclass
class Trajectory:
    samples: np.ndarray
    states: np.ndarray
    steady: SteadyState | None
    transient_min: tuple[float, float]
    final_state: np.ndarray
    t_final: float
    schedule: str
    renormalizations: int = 0

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, TRAJECTORY_COLUMNS.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    @property
    def T1(self) -> np.ndarray:
        return self.column("T1")

    @property
    def T1_t(self) -> float:
        return self.transient_min[1]

    @property
    def T1_s(self) -> float:
        return self.steady.T1_s if self.steady else math.nan

    @property
    def t_s(self) -> float:
        return self.steady.t_s if self.steady else math.nan

    @property
    def T1_final(self) -> float:
        return temperature_from_population(
            float(np.real(np.trace(embed(PROJ_EXCITED, 1) @ self.final_state))),
            self._e1)

    _e1: float = 1.0


# --- steady state oracle -----------------------------------------------------------

def steady_state_from_superoperator(sup: np.ndarray, rtol: float = NULL_RTOL) -> np.ndarray:
    sv = np.linalg.svd(sup, compute_uv=False)
    nullity = int(np.sum(sv <= rtol * sv[0]))
    if nullity != 1:
        raise DegeneracyError(f"generator null space has dimension {nullity}")
    trace_row = np.eye(DIM).ravel()[None, :].astype(complex)
    a = np.vstack([sup, trace_row])
    b = np.zeros(DIM * DIM + 1, dtype=complex)
    b[-1] = 1.0
    vec = np.linalg.lstsq(a, b, rcond=None)[0]
    rho = hermitize(vec.reshape(DIM, DIM))
    return rho / np.trace(rho).real


def steady_state_direct(h_s, channels=(), reset: ResetDissipator | None = None) -> np.ndarray:
    """Stationary state from the null vector of the 64x64 generator matrix."""
    return steady_state_from_superoperator(LindbladGenerator(h_s, channels, reset).superoperator())


# --- evolution ------------------------------------------------------------------------

def evolve(rho0: np.ndarray, h_s: np.ndarray, dissipation,
           cfg: SimulationConfig = SimulationConfig(),
           energies: Sequence[float] | None = None) -> Trajectory:
    """Integrate with RK4 and apply the sampled steady-state criterion.

    The criterion |T1(t) - T1(t - dt)| < steady_tol must hold at every
    sample over a window of length ``steady_window``; if it first holds at
    t', the steady time is t' - window.  With ``schedule="two_phase"`` the
    integration stops after ``transient_window`` and the asymptotic state
    comes from :func:`steady_state_direct`; the criterion is not applied
    there, since for very slow relaxation it can hold long before T1 settles.
    """
    gen = as_generator(h_s, dissipation)
    energies = tuple(energies) if energies is not None else qubit_energies(gen.h_s)
    sup = gen.superoperator()

    s = cfg.steps_per_sample
    dt = cfg.steady_sample
    w = cfg.window_samples
    record_every = max(1, int(math.ceil(cfg.record_stride / s)))
    use_criterion = cfg.schedule == "full"
    horizon = cfg.t_max if cfg.schedule == "full" else min(cfg.t_max, cfg.transient_window)
    n_total = int(math.floor(horizon / dt + 1e-9))

    m_sample = np.linalg.matrix_power(rk4_propagator(sup, cfg.step), s)
    powers = np.empty((BLOCK, DIM * DIM, DIM * DIM), dtype=complex)
    powers[0] = m_sample
    for k in range(1, BLOCK):
        powers[k] = m_sample @ powers[k - 1]
    functionals = np.array([embed(PROJ_EXCITED, q).ravel() for q in (1, 2, 3)]
                           + [np.eye(DIM).ravel()], dtype=complex)
    # row-major vec: Tr(A rho) = sum_ij A_ji rho_ij = (A^T).ravel() . vec(rho)
    functionals = np.array([f.reshape(DIM, DIM).T.ravel() for f in functionals])
    obs_ops = np.einsum("fi,kij->kfj", functionals, powers)

    v = np.asarray(rho0, dtype=complex).ravel().copy()
    pops0 = np.real(functionals @ v)
    t1_hist = [np.array([_temperatures(pops0[0], energies[0])])]
    records: list[tuple] = []
    rec_states: list[np.ndarray] = []
    renorms = 0

    def record(n, vec, pops):
        rho = hermitize(vec.reshape(DIM, DIM))
        lo = float(np.linalg.eigvalsh(rho)[0])
        if lo < -POSITIVITY_TOL:
            raise IntegrationError(
                f"state lost positivity at t={n * dt:.6g}: min eigenvalue {lo:.3e}")
        r = np.real(pops[:3])
        temps = [temperature_from_population(r[i], energies[i]) for i in range(3)]
        records.append((n * dt, *temps, *r, abs(np.real(pops[3]) - 1.0), lo))
        rec_states.append(rho)

    record(0, v, pops0)
    block_starts = {0: v.copy()}
    prev_t1 = t1_hist[0][0]
    run = 0
    n_done = 0
    detect = None  # sample index t' at which the criterion first holds

    while n_done < n_total:
        nb = min(BLOCK, n_total - n_done)
        pops = np.real(obs_ops[:nb] @ v)
        t1 = _temperatures(pops[:, 0], energies[0])
        diffs = np.abs(np.diff(np.concatenate(([prev_t1], t1))))
        ok = diffs < cfg.steady_tol
        if detect is None and use_criterion:
            bad = np.flatnonzero(~ok)
            idx = np.arange(nb)
            last_bad = np.full(nb, -1)
            if bad.size:
                last_bad[bad] = bad
                last_bad = np.maximum.accumulate(last_bad)
            runs = np.where(last_bad < 0, run + idx + 1, idx - last_bad)
            hit = np.flatnonzero(runs >= w)
            if hit.size:
                detect = n_done + int(hit[0]) + 1
            run = int(runs[-1])
        stop = detect is not None and cfg.stop_at_steady
        last = (detect - n_done) if stop else nb
        for j in range(last):
            n = n_done + j + 1
            if n % record_every == 0 or n == n_done + last and (stop or n == n_total):
                record(n, powers[j] @ v, np.concatenate([pops[j], [np.real(functionals[3] @ (powers[j] @ v))]]))
        t1_hist.append(t1[:last])
        if stop:
            v = powers[last - 1] @ v
            n_done += last
            break
        v = powers[nb - 1] @ v
        n_done += nb
        rho = hermitize(v.reshape(DIM, DIM))
        tr = np.trace(rho).real
        if abs(tr - 1.0) > RENORM_TOL:
            log.info("renormalising trace %.3e away from 1 at t=%g", tr - 1.0, n_done * dt)
            rho = rho / tr
            renorms += 1
        v = rho.ravel()
        prev_t1 = t1[-1]
        block_starts[n_done] = v.copy()

    t1_all = np.concatenate(t1_hist)
    final_state = hermitize(v.reshape(DIM, DIM))
    steady = None
    if detect is not None:
        n_s = detect - w
        base = max(k for k in block_starts if k <= n_s)
        vec_s = block_starts[base] if n_s == base else powers[n_s - base - 1] @ block_starts[base]
        state_s = hermitize(vec_s.reshape(DIM, DIM))
        steady = SteadyState(n_s * dt, float(t1_all[n_s]), detect * dt, "criterion", state_s)
        upto = n_s
    elif cfg.schedule == "two_phase":
        rho_ss = steady_state_from_superoperator(sup)
        steady = SteadyState(math.nan, local_temperature(rho_ss, 1, energies[0]),
                             math.nan, "direct", rho_ss)
        upto = len(t1_all) - 1
    else:
        log.warning("no steady state detected before t_max=%g", cfg.t_max)
        upto = len(t1_all) - 1
    k_min = int(np.argmin(t1_all[: upto + 1]))
    traj = Trajectory(
        samples=np.array(records, dtype=float).reshape(-1, len(TRAJECTORY_COLUMNS)),
        states=np.array(rec_states),
        steady=steady,
        transient_min=(k_min * dt, float(t1_all[k_min])),
        final_state=final_state,
        t_final=n_done * dt,
        schedule=cfg.schedule,
        renormalizations=renorms,
    )
    traj._e1 = energies[0]
    return traj


# --- classification -------------------------------------------------------------------

class Regime(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    NO_COOLING = "NoCooling"

    def __str__(self):
        return self.value


def classify_temperatures(T1_t: float, T1_s: float, tau1: float,
                          eps_class: float = 1e-3, tie: float = 1e-6) -> Regime:
    """S3 (negligible steady cooling) is tested before S2; ties count as S1."""
    if not T1_t < tau1:
        return Regime.NO_COOLING
    if tau1 <= T1_s + eps_class:
        return Regime.S3
    if T1_s <= T1_t + tie:
        return Regime.S1
    return Regime.S2


def classify_dynamics(traj: Trajectory, tau1: float, eps_class: float = 1e-3,
                      tie: float = 1e-6) -> Regime:
    if traj.steady is None:
        raise ValueError("trajectory has no steady-state verdict")
    return classify_temperatures(traj.T1_t, traj.T1_s, tau1, eps_class, tie)
