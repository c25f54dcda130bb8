"""Bosonic-bath dissipation channels in the global (eigenoperator) picture.

Every coupling operator is split into eigenoperators of the full system
Hamiltonian, ``[H_S, L^E] = -E L^E``, and each eigenoperator is paired with
a rate built from an Ohmic spectral density and Bose-Einstein occupations.
Bath 1 couples to qubits 1 and 2 through two-, three- and four-body terms;
bath 2 couples to qubit 3 through a two-body term only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericalError, PreconditionError
from .hamiltonian import Eigensystem, SystemParams, closed_form_eigensystem
from .qubits import SIGMA_MINUS, SIGMA_PLUS, embed

GAP_TOL = 1e-9
# below this distance from E12 the four-body factor uses its analytic limit
FOUR_BODY_LIMIT = 1e-6

QUAD_ORDER = 32
QUAD_RTOL = 1e-8
QUAD_MAX_PANELS = 4096

RWA_PASS = 0.5
RWA_WARN = 1.0


@dataclass(frozen=True)
class BathParams:
    tau: float
    delta: float
    omega_cutoff: float = 1e3
    omega_max: float | None = None

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError(f"bath temperature must be positive, got {self.tau!r}")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise DomainError(f"delta must be non-negative, got {self.delta!r}")
        if not self.omega_cutoff > 0:
            raise DomainError(f"omega_cutoff must be positive, got {self.omega_cutoff!r}")
        if self.omega_max is None:
            object.__setattr__(self, "omega_max", max(50.0 * self.tau, 50.0))
        if not self.omega_max >= 10.0 * max(self.tau, 1.0):
            raise DomainError(
                f"omega_max={self.omega_max!r} must be >= 10*max(tau, 1) "
                "for the occupation integral to be resolved")


@dataclass(frozen=True)
class CouplingParams:
    kappa1: float = 0.0
    kappa2: float = 0.0

    def __post_init__(self):
        for name in ("kappa1", "kappa2"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be non-negative, got {v!r}")


@dataclass(frozen=True)
class DissipationChannel:
    """One Lindblad term ``rate * D[lindblad_op]``.

    ``order`` is the body count of the coupling (2, 3, 4); reset channels
    use ``order=0`` and carry ``energy=nan`` since they are not
    eigenoperators.
    """

    lindblad_op: np.ndarray = field(repr=False)
    rate: float
    energy: float
    bath: int
    order: int


def ohmic_spectral_density(e, b: BathParams):
    e = np.asarray(e, dtype=float)
    if np.any(e < 0):
        raise DomainError("spectral density takes a non-negative energy")
    out = b.delta * e * np.exp(-e / b.omega_cutoff)
    return float(out) if out.ndim == 0 else out


def bose_einstein(e, tau):
    """1 / (exp(e/tau) - 1), written to stay finite for large e/tau."""
    e = np.asarray(e, dtype=float)
    if np.any(e <= 0):
        raise DomainError("Bose-Einstein occupation needs a positive energy")
    if not tau > 0:
        raise DomainError(f"temperature must be positive, got {tau!r}")
    x = e / tau
    out = np.exp(-x) / -np.expm1(-x)
    return float(out) if out.ndim == 0 else out


def _occupation_weighted_integrand(u, tau, omega_cutoff):
    # 2u sqrt(J(u^2)) f(u^2) / sqrt(delta), regular at u = 0 (limit 2 tau)
    u = np.asarray(u, dtype=float)
    w = u * u
    out = np.empty_like(u)
    small = w < 1e-300
    out[small] = 2.0 * tau
    ws = w[~small]
    us = u[~small]
    out[~small] = 2.0 * us * us * np.exp(-0.5 * ws / omega_cutoff) / np.expm1(ws / tau)
    return out


def _gauss_legendre(fn, a, b, n_panels, order=QUAD_ORDER):
    x, wts = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = fn(nodes).reshape(n_panels, order)
    return float(np.sum(half * (vals @ wts)))


@lru_cache(maxsize=256)
def _scaled_occupation_integral(tau, omega_cutoff, omega_max):
    upper = math.sqrt(omega_max)
    fn = lambda u: _occupation_weighted_integrand(u, tau, omega_cutoff)  # noqa: E731
    n = 1
    prev = _gauss_legendre(fn, 0.0, upper, n)
    while n < QUAD_MAX_PANELS:
        n *= 2
        cur = _gauss_legendre(fn, 0.0, upper, n)
        if abs(cur - prev) <= QUAD_RTOL * abs(cur):
            return cur
        prev = cur
    raise NumericalError("occupation integral did not converge")


def occupation_integral(b: BathParams) -> float:
    """Integral of sqrt(J(w)) f(w, tau) over 0 < w < omega_max.

    The w^(-1/2) singularity at the origin is removed by w = u^2.
    """
    return math.sqrt(b.delta) * _scaled_occupation_integral(
        b.tau, b.omega_cutoff, b.omega_max)


def _check_gap(e):
    if e == 0 or not math.isfinite(e):
        raise DomainError(f"transition energy must be finite and non-zero, got {e!r}")


def two_body_rate(e: float, b: BathParams) -> float:
    _check_gap(e)
    x = abs(e)
    j = ohmic_spectral_density(x, b)
    n = bose_einstein(x, b.tau)
    return 2 * math.pi * j * (1.0 + n if e > 0 else n)


def three_body_rate(e: float, b: BathParams, kappa1: float) -> float:
    """Symmetric in the sign of ``e``: only |E| enters."""
    _check_gap(e)
    if kappa1 < 0:
        raise DomainError("kappa1 must be non-negative")
    if kappa1 == 0 or b.delta == 0:
        return 0.0
    x = abs(e)
    return (2 * math.pi * kappa1**2 * math.sqrt(ohmic_spectral_density(x, b))
            * bose_einstein(x, b.tau) * occupation_integral(b))


def _partner_factor(x: float, b: BathParams, emission: bool) -> float:
    # J(x)(1+f(x)) for emission, J(x) f(x) for absorption; both -> delta*tau
    if x < FOUR_BODY_LIMIT:
        return b.delta * b.tau
    n = bose_einstein(x, b.tau)
    return ohmic_spectral_density(x, b) * (1.0 + n if emission else n)


def four_body_rate(e: float, b: BathParams, kappa2: float, e12: float) -> float:
    _check_gap(e)
    if kappa2 < 0:
        raise DomainError("kappa2 must be non-negative")
    x = abs(e)
    if x > e12 + GAP_TOL:
        raise DomainError(f"|E|={x!r} exceeds E12={e12!r}")
    if kappa2 == 0 or b.delta == 0:
        return 0.0
    emission = e > 0
    n = bose_einstein(x, b.tau)
    own = ohmic_spectral_density(x, b) * (1.0 + n if emission else n)
    partner = _partner_factor(max(e12 - x, 0.0), b, emission)
    return 2 * math.pi * kappa2**2 * own * partner


def max_kappa1(b: BathParams, gamma_bound: float, e: float) -> float:
    """kappa1 at which the three-body rate at gap ``e`` equals ``gamma_bound``."""
    if not gamma_bound > 0:
        raise DomainError("gamma_bound must be positive")
    unit = three_body_rate(e, b, 1.0)
    if unit == 0:
        raise DomainError("three-body rate vanishes for this bath")
    return math.sqrt(gamma_bound / unit)


def max_kappa2(b: BathParams, gamma_bound: float, e: float, e12: float) -> float:
    """kappa2 at which the four-body rate at gap ``e`` equals ``gamma_bound``.

    Pass the positive gap to bound the emission rate, which is the larger one.
    """
    if not gamma_bound > 0:
        raise DomainError("gamma_bound must be positive")
    unit = four_body_rate(e, b, 1.0, e12)
    if unit == 0:
        raise DomainError("four-body rate vanishes for this bath")
    return math.sqrt(gamma_bound / unit)


# --- coupling operators -----------------------------------------------------

def flip_operator(qubit: int) -> np.ndarray:
    """sigma^+ + sigma^- on one qubit."""
    return embed(SIGMA_PLUS + SIGMA_MINUS, qubit)


def exchange_operator(i: int, j: int) -> np.ndarray:
    """sigma_i^+ sigma_j^- + sigma_i^- sigma_j^+ (three-body coupling)."""
    return (embed(SIGMA_PLUS, i) @ embed(SIGMA_MINUS, j)
            + embed(SIGMA_MINUS, i) @ embed(SIGMA_PLUS, j))


def pair_creation_operator(i: int, j: int) -> np.ndarray:
    """sigma_i^+ sigma_j^+ + sigma_i^- sigma_j^- (four-body coupling)."""
    return (embed(SIGMA_PLUS, i) @ embed(SIGMA_PLUS, j)
            + embed(SIGMA_MINUS, i) @ embed(SIGMA_MINUS, j))


# --- eigenoperators ----------------------------------------------------------

def _transition_table(eig: Eigensystem, a_op: np.ndarray, amp_tol=1e-13):
    a_op = np.asarray(a_op)
    if np.max(np.abs(a_op - a_op.conj().T)) > 1e-12:
        raise DomainError("coupling operator must be Hermitian")
    v = eig.vectors
    elems = v.conj().T @ a_op @ v
    gaps = eig.energies[None, :] - eig.energies[:, None]  # E_a' - E_a
    scale = max(1.0, float(np.max(np.abs(elems))))
    mask = np.abs(elems) > amp_tol * scale
    return v, elems, gaps, mask


def eigenoperator_decomposition(eig: Eigensystem, a_op: np.ndarray,
                                tol: float = GAP_TOL) -> list[tuple[np.ndarray, float]]:
    """Positive-gap eigenoperators L^E of a Hermitian coupling operator.

    L^E = sum over E_a' - E_a = E of |a><a| A |a'><a'|, with gaps closer than
    ``tol`` merged.  Returned in ascending order of E.
    """
    v, elems, gaps, mask = _transition_table(eig, a_op)
    pos = mask & (gaps > tol)
    values = np.sort(gaps[pos])
    groups: list[list[float]] = []
    for g in values:
        if groups and g - groups[-1][-1] <= tol:
            groups[-1].append(g)
        else:
            groups.append([g])
    out = []
    for grp in groups:
        sel = pos & (gaps >= grp[0] - 0.5 * tol) & (gaps <= grp[-1] + 0.5 * tol)
        m = np.where(sel, elems, 0.0)
        out.append((v @ m @ v.conj().T, float(np.mean(grp))))
    return out


def zero_gap_component(eig: Eigensystem, a_op: np.ndarray, tol: float = GAP_TOL) -> np.ndarray:
    v, elems, gaps, mask = _transition_table(eig, a_op)
    m = np.where(mask & (np.abs(gaps) <= tol), elems, 0.0)
    return v @ m @ v.conj().T


def _eigensystem(p: SystemParams) -> Eigensystem:
    return closed_form_eigensystem(p)


def _paired_channels(eig, a_op, rate_fn, bath, order):
    chans = []
    for op, e in eigenoperator_decomposition(eig, a_op):
        chans.append(DissipationChannel(op, rate_fn(e), e, bath, order))
        chans.append(DissipationChannel(op.conj().T, rate_fn(-e), -e, bath, order))
    return chans


def bath1_channels(p: SystemParams, b1: BathParams, c: CouplingParams,
                   eig: Eigensystem | None = None) -> list[DissipationChannel]:
    eig = eig or _eigensystem(p)
    chans = _paired_channels(eig, flip_operator(1) + flip_operator(2),
                             lambda e: two_body_rate(e, b1), 1, 2)
    if c.kappa1 > 0:
        chans += _paired_channels(eig, exchange_operator(1, 2),
                                  lambda e: three_body_rate(e, b1, c.kappa1), 1, 3)
    if c.kappa2 > 0:
        chans += _paired_channels(eig, pair_creation_operator(1, 2),
                                  lambda e: four_body_rate(e, b1, c.kappa2, p.e12), 1, 4)
    return chans


def bath2_channels(p: SystemParams, b2: BathParams,
                   eig: Eigensystem | None = None) -> list[DissipationChannel]:
    eig = eig or _eigensystem(p)
    return _paired_channels(eig, flip_operator(3), lambda e: two_body_rate(e, b2), 2, 2)


def build_two_bath_dissipator(p: SystemParams, b1: BathParams, b2: BathParams,
                              c: CouplingParams = CouplingParams()) -> list[DissipationChannel]:
    eig = _eigensystem(p)
    return bath1_channels(p, b1, c, eig) + bath2_channels(p, b2, eig)


# --- rotating-wave check ------------------------------------------------------

@dataclass(frozen=True)
class RWAReport:
    verdict: str
    max_rate: float
    ratio: float
    smallest_scale: float
    channel: DissipationChannel | None

    @property
    def ok(self) -> bool:
        return self.verdict != "fail"


def validate_rwa(channels, p: SystemParams, pass_ratio: float = RWA_PASS,
                 warn_ratio: float = RWA_WARN) -> RWAReport:
    """Compare the largest rate with min(g, E1, E2, E3).

    With g = 0 only the qubit energies are used.
    """
    scales = [p.e1, p.e2, p.e3] + ([p.g] if p.g > 0 else [])
    smallest = min(scales)
    worst = max(channels, key=lambda ch: ch.rate, default=None)
    max_rate = worst.rate if worst is not None else 0.0
    ratio = max_rate / smallest
    if ratio <= pass_ratio:
        verdict = "pass"
    elif ratio <= warn_ratio:
        verdict = "warn"
    else:
        verdict = "fail"
    return RWAReport(verdict, max_rate, ratio, smallest, worst)


def require_rwa(channels, p: SystemParams) -> RWAReport:
    report = validate_rwa(channels, p)
    if not report.ok:
        raise PreconditionError(
            f"rotating-wave approximation violated: max rate {report.max_rate:.3g} "
            f"is {report.ratio:.3g} x min(g, E)")
    return report
