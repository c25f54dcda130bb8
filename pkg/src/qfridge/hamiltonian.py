"""System Hamiltonian, its closed-form eigensystem, and the initial state.

Units are dimensionless throughout (hbar = k_B = 1).  The ground state of
every qubit is |1>, so ``H0 = sum_i (E_i/2) sigma^z_i`` puts |111> lowest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DomainError, PreconditionError
from .qubits import DIM, SIGMA_Z, basis_index, embed

IDX_010 = basis_index("010")
IDX_101 = basis_index("101")

# computational-basis index of eigenstates 0..5 (states 6, 7 mix |010>,|101>)
PRODUCT_EIGENSTATES = ("000", "001", "100", "011", "110", "111")


@dataclass(frozen=True)
class SystemParams:
    e1: float = 1.0
    e2: float = 2.0
    e3: float = 1.0
    g: float = 1e-2

    def __post_init__(self):
        for name in ("e1", "e2", "e3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        if not (math.isfinite(self.g) and self.g >= 0):
            raise DomainError(f"g must be non-negative, got {self.g!r}")

    @property
    def energies(self) -> tuple[float, float, float]:
        return (self.e1, self.e2, self.e3)

    @property
    def delta_e(self) -> float:
        return self.e2 - self.e1

    @property
    def e12(self) -> float:
        return self.e1 + self.e2

    @property
    def e_tilde(self) -> float:
        return math.hypot(self.e3 - self.delta_e, 2.0 * self.g)


@dataclass(frozen=True)
class Eigensystem:
    """Labelled eigenpairs; ``vectors[:, a]`` is eigenstate ``a``."""

    vectors: np.ndarray
    energies: np.ndarray
    g_zero_branch: bool = False

    def projector(self, a: int) -> np.ndarray:
        v = self.vectors[:, a]
        return np.outer(v, v.conj())

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.conj().T


def build_local_hamiltonian(p: SystemParams) -> np.ndarray:
    return sum(0.5 * e * embed(SIGMA_Z, i) for i, e in enumerate(p.energies, start=1))


def build_interaction_hamiltonian() -> np.ndarray:
    """|010><101| + h.c."""
    h1 = np.zeros((DIM, DIM))
    h1[IDX_010, IDX_101] = h1[IDX_101, IDX_010] = 1.0
    return h1


def build_system_hamiltonian(p: SystemParams) -> np.ndarray:
    return build_local_hamiltonian(p) + p.g * build_interaction_hamiltonian()


def mixing_amplitudes(p: SystemParams) -> tuple[float, float]:
    """The pair (eps_plus, eps_minus) weighting |010> in eigenstates 6 and 7.

    Evaluated in a cancellation-free form; requires g > 0.
    """
    if p.g <= 0:
        raise PreconditionError("mixing amplitudes are undefined at g = 0")
    a = 0.5 * (p.e3 - p.delta_e)
    lam = 0.5 * p.e_tilde
    if a >= 0:
        return (a + lam) / p.g, -p.g / (a + lam)
    return p.g / (lam - a), (a - lam) / p.g


def closed_form_eigensystem(p: SystemParams) -> Eigensystem:
    """Eigenstates 0..7 in the fixed labelling used by the Lindblad operators.

    For g = 0 the computational basis is returned with H0 energies; state 6
    is then whichever of |010>, |101> lies higher (the g -> 0+ limit).
    """
    e12, e3, de = p.e12, p.e3, p.delta_e
    energies = np.array([
        0.5 * (e12 + e3),
        0.5 * (e12 - e3),
        0.5 * (e3 + de),
        -0.5 * (e3 + de),
        -0.5 * (e12 - e3),
        -0.5 * (e12 + e3),
        0.5 * p.e_tilde,
        -0.5 * p.e_tilde,
    ])
    vecs = np.zeros((DIM, DIM), dtype=complex)
    for a, label in enumerate(PRODUCT_EIGENSTATES):
        vecs[basis_index(label), a] = 1.0
    if p.g == 0:
        hi, lo = (IDX_010, IDX_101) if e3 >= de else (IDX_101, IDX_010)
        vecs[hi, 6] = 1.0
        vecs[lo, 7] = 1.0
        return Eigensystem(vecs, energies, g_zero_branch=True)
    for a, eps in ((6, mixing_amplitudes(p)[0]), (7, mixing_amplitudes(p)[1])):
        norm = math.sqrt(1.0 + eps * eps)
        vecs[IDX_010, a] = eps / norm
        vecs[IDX_101, a] = 1.0 / norm
    return Eigensystem(vecs, energies)


def excited_probability(e: float, t: float) -> float:
    """r = exp(-e/2t) / (exp(-e/2t) + exp(e/2t)), the |0> population."""
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t!r}")
    if not e > 0:
        raise DomainError(f"energy gap must be positive, got {e!r}")
    if math.isinf(t):
        return 0.5
    return float(expit(-e / t))


def thermal_qubit_state(e: float, t: float) -> np.ndarray:
    r = excited_probability(e, t)
    return np.diag([r, 1.0 - r])


def initial_product_state(p: SystemParams, tau1: float, tau2: float) -> np.ndarray:
    """Qubits 1 and 2 thermal at tau1, qubit 3 thermal at tau2."""
    r1 = thermal_qubit_state(p.e1, tau1)
    r2 = thermal_qubit_state(p.e2, tau1)
    r3 = thermal_qubit_state(p.e3, tau2)
    return np.kron(np.kron(r1, r2), r3).astype(complex)


def transition_probabilities(p: SystemParams, tau1: float, tau2: float,
                             atol: float = 1e-12) -> tuple[float, float]:
    """Closed-form (p010, p101) on resonance, delta_e == e3."""
    if abs(p.delta_e - p.e3) > atol:
        raise PreconditionError(
            f"requires e2 - e1 == e3 (got delta_e={p.delta_e!r}, e3={p.e3!r})")
    for t in (tau1, tau2):
        if not t > 0:
            raise DomainError(f"temperature must be positive, got {t!r}")

    def log_z(e, t):
        # log(exp(-e/2t) + exp(e/2t)), overflow-safe
        x = 0.5 * e / t
        return x + math.log1p(math.exp(-2 * x))

    log_norm = -(log_z(p.e1, tau1) + log_z(p.e2, tau1) + log_z(p.e3, tau2))
    bias = 0.5 * p.delta_e * (1.0 / tau1 - 1.0 / tau2)
    return math.exp(log_norm + bias), math.exp(log_norm - bias)
