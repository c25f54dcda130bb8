"""Reset-model dissipator: baths replace their qubits by the t=0 thermal state.

Bath 1 resets qubits 1 and 2 jointly with rate ``p1``; bath 2 resets qubit
3 with rate ``p2``.  Two equivalent forms are provided: the direct
superoperator (two partial traces) and a list of 16 + 4 Lindblad channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .dissipator import DissipationChannel
from .errors import DomainError
from .hamiltonian import SystemParams, excited_probability, thermal_qubit_state
from .qubits import IDENTITY2, PROJ_EXCITED, PROJ_GROUND, SIGMA_MINUS, SIGMA_PLUS, partial_trace

# single-qubit operators A_1..A_4 in the order sigma^-, sigma^+, |0><0|, |1><1|
RESET_OPERATORS = (SIGMA_MINUS, SIGMA_PLUS, PROJ_EXCITED, PROJ_GROUND)


@dataclass(frozen=True)
class ResetParams:
    p1: float
    p2: float
    tau1: float = 1.0
    tau2: float = 5.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be non-negative, got {v!r}")
        for name in ("tau1", "tau2"):
            v = getattr(self, name)
            if not v > 0:
                raise DomainError(f"{name} must be positive, got {v!r}")


def reset_weights(e: float, tau: float) -> tuple[float, float, float, float]:
    """Weights of A_1..A_4 for a qubit reset to its thermal state at ``tau``."""
    r = excited_probability(e, tau)
    return (1.0 - r, r, r, 1.0 - r)


class ResetDissipator:
    """Direct-form reset term with the reference states frozen at construction."""

    def __init__(self, rp: ResetParams, p: SystemParams):
        self.params = rp
        self.system = p
        self.pair_state = np.kron(thermal_qubit_state(p.e1, rp.tau1),
                                  thermal_qubit_state(p.e2, rp.tau1))
        self.qubit3_state = thermal_qubit_state(p.e3, rp.tau2)

    def bath_term(self, rho: np.ndarray, bath: int) -> np.ndarray:
        if bath == 1:
            return self.params.p1 * (np.kron(self.pair_state, partial_trace(rho, [3])) - rho)
        if bath == 2:
            return self.params.p2 * (np.kron(partial_trace(rho, [1, 2]), self.qubit3_state) - rho)
        raise ValueError(f"bath index must be 1 or 2, got {bath}")

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.bath_term(rho, 1) + self.bath_term(rho, 2)


def reset_rhs_direct(rho: np.ndarray, rp: ResetParams, p: SystemParams) -> np.ndarray:
    return ResetDissipator(rp, p)(rho)


def build_reset_channels(rp: ResetParams, p: SystemParams) -> list[DissipationChannel]:
    """Channel form: 16 pair channels on bath 1, 4 single-qubit ones on bath 2."""
    w1 = reset_weights(p.e1, rp.tau1)
    w2 = reset_weights(p.e2, rp.tau1)
    w3 = reset_weights(p.e3, rp.tau2)
    chans = []
    for (j, a), (k, b) in product(enumerate(RESET_OPERATORS), repeat=2):
        op = np.kron(np.kron(a, b), IDENTITY2).astype(complex)
        chans.append(DissipationChannel(op, rp.p1 * w1[j] * w2[k], math.nan, 1, 0))
    for j, a in enumerate(RESET_OPERATORS):
        op = np.kron(np.eye(4), a).astype(complex)
        chans.append(DissipationChannel(op, rp.p2 * w3[j], math.nan, 2, 0))
    return chans
