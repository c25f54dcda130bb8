"""Heat currents, entropy production and correlation measures.

Entropies are in nats.  Eigenvalues below ``EIG_FLOOR`` are treated as
exact zeros (0 ln 0 = 0).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .dynamics import LindbladGenerator
from .qubits import partial_trace, partial_transpose

EIG_FLOOR = 1e-14


def heat_current(rho: np.ndarray, h_s: np.ndarray, channels) -> float:
    """Tr(H_S L_i(rho)) for the dissipator L_i built from one bath's channels."""
    dissipator = LindbladGenerator(np.zeros_like(h_s), channels)
    return float(np.real(np.trace(h_s @ dissipator(rho))))


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > EIG_FLOOR]
    return float(-np.sum(w * np.log(w)))


def _log_rho(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    logs = np.where(w > EIG_FLOOR, np.log(np.clip(w, EIG_FLOOR, None)), 0.0)
    return (v * logs) @ v.conj().T


def entropy_rate(rho: np.ndarray, rho_dot: np.ndarray) -> float:
    """dS/dt = -Tr(rho_dot ln rho)."""
    return float(-np.real(np.trace(rho_dot @ _log_rho(rho))))


def entropy_production_rate(rho: np.ndarray, h_s: np.ndarray,
                            per_bath_channels: Sequence, bath_temps: Sequence[float]) -> float:
    """dS/dt - sum_i Q_i / tau_i, non-negative for a consistent generator."""
    all_channels = [ch for chans in per_bath_channels for ch in chans]
    rho_dot = LindbladGenerator(h_s, all_channels)(rho)
    flux = sum(heat_current(rho, h_s, chans) / t
               for chans, t in zip(per_bath_channels, bath_temps))
    return entropy_rate(rho, rho_dot) - flux


def negativity_1_23(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(partial_transpose(rho, 1))
    return float(-np.sum(w[w < 0]))


def l1_coherence(rho: np.ndarray, basis: str | np.ndarray = "computational") -> float:
    """Sum of off-diagonal magnitudes.

    ``basis`` is "computational", "local" (the same basis, since the local
    Hamiltonian is diagonal in it) or a unitary whose columns are the basis.
    """
    rho = np.asarray(rho)
    if isinstance(basis, str):
        if basis not in ("computational", "local"):
            raise ValueError(f"unknown basis {basis!r}")
    else:
        rho = basis.conj().T @ rho @ basis
    a = np.abs(rho)
    return float(a.sum() - np.trace(a))


def qubit1_coherence(rho: np.ndarray) -> float:
    return l1_coherence(partial_trace(rho, [1]))


def mutual_information_1_23(rho: np.ndarray) -> float:
    return (von_neumann_entropy(partial_trace(rho, [1]))
            + von_neumann_entropy(partial_trace(rho, [2, 3]))
            - von_neumann_entropy(rho))
