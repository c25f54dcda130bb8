"""Three-qubit register conventions and small linear-algebra helpers.

Basis ordering is |q1 q2 q3> with qubit 1 the most significant bit, so
index ``k`` of an 8-vector is the binary number q1 q2 q3.  For every qubit
``|0>`` is the *excited* state and ``|1>`` the ground state:
``sigma_z |0> = +|0>`` and ``sigma_z |1> = -|1>``.  ``sigma_plus`` raises
|1> -> |0>.
"""

from __future__ import annotations

import numpy as np

N_QUBITS = 3
DIM = 2**N_QUBITS

IDENTITY2 = np.eye(2)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])
SIGMA_MINUS = SIGMA_PLUS.T.copy()
PROJ_EXCITED = np.diag([1.0, 0.0])
PROJ_GROUND = np.diag([0.0, 1.0])


def basis_index(label: str) -> int:
    """Index of a computational basis label such as ``"010"``."""
    if len(label) != N_QUBITS or set(label) - {"0", "1"}:
        raise ValueError(f"bad basis label {label!r}")
    return int(label, 2)


def ket(label: str) -> np.ndarray:
    v = np.zeros(DIM, dtype=complex)
    v[basis_index(label)] = 1.0
    return v


def embed(op: np.ndarray, qubit: int) -> np.ndarray:
    """Lift a 2x2 operator acting on ``qubit`` (1-based) to the register."""
    if qubit not in (1, 2, 3):
        raise ValueError(f"qubit index must be 1, 2 or 3, got {qubit}")
    factors = [IDENTITY2] * N_QUBITS
    factors[qubit - 1] = op
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Reduced state on the qubits in ``keep`` (1-based, order preserved)."""
    keep = sorted(set(keep))
    if not keep:
        return np.array([[np.trace(rho)]])
    t = np.asarray(rho).reshape([2] * (2 * N_QUBITS))
    rows = list("abc")
    cols = list("def")
    for q in range(1, N_QUBITS + 1):
        if q not in keep:
            cols[q - 1] = rows[q - 1]
    out = "".join(rows[q - 1] for q in keep) + "".join(cols[q - 1] for q in keep)
    d = 2 ** len(keep)
    return np.einsum("".join(rows) + "".join(cols) + "->" + out, t).reshape(d, d)


def partial_transpose(rho: np.ndarray, qubit: int) -> np.ndarray:
    """Transpose the indices of one qubit (1-based)."""
    t = np.asarray(rho).reshape([2] * (2 * N_QUBITS))
    axes = list(range(2 * N_QUBITS))
    i, j = qubit - 1, qubit - 1 + N_QUBITS
    axes[i], axes[j] = axes[j], axes[i]
    return t.transpose(axes).reshape(DIM, DIM)


def excited_population(rho: np.ndarray, qubit: int) -> float:
    """Population of |0>_qubit, i.e. r_i in the thermal parametrisation."""
    return float(np.real(np.trace(embed(PROJ_EXCITED, qubit) @ rho)))


def validate_density_matrix(rho: np.ndarray, herm_tol=1e-12, trace_tol=1e-10,
                            pos_tol=1e-8) -> None:
    rho = np.asarray(rho)
    if rho.shape != (DIM, DIM):
        raise ValueError(f"density matrix must be {DIM}x{DIM}, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real!r} != 1")
    if np.linalg.eigvalsh(hermitize(rho))[0] < -pos_tol:
        raise ValueError("density matrix has a negative eigenvalue")
