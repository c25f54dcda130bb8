"""All three qubits coupled to one common bosonic bath.

Two-body coupling through sigma^x on every qubit, plus three-body exchange
terms on each of the pairs (1,2), (2,3), (1,3).  No four-body term.
"""

from __future__ import annotations

from .dissipator import (BathParams, DissipationChannel, _paired_channels, exchange_operator,
                         flip_operator, three_body_rate, two_body_rate)
from .hamiltonian import SystemParams, closed_form_eigensystem

PAIRS = ((1, 2), (2, 3), (1, 3))


def single_bath_params(delta_e: float, e1: float = 1.0, g: float = 1e-2,
                       e3: float | None = None) -> SystemParams:
    """e2 = e1 + delta_e; e3 defaults to delta_e so the 010 <-> 101 swap stays resonant."""
    return SystemParams(e1, e1 + delta_e, delta_e if e3 is None else e3, g)


def build_single_bath_dissipator(p: SystemParams, b: BathParams,
                                 kappa1: float = 0.0) -> list[DissipationChannel]:
    eig = closed_form_eigensystem(p)
    a_op = flip_operator(1) + flip_operator(2) + flip_operator(3)
    chans = _paired_channels(eig, a_op, lambda e: two_body_rate(e, b), 1, 2)
    if kappa1 > 0:
        for i, j in PAIRS:
            chans += _paired_channels(eig, exchange_operator(i, j),
                                      lambda e: three_body_rate(e, b, kappa1), 1, 3)
    return chans
