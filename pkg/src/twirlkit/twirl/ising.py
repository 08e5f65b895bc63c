"""Ising-layer unitaries on n qubits: local Haar rotations followed by a
periodic nearest-neighbour zz evolution."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidParameterError
from ..linalg import ComplexMatrix, kron_all
from ..sampling import RngHandle, haar_unitary

# Couplings used for the 3- and 4-qubit layers.
DEFAULT_ALPHA = {3: 1.10, 4: 1.03}


def default_alpha(n_qubits: int) -> float:
    try:
        return DEFAULT_ALPHA[n_qubits]
    except KeyError:
        raise InvalidParameterError(
            f"no default coupling for n={n_qubits}; pass alpha explicitly"
        ) from None


def ising_energies(n_qubits: int) -> np.ndarray:
    """s(b) = sum_k z_k z_{(k+1) mod n} for every basis index b; qubit 0 is the most significant bit."""
    if n_qubits < 2:
        raise InvalidParameterError(f"Ising layer needs n_qubits >= 2, got {n_qubits}")
    idx = np.arange(2 ** n_qubits)
    bits = (idx[:, None] >> (n_qubits - 1 - np.arange(n_qubits))[None, :]) & 1
    z = 1 - 2 * bits
    return np.sum(z * np.roll(z, -1, axis=1), axis=1)


def ising_phases(n_qubits: int, alpha: float) -> np.ndarray:
    """Diagonal of exp(i alpha sum_k sigma_z^(k) sigma_z^(k+1))."""
    return np.exp(1j * alpha * ising_energies(n_qubits))


def ising_unitary(n_qubits: int, alpha: float, rng: RngHandle) -> ComplexMatrix:
    local = kron_all(haar_unitary(2, rng) for _ in range(n_qubits))
    return ising_phases(n_qubits, alpha)[:, None] * local
