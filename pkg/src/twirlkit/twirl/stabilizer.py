"""Depolarisation by averaging over a stabilizer group of Pauli products."""
from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from ..errors import DimensionError, InvalidParameterError, NonCommutingError
from ..linalg import PAULI, ComplexMatrix, as_matrix, kron_all
from ..states import DensityMatrix

GENERATOR_TOL = 1e-10


def pauli_product(label: str) -> ComplexMatrix:
    """'XZI' -> X (x) Z (x) I."""
    label = label.upper()
    if not label or any(ch not in PAULI for ch in label):
        raise InvalidParameterError(f"Pauli label must use I, X, Y, Z only, got {label!r}")
    return kron_all(PAULI[ch] for ch in label)


def ghz_state(n_qubits: int) -> DensityMatrix:
    if n_qubits < 1:
        raise InvalidParameterError(f"n_qubits must be >= 1, got {n_qubits}")
    psi = np.zeros(2 ** n_qubits, dtype=np.complex128)
    psi[0] = psi[-1] = 1.0
    return DensityMatrix.pure(psi)


def ghz_stabilizer_generators(n_qubits: int) -> list:
    """X...X and Z_k Z_{k+1} for k = 0..n-2."""
    gens = [pauli_product("X" * n_qubits)]
    for k in range(n_qubits - 1):
        gens.append(pauli_product("I" * k + "ZZ" + "I" * (n_qubits - k - 2)))
    return gens


def check_generators(generators: Sequence[ComplexMatrix], dim: int) -> list:
    gens = [as_matrix(g) for g in generators]
    if not gens:
        raise InvalidParameterError("at least one stabilizer generator is required")
    eye = np.eye(dim)
    for i, g in enumerate(gens):
        if g.shape != (dim, dim):
            raise DimensionError(f"generator {i} has shape {g.shape}, state dim is {dim}")
        if np.max(np.abs(g @ g - eye)) > GENERATOR_TOL:
            raise NonCommutingError(f"generator {i} does not square to the identity")
    for i, j in itertools.combinations(range(len(gens)), 2):
        if np.max(np.abs(gens[i] @ gens[j] - gens[j] @ gens[i])) > GENERATOR_TOL:
            raise NonCommutingError(f"generators {i} and {j} do not commute")
    return gens


def stabilizer_depolarize(rho: DensityMatrix, generators: Sequence[ComplexMatrix]) -> DensityMatrix:
    """rho <- 1/2 (rho + g rho g^dagger) for each generator in turn."""
    gens = check_generators(generators, rho.dim)
    m = rho.matrix
    for g in gens:
        m = 0.5 * (m + g @ m @ g.conj().T)
    return DensityMatrix(m)


def stabilizer_group_sum(rho: DensityMatrix, generators: Sequence[ComplexMatrix]) -> DensityMatrix:
    """2^{-N} sum_S S rho S^dagger over all 2^N products of the generators."""
    gens = check_generators(generators, rho.dim)
    acc = np.zeros_like(rho.matrix)
    for mask in itertools.product((False, True), repeat=len(gens)):
        s = np.eye(rho.dim, dtype=np.complex128)
        for use, g in zip(mask, gens):
            if use:
                s = s @ g
        acc = acc + s @ rho.matrix @ s.conj().T
    return DensityMatrix(acc / 2 ** len(gens))
