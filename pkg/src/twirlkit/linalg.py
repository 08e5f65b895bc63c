"""Dense complex matrix kernels shared by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` stored in the
default C (row-major) order. That storage order never leaks into semantics:
:func:`vec` always stacks *columns*, so that

    vec(sum_kl rho_kl |k><l|) = sum_kl rho_kl |l> (x) |k>

and ``Tr(A rho) == vec(A)^dagger vec(rho)``. With this convention the map
``rho -> U rho U^dagger`` is represented by ``conj(U) (x) U``.
"""
from __future__ import annotations

from typing import Iterable, Literal, Sequence

import numpy as np
import numpy.typing as npt

from .errors import DimensionError, NotUnitaryError, ResourceGuardError

ComplexMatrix = npt.NDArray[np.complex128]

UNITARY_TOL = 1e-9
# 2**28 complex128 entries is 4 GiB.
MAX_KRON_ENTRIES = 2**28

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def as_matrix(a) -> ComplexMatrix:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows * cols > MAX_KRON_ENTRIES:
        raise ResourceGuardError(f"Kronecker product of shape {rows}x{cols} exceeds {MAX_KRON_ENTRIES} entries")
    return np.kron(a, b)


def kron_all(factors: Iterable[ComplexMatrix]) -> ComplexMatrix:
    out = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        out = kron(out, f)
    return out


def tensor_power(u: ComplexMatrix, copies: int) -> ComplexMatrix:
    """u^(x)copies; copies == 0 gives the 1x1 identity."""
    if copies < 0:
        raise DimensionError(f"copies must be >= 0, got {copies}")
    return kron_all([u] * copies)


def vec(a: ComplexMatrix) -> ComplexMatrix:
    """Column-stacking vectorisation, returned as a (dim^2, 1) column."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"vec needs a square matrix, got {a.shape}")
    return a.reshape(-1, 1, order="F").copy()


def unvec(v, dim: int) -> ComplexMatrix:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.size != dim * dim:
        raise DimensionError(f"vector of length {v.size} cannot be unvec'd to {dim}x{dim}")
    return v.reshape(dim, dim, order="F").copy()


def hs_norm_sq(a: ComplexMatrix) -> float:
    """Squared Hilbert-Schmidt norm Tr(a^dagger a)."""
    a = np.asarray(a)
    return float(np.vdot(a, a).real)


def hs_inner(a: ComplexMatrix, b: ComplexMatrix) -> complex:
    """Tr(a^dagger b)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def unitarity_deviation(u: ComplexMatrix) -> float:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return float("inf")
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_unitary(u: ComplexMatrix, tol: float = UNITARY_TOL) -> bool:
    return unitarity_deviation(u) <= tol


def ensure_unitary(u: ComplexMatrix, tol: float = UNITARY_TOL) -> ComplexMatrix:
    u = as_matrix(u)
    dev = unitarity_deviation(u)
    if dev > tol:
        raise NotUnitaryError(f"matrix deviates from unitarity by {dev:.3e} (tol {tol:.0e})")
    return u


def conjugation_superop(u: ComplexMatrix, copies: int) -> ComplexMatrix:
    """(u^(x)copies)^* (x) u^(x)copies, the superoperator of rho -> U rho U^dagger."""
    big = tensor_power(ensure_unitary(u), copies)
    return kron(big.conj(), big)


def pauli_rotation(axis: Literal["x", "y", "z"], angle: float) -> ComplexMatrix:
    """exp(i * angle * sigma_axis) in closed form."""
    key = axis.upper()
    if key not in {"X", "Y", "Z"}:
        raise DimensionError(f"unknown Pauli axis {axis!r}")
    return np.cos(angle) * PAULI["I"] + 1j * np.sin(angle) * PAULI[key]


def permute_factors(op: ComplexMatrix, dims: Sequence[int], perm: Sequence[int]) -> ComplexMatrix:
    """Reorder the tensor factors of an operator: output factor k is input factor perm[k]."""
    op = as_matrix(op)
    n = len(dims)
    total = int(np.prod(dims))
    if op.shape != (total, total):
        raise DimensionError(f"operator shape {op.shape} does not match factor dims {tuple(dims)}")
    t = op.reshape(tuple(dims) + tuple(dims))
    axes = list(perm) + [n + p for p in perm]
    out_dims = [dims[p] for p in perm]
    return t.transpose(axes).reshape(int(np.prod(out_dims)), int(np.prod(out_dims)))


def partial_transpose(op: ComplexMatrix, dims: Sequence[int], factors: Iterable[int]) -> ComplexMatrix:
    """Transpose the listed tensor factors of an operator, leaving the others alone."""
    op = as_matrix(op)
    n = len(dims)
    total = int(np.prod(dims))
    if op.shape != (total, total):
        raise DimensionError(f"operator shape {op.shape} does not match factor dims {tuple(dims)}")
    t = op.reshape(tuple(dims) + tuple(dims))
    axes = list(range(2 * n))
    for k in factors:
        axes[k], axes[n + k] = axes[n + k], axes[k]
    return t.transpose(axes).reshape(total, total)


def hermitian_deviation(a: ComplexMatrix) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
