"""Orthonormal bases of the twirl-invariant operators and the exact twirl built on them."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, ResourceGuardError
from ..linalg import ComplexMatrix, hs_inner, hs_norm_sq, partial_transpose, unvec
from ..states import DensityMatrix, QuditRegister
from .plan import Variant

log = logging.getLogger(__name__)

MAX_PERMUTATION_QUDITS = 6
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PermutationBasis:
    """HS-orthonormal Hermitian operators R_k spanning the invariant family.

    For the werner variant these span the qudit-permutation operators; the
    isotropic variant (N = 2 only) is their partial transpose on the second
    qudit.
    """
    register: QuditRegister
    operators: tuple
    variant: Variant = "werner"

    @property
    def count(self) -> int:
        return len(self.operators)

    def vectors(self) -> ComplexMatrix:
        """vec(R_k) as the columns of a (D^2, N_R) matrix."""
        return np.stack([r.reshape(-1, order="F") for r in self.operators], axis=1)

    def check(self, reg: QuditRegister) -> None:
        if reg != self.register:
            raise DimensionError(f"basis built for {self.register}, asked to act on {reg}")


def permutation_operator(perm: tuple, local_dim: int) -> ComplexMatrix:
    """V_pi mapping |i_0 ... i_{N-1}> to the state whose factor k is i_{perm[k]}."""
    n = len(perm)
    dim = local_dim ** n
    eye = np.eye(dim, dtype=np.complex128).reshape((local_dim,) * (2 * n))
    axes = list(perm) + list(range(n, 2 * n))
    return eye.transpose(axes).reshape(dim, dim)


def _orthonormalize(candidates, tol: float = RESIDUAL_TOL) -> list:
    """Modified Gram-Schmidt under Tr(a^dagger b) with rank truncation."""
    basis: list = []
    for c in candidates:
        norm0 = np.sqrt(hs_norm_sq(c))
        if norm0 == 0.0:
            continue
        r = c.copy()
        for q in basis:
            r = r - hs_inner(q, r) * q
        norm = np.sqrt(hs_norm_sq(r))
        if norm <= tol * norm0:
            continue
        basis.append(r / norm)
    return basis


def build_permutation_basis(reg: QuditRegister) -> PermutationBasis:
    if reg.n_qudits > MAX_PERMUTATION_QUDITS:
        raise ResourceGuardError(
            f"permutation basis limited to N <= {MAX_PERMUTATION_QUDITS}, got N={reg.n_qudits}"
        )
    candidates = []
    # Hermitian combinations keep every R_k Hermitian without changing the span.
    for perm in itertools.permutations(range(reg.n_qudits)):
        v = permutation_operator(perm, reg.local_dim)
        candidates.append(v + v.conj().T)
        candidates.append(1j * (v - v.conj().T))
    ops = _orthonormalize(candidates)
    log.debug("permutation basis N=%d d=%d: N_R=%d", reg.n_qudits, reg.local_dim, len(ops))
    return PermutationBasis(register=reg, operators=tuple(ops))


def build_isotropic_basis(reg: QuditRegister) -> PermutationBasis:
    if reg.n_qudits != 2:
        raise DimensionError(f"isotropic twirling is defined for N=2, got N={reg.n_qudits}")
    werner = build_permutation_basis(reg)
    dims = (reg.local_dim, reg.local_dim)
    ops = tuple(partial_transpose(r, dims, [1]) for r in werner.operators)
    return PermutationBasis(register=reg, operators=ops, variant="isotropic")


def build_basis(reg: QuditRegister, variant: Variant = "werner") -> PermutationBasis:
    if variant == "isotropic":
        return build_isotropic_basis(reg)
    return build_permutation_basis(reg)


def exact_twirl(rho: DensityMatrix, basis: PermutationBasis) -> DensityMatrix:
    """P rho = sum_k Tr(R_k rho) R_k."""
    if rho.dim != basis.register.dim:
        raise DimensionError(f"state of dim {rho.dim} does not match basis register dim {basis.register.dim}")
    vecs = basis.vectors()
    coeffs = vecs.conj().T @ rho.matrix.reshape(-1, order="F")
    return DensityMatrix(unvec(vecs @ coeffs, rho.dim))


def max_entangled_projector(local_dim: int) -> ComplexMatrix:
    """|Phi+><Phi+| with |Phi+> = sum_i |ii> / sqrt(d)."""
    phi = np.eye(local_dim, dtype=np.complex128).reshape(-1) / np.sqrt(local_dim)
    return np.outer(phi, phi.conj())


def isotropic_state(fidelity: float, local_dim: int) -> DensityMatrix:
    """F |Phi+><Phi+| + (1 - F)(I - |Phi+><Phi+|)/(d^2 - 1)."""
    phi = max_entangled_projector(local_dim)
    rest = np.eye(local_dim ** 2) - phi
    return DensityMatrix(fidelity * phi + (1.0 - fidelity) * rest / (local_dim ** 2 - 1))
