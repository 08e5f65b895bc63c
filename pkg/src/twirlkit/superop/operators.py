"""Liouville-space (superoperator) forms of the twirling channels.

A superoperator acts on ``vec(rho)`` (column stacking), so conjugation by a
register unitary U is ``conj(U) (x) U``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from ..errors import DimensionError, InvalidParameterError, ResourceGuardError
from ..linalg import ComplexMatrix, as_matrix, hs_norm_sq, kron, unvec, vec
from ..sampling import RngHandle, UnitarySource, draw_unitary
from ..states import DensityMatrix, QuditRegister
from ..twirl.basis import PermutationBasis
from ..twirl.plan import TwirlPlan, Variant, register_unitary

log = logging.getLogger(__name__)

# 4096 x 4096 complex128 is 256 MiB; beyond that use state-level trajectories.
MAX_SUPEROP_DIM = 4096


def check_superop_dim(reg: QuditRegister) -> None:
    if reg.superop_dim > MAX_SUPEROP_DIM:
        raise ResourceGuardError(
            f"superoperator of dim {reg.superop_dim} for N={reg.n_qudits}, d={reg.local_dim} "
            f"exceeds {MAX_SUPEROP_DIM}; use state-level trajectories"
        )


@dataclass(frozen=True, eq=False)
class Superoperator:
    matrix: ComplexMatrix
    register: QuditRegister

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        if m.shape != (self.register.superop_dim, self.register.superop_dim):
            raise DimensionError(
                f"superoperator shape {m.shape} does not match register dim {self.register.dim}"
            )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, reg: QuditRegister) -> "Superoperator":
        check_superop_dim(reg)
        return cls(np.eye(reg.superop_dim, dtype=np.complex128), reg)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def with_matrix(self, matrix: ComplexMatrix) -> "Superoperator":
        return Superoperator(matrix, self.register)

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        self.register.check_state(rho)
        return DensityMatrix(unvec(self.matrix @ vec(rho.matrix), rho.dim))

    def compose(self, other: "Superoperator") -> "Superoperator":
        """self after other."""
        if other.register != self.register:
            raise DimensionError("cannot compose superoperators on different registers")
        return self.with_matrix(self.matrix @ other.matrix)


def conjugation(u: ComplexMatrix, reg: QuditRegister, variant: Variant = "werner") -> ComplexMatrix:
    """Superoperator matrix of rho -> U rho U^dagger for the register unitary induced by u."""
    big = register_unitary(u, reg, variant)
    return kron(big.conj(), big)


def exact_twirl_superop(reg: QuditRegister, basis: PermutationBasis) -> Superoperator:
    """S_P = sum_k vec(R_k) vec(R_k)^dagger."""
    basis.check(reg)
    check_superop_dim(reg)
    v = basis.vectors()
    return Superoperator(v @ v.conj().T, reg)


def avg_twirl_superop(
    M: int,
    source: UnitarySource,
    reg: QuditRegister,
    rng: RngHandle,
    variant: Variant = "werner",
) -> Superoperator:
    """One realisation of (1/M)(1 + sum_{k=1}^{M-1} conj(U_k) (x) U_k)."""
    if M < 1:
        raise InvalidParameterError(f"M must be >= 1, got {M}")
    check_superop_dim(reg)
    acc = np.eye(reg.superop_dim, dtype=np.complex128)
    for k in range(M - 1):
        acc = acc + conjugation(draw_unitary(source, k, rng, reg.local_dim), reg, variant)
    return Superoperator(acc / M, reg)


def iter_avg_twirl_superop(
    M_max: int,
    source: UnitarySource,
    reg: QuditRegister,
    rng: RngHandle,
    variant: Variant = "werner",
) -> Iterator[Superoperator]:
    """S_{P_1}, ..., S_{P_{M_max}} built on one shared unitary sequence."""
    check_superop_dim(reg)
    acc = np.eye(reg.superop_dim, dtype=np.complex128)
    yield Superoperator(acc.copy(), reg)
    for k in range(M_max - 1):
        acc = acc + conjugation(draw_unitary(source, k, rng, reg.local_dim), reg, variant)
        yield Superoperator(acc / (k + 2), reg)


def iter_recursive_twirl_superop(plan: TwirlPlan, rng: RngHandle) -> Iterator[Superoperator]:
    """S_{Q_1}, ..., S_{Q_M}: S <- (1/K)(S + sum_j C_j S) with K-1 fresh unitaries per step."""
    reg = plan.register
    check_superop_dim(reg)
    s = np.eye(reg.superop_dim, dtype=np.complex128)
    step = 0
    for _ in range(plan.M):
        acc = s.copy()
        for _ in range(plan.K - 1):
            c = conjugation(draw_unitary(plan.source, step, rng, reg.local_dim), reg, plan.variant)
            acc = acc + c @ s
            step += 1
        s = acc / plan.K
        yield Superoperator(s, reg)


def recursive_twirl_superop(plan: TwirlPlan, rng: RngHandle) -> Superoperator:
    out = Superoperator.identity(plan.register)
    for out in iter_recursive_twirl_superop(plan, rng):
        pass
    return out


SuperopLike = Union[Superoperator, ComplexMatrix]


def superop_error(s: SuperopLike, s_ref: SuperopLike) -> float:
    """||s - s_ref||^2 in the Hilbert-Schmidt norm."""
    a = s.matrix if isinstance(s, Superoperator) else as_matrix(s)
    b = s_ref.matrix if isinstance(s_ref, Superoperator) else as_matrix(s_ref)
    if a.shape != b.shape:
        raise DimensionError(f"superoperator shapes differ: {a.shape} vs {b.shape}")
    return hs_norm_sq(a - b)
