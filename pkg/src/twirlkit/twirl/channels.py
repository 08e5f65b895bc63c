"""State-level twirling channels.

All functions are pure; the only mutable object they touch is the
:class:`~twirlkit.sampling.RngHandle` passed in, which belongs to the caller's
trajectory.
"""
from __future__ import annotations

import logging
from typing import Iterator, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, InvalidParameterError
from ..linalg import ComplexMatrix, ensure_unitary, kron
from ..sampling import RngHandle, UnitarySource, draw_unitary
from ..states import DensityMatrix, QuditRegister
from ..superop.operators import Superoperator
from .plan import TwirlPlan, Variant, register_unitary

log = logging.getLogger(__name__)


def _conj(m: ComplexMatrix, big: ComplexMatrix) -> ComplexMatrix:
    return big @ m @ big.conj().T


def twirl_step(rho: DensityMatrix, u: ComplexMatrix, reg: QuditRegister) -> DensityMatrix:
    """1/2 [rho + U rho U^dagger] with U = u^(x)N."""
    reg.check_state(rho)
    big = register_unitary(u, reg)
    return DensityMatrix(0.5 * (rho.matrix + _conj(rho.matrix, big)))


def isotropic_twirl_step(rho: DensityMatrix, u: ComplexMatrix, reg: QuditRegister) -> DensityMatrix:
    """1/2 [rho + (u (x) u^*) rho (u (x) u^*)^dagger]."""
    reg.check_state(rho)
    big = register_unitary(u, reg, "isotropic")
    return DensityMatrix(0.5 * (rho.matrix + _conj(rho.matrix, big)))


def k_branch_twirl_step(
    rho: DensityMatrix,
    unitaries: Sequence[ComplexMatrix],
    reg: QuditRegister,
    variant: Variant = "werner",
) -> DensityMatrix:
    """P_K: (1/K)(rho + sum_j U_j rho U_j^dagger) over K-1 unitaries."""
    reg.check_state(rho)
    acc = rho.matrix.copy()
    for u in unitaries:
        acc = acc + _conj(rho.matrix, register_unitary(u, reg, variant))
    return DensityMatrix(acc / (len(unitaries) + 1))


def random_conjugation(
    rho: DensityMatrix, u: ComplexMatrix, reg: QuditRegister, variant: Variant = "werner"
) -> DensityMatrix:
    """U rho U^dagger with no mixing against rho."""
    reg.check_state(rho)
    return DensityMatrix(_conj(rho.matrix, register_unitary(u, reg, variant)))


def average_twirl(
    rho: DensityMatrix,
    M: int,
    source: UnitarySource,
    reg: QuditRegister,
    rng: RngHandle,
    variant: Variant = "werner",
) -> DensityMatrix:
    """P_M rho = (1/M)[rho + sum_{k=1}^{M-1} U_k rho U_k^dagger]."""
    if M < 1:
        raise InvalidParameterError(f"M must be >= 1, got {M}")
    reg.check_state(rho)
    acc = rho.matrix.copy()
    for k in range(M - 1):
        u = draw_unitary(source, k, rng, reg.local_dim)
        acc = acc + _conj(rho.matrix, register_unitary(u, reg, variant))
    return DensityMatrix(acc / M)


def iter_average_twirl(
    rho: DensityMatrix,
    M_max: int,
    source: UnitarySource,
    reg: QuditRegister,
    rng: RngHandle,
    variant: Variant = "werner",
) -> Iterator[DensityMatrix]:
    """Yield P_1 rho, P_2 rho, ..., P_{M_max} rho sharing one unitary sequence."""
    reg.check_state(rho)
    acc = rho.matrix.copy()
    yield rho
    for k in range(M_max - 1):
        u = draw_unitary(source, k, rng, reg.local_dim)
        acc = acc + _conj(rho.matrix, register_unitary(u, reg, variant))
        yield DensityMatrix(acc / (k + 2))


def iter_recursive_twirl(rho: DensityMatrix, plan: TwirlPlan, rng: RngHandle) -> Iterator[DensityMatrix]:
    """Yield Q_{K,1} rho, ..., Q_{K,M} rho.

    The deterministic-cycle step index counts unitaries consumed, so a K=2 cycle
    advances one entry per iteration.
    """
    reg = plan.register
    reg.check_state(rho)
    state = rho
    step = 0
    for _ in range(plan.M):
        unitaries = []
        for _ in range(plan.K - 1):
            unitaries.append(draw_unitary(plan.source, step, rng, reg.local_dim))
            step += 1
        state = k_branch_twirl_step(state, unitaries, reg, plan.variant)
        yield state


def recursive_twirl(rho: DensityMatrix, plan: TwirlPlan, rng: RngHandle) -> DensityMatrix:
    state = rho
    for state in iter_recursive_twirl(rho, plan, rng):
        pass
    return state


def _circuit_branches(rho: DensityMatrix, u: ComplexMatrix, reg: QuditRegister) -> Tuple[np.ndarray, np.ndarray]:
    """Ancilla |+> controls U = u^(x)N; returns the unnormalised blocks <b|rho'|b> for b = 0, 1."""
    reg.check_state(rho)
    big = register_unitary(ensure_unitary(u), reg)
    dim = reg.dim
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    joint = kron(plus, rho.matrix)
    ctrl = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
    ctrl[:dim, :dim] = np.eye(dim)
    ctrl[dim:, dim:] = big
    out = (ctrl @ joint @ ctrl.conj().T).reshape(2, dim, 2, dim)
    return out[0, :, 0, :], out[1, :, 1, :]


def circuit_twirl_step(
    rho: DensityMatrix, u: ComplexMatrix, reg: QuditRegister
) -> Tuple[DensityMatrix, Tuple[float, float]]:
    """Simulate the ancilla-controlled block, measure the ancilla and discard it.

    Returns the unconditional register state and the outcome probabilities.
    """
    b0, b1 = _circuit_branches(rho, u, reg)
    probs = (float(np.trace(b0).real), float(np.trace(b1).real))
    return DensityMatrix(b0 + b1), probs


def circuit_branch_states(
    rho: DensityMatrix, u: ComplexMatrix, reg: QuditRegister
) -> Tuple[DensityMatrix, DensityMatrix]:
    """Register states conditioned on ancilla outcomes 0 and 1."""
    b0, b1 = _circuit_branches(rho, u, reg)
    return DensityMatrix(b0 / np.trace(b0).real), DensityMatrix(b1 / np.trace(b1).real)


def channel_twirl_step(channel: Superoperator, u: ComplexMatrix, reg: QuditRegister) -> Superoperator:
    """rho -> 1/2 [L(rho) + U^dagger L(U rho U^dagger) U], with matched ancilla control."""
    if channel.dim != reg.superop_dim:
        raise DimensionError(f"channel of dim {channel.dim} does not act on register dim {reg.dim}")
    big = register_unitary(ensure_unitary(u), reg)
    c = kron(big.conj(), big)
    s = channel.matrix
    return channel.with_matrix(0.5 * (s + c.conj().T @ s @ c))


def recursive_channel_twirl(
    channel: Superoperator,
    M: int,
    source: UnitarySource,
    reg: QuditRegister,
    rng: RngHandle,
) -> Superoperator:
    """M sandwich steps; the innermost pair uses the last unitary drawn."""
    if M < 0:
        raise InvalidParameterError(f"M must be >= 0, got {M}")
    unitaries = [draw_unitary(source, k, rng, reg.local_dim) for k in range(M)]
    out = channel
    for u in reversed(unitaries):
        out = channel_twirl_step(out, u, reg)
    return out
