"""Integrals of trace polynomials over U(d) from a recursively built moment operator.

The target is G = int U^(x)m (x) (U^dagger)^(x)n dU, after which

    int prod_k Tr(A_k U) prod_l Tr(B_l U^dagger) dU = Tr(G A_1 (x) ... (x) A_m (x) B_1 (x) ... (x) B_n).

U (x) U^dagger is not a representation of U(d), so the halving iteration is
run on its partial transpose T = U^(x)m (x) conj(U)^(x)n, which is one:

    P_{k+1} = 1/2 [1 + T_k] P_k,   P_0 = 1,

converges to the projector int T dU, and G is recovered by transposing the
last n factors back.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, InvalidParameterError, ResourceGuardError
from .linalg import (
    ComplexMatrix,
    as_matrix,
    hs_norm_sq,
    kron,
    kron_all,
    partial_transpose,
    permute_factors,
    tensor_power,
)
from .sampling import RngHandle, UnitarySource, draw_unitary
from .states import QuditRegister
from .superop.operators import Superoperator

log = logging.getLogger(__name__)

MAX_MOMENT_DIM = 4096
DEFAULT_ITERS = 200


@dataclass(frozen=True, eq=False)
class MomentOperator:
    m: int
    n: int
    d: int
    matrix: ComplexMatrix
    iterations_done: int
    # HS distance between iterates k and k-1, k = 1..iterations_done.
    convergence: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        size = self.d ** (self.m + self.n)
        if np.shape(self.matrix) != (size, size):
            raise DimensionError(
                f"moment matrix shape {np.shape(self.matrix)} does not match d^(m+n) = {size}"
            )

    @property
    def factor_dims(self) -> list:
        return [self.d] * (self.m + self.n)


def _check_guard(m: int, n: int, d: int) -> None:
    if m < 0 or n < 0:
        raise InvalidParameterError(f"moment orders must be >= 0, got m={m}, n={n}")
    if d < 1:
        raise DimensionError(f"d must be >= 1, got {d}")
    size = d ** (m + n)
    if size > MAX_MOMENT_DIM:
        raise ResourceGuardError(f"moment operator of dim d^(m+n) = {size} exceeds {MAX_MOMENT_DIM}")


def moment_operator(
    m: int,
    n: int,
    d: int,
    iters: int = DEFAULT_ITERS,
    source: Optional[UnitarySource] = None,
    rng: Optional[RngHandle] = None,
) -> MomentOperator:
    _check_guard(m, n, d)
    if iters < 0:
        raise InvalidParameterError(f"iters must be >= 0, got {iters}")
    source = source or UnitarySource.haar()
    rng = rng or RngHandle(0)

    size = d ** (m + n)
    p = np.eye(size, dtype=np.complex128)
    series = []
    for k in range(iters):
        u = draw_unitary(source, k, rng, d)
        t = kron(tensor_power(u, m), tensor_power(u.conj(), n))
        p_next = 0.5 * (p + t @ p)
        series.append(float(np.sqrt(hs_norm_sq(p_next - p))))
        p = p_next
    if series:
        log.debug("moment (m=%d, n=%d, d=%d): last step %.3e after %d iterations", m, n, d, series[-1], iters)
    g = partial_transpose(p, [d] * (m + n), range(m, m + n))
    return MomentOperator(m, n, d, g, iters, tuple(series))


def averaged_moment_operator(
    m: int,
    n: int,
    d: int,
    iters: int = DEFAULT_ITERS,
    source: Optional[UnitarySource] = None,
    rng: Optional[RngHandle] = None,
    runs: int = 1,
    threads: int = 1,
) -> MomentOperator:
    """Mean of ``runs`` independent iterations; run r draws from stream ``rng.stream_id + r``."""
    if runs < 1:
        raise InvalidParameterError(f"runs must be >= 1, got {runs}")
    rng = rng or RngHandle(0)
    if runs == 1:
        return moment_operator(m, n, d, iters, source, rng)

    def one(r: int) -> MomentOperator:
        return moment_operator(m, n, d, iters, source, rng.spawn(rng.stream_id + r))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, range(runs)))
    matrix = sum(r.matrix for r in results) / runs
    series = tuple(np.mean([r.convergence for r in results], axis=0).tolist()) if iters else ()
    return MomentOperator(m, n, d, matrix, iters, series)


def trace_integral(a_list: Sequence[ComplexMatrix], b_list: Sequence[ComplexMatrix], mop: MomentOperator) -> complex:
    """Tr(G A_1 (x) ... (x) A_m (x) B_1 (x) ... (x) B_n)."""
    if len(a_list) != mop.m or len(b_list) != mop.n:
        raise DimensionError(
            f"moment operator has (m, n) = ({mop.m}, {mop.n}), got {len(a_list)} A and {len(b_list)} B matrices"
        )
    mats = [as_matrix(x) for x in list(a_list) + list(b_list)]
    for x in mats:
        if x.shape != (mop.d, mop.d):
            raise DimensionError(f"integrand matrix of shape {x.shape}, need {mop.d}x{mop.d}")
    x = kron_all(mats)
    return complex(np.einsum("ij,ji->", mop.matrix, x))


def as_projector(mop: MomentOperator) -> ComplexMatrix:
    """int U^(x)m (x) conj(U)^(x)n dU: the moment operator with its U^dagger factors transposed."""
    return partial_transpose(mop.matrix, mop.factor_dims, range(mop.m, mop.m + mop.n))


def to_twirl_superop(mop: MomentOperator) -> Superoperator:
    """Reorder a balanced (N, N) moment onto S_P = int conj(U)^(x)N (x) U^(x)N dU."""
    if mop.m != mop.n or mop.m == 0:
        raise InvalidParameterError(f"twirl superoperator needs m = n >= 1, got ({mop.m}, {mop.n})")
    n = mop.m
    perm = list(range(n, 2 * n)) + list(range(n))
    s = permute_factors(as_projector(mop), mop.factor_dims, perm)
    return Superoperator(s, QuditRegister(n, mop.d))
