from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidStateError
from .linalg import ComplexMatrix, as_matrix, hermitian_deviation, hs_norm_sq

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9


@dataclass(frozen=True)
class QuditRegister:
    """N qudits of local dimension d."""
    n_qudits: int
    local_dim: int

    def __post_init__(self) -> None:
        if self.n_qudits < 1:
            raise DimensionError(f"n_qudits must be >= 1, got {self.n_qudits}")
        if self.local_dim < 2:
            raise DimensionError(f"local_dim must be >= 2, got {self.local_dim}")

    @property
    def dim(self) -> int:
        return self.local_dim ** self.n_qudits

    @property
    def superop_dim(self) -> int:
        return self.dim ** 2

    def check_local(self, u: ComplexMatrix) -> None:
        if np.shape(u) != (self.local_dim, self.local_dim):
            raise DimensionError(
                f"local unitary of shape {np.shape(u)} does not act on d={self.local_dim}"
            )

    def check_state(self, rho: "DensityMatrix") -> None:
        if rho.dim != self.dim:
            raise DimensionError(f"state of dim {rho.dim} does not fit register {self.n_qudits}x{self.local_dim}")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, PSD state.

    Construction only checks shape and finiteness; the eigenvalue check runs in
    :meth:`validate`, which :meth:`checked` calls for external input. Channel
    outputs skip it.
    """
    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        m = np.array(as_matrix(self.matrix), dtype=np.complex128)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("density matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def checked(cls, matrix) -> "DensityMatrix":
        rho = cls(np.array(matrix, dtype=np.complex128))
        rho.validate()
        return rho

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def pure(cls, ket) -> "DensityMatrix":
        psi = np.asarray(ket, dtype=np.complex128).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return hs_norm_sq(self.matrix)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def validate(self) -> None:
        herm = hermitian_deviation(self.matrix)
        if herm > HERMITIAN_TOL:
            raise InvalidStateError(f"not Hermitian: max |rho - rho^dagger| = {herm:.3e}")
        tr = self.trace
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace {tr.real:.12f}{tr.imag:+.2e}j is not 1")
        lo = self.min_eigenvalue()
        if lo < -PSD_TOL:
            raise InvalidStateError(f"not positive semidefinite: min eigenvalue {lo:.3e}")

    def is_valid(self) -> bool:
        try:
            self.validate()
        except InvalidStateError:
            return False
        return True
