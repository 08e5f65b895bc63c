"""Twirl plans and the register-level unitaries they apply."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from ..errors import DimensionError, InvalidParameterError
from ..linalg import ComplexMatrix, kron, tensor_power
from ..sampling import UnitarySource
from ..states import QuditRegister

Variant = Literal["werner", "isotropic"]
VARIANTS = ("werner", "isotropic")


@dataclass(frozen=True, eq=False)
class TwirlPlan:
    """Q_{K,M}: M iterations of the K-branch average P_K."""
    register: QuditRegister
    M: int
    source: UnitarySource
    K: int = 2
    variant: Variant = "werner"

    def __post_init__(self) -> None:
        if self.K < 2:
            raise InvalidParameterError(f"K must be >= 2, got {self.K}")
        if self.M < 0:
            raise InvalidParameterError(f"M must be >= 0, got {self.M}")
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"unknown variant {self.variant!r}")
        if self.variant == "isotropic" and self.register.n_qudits != 2:
            raise InvalidParameterError("isotropic variant requires N=2")
        fixed = self.source.local_dim()
        if fixed is not None and fixed != self.register.local_dim:
            raise DimensionError(
                f"source produces {fixed}-level unitaries, register has d={self.register.local_dim}"
            )

    @property
    def unitaries_needed(self) -> int:
        return self.M * (self.K - 1)


def register_unitary(u: ComplexMatrix, reg: QuditRegister, variant: Variant = "werner") -> ComplexMatrix:
    """The register-level unitary a local u induces: u^(x)N, or u (x) u^* for isotropic."""
    reg.check_local(u)
    if variant == "isotropic":
        if reg.n_qudits != 2:
            raise DimensionError(f"isotropic twirling needs N=2, got N={reg.n_qudits}")
        return kron(u, u.conj())
    return tensor_power(u, reg.n_qudits)
