"""Deterministic unitary cycles that replace Haar sampling."""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Literal, Tuple

import numpy as np

from ..errors import InvalidParameterError
from ..linalg import pauli_rotation
from ..sampling import RngHandle, UnitarySource
from ..states import QuditRegister
from ..superop.operators import exact_twirl_superop, recursive_twirl_superop, superop_error
from .basis import build_permutation_basis
from .plan import TwirlPlan

log = logging.getLogger(__name__)

ScheduleKind = Literal["two-qubit-c", "three-qubit-xyz"]

TWO_QUBIT_C = 1.0894
SEARCH_ITERATIONS = 50


def deterministic_schedule(kind: ScheduleKind, c: float = TWO_QUBIT_C) -> UnitarySource:
    """two-qubit-c: [e^{ic X}, e^{ic Z}]; three-qubit-xyz: [e^{i2pi/3 X}, e^{i2pi/5 Y}, e^{i2pi/3 Z}]."""
    if kind == "two-qubit-c":
        cycle = [pauli_rotation("x", c), pauli_rotation("z", c)]
        return UnitarySource.deterministic(cycle, label=f"two-qubit-c:c={c!r}")
    if kind == "three-qubit-xyz":
        cycle = [
            pauli_rotation("x", 2 * np.pi / 3),
            pauli_rotation("y", 2 * np.pi / 5),
            pauli_rotation("z", 2 * np.pi / 3),
        ]
        return UnitarySource.deterministic(cycle, label="three-qubit-xyz")
    raise InvalidParameterError(f"unknown schedule {kind!r}")


@lru_cache(maxsize=None)
def _two_qubit_reference():
    reg = QuditRegister(2, 2)
    return exact_twirl_superop(reg, build_permutation_basis(reg))


def two_qubit_error(c: float, iterations: int = SEARCH_ITERATIONS) -> float:
    """||S_Q - S_P||^2 after ``iterations`` steps of the two-qubit-c cycle."""
    ref = _two_qubit_reference()
    plan = TwirlPlan(ref.register, iterations, deterministic_schedule("two-qubit-c", c))
    return superop_error(recursive_twirl_superop(plan, RngHandle(0)), ref)


def search_two_qubit_c(grid_step: float = 1e-3, iterations: int = SEARCH_ITERATIONS) -> Tuple[float, float]:
    """Grid search of c over [0, pi/2]; returns (best c, its error)."""
    if not grid_step > 0:
        raise InvalidParameterError(f"grid_step must be > 0, got {grid_step}")
    grid = np.arange(0.0, np.pi / 2 + grid_step / 2, grid_step)
    errors = np.array([two_qubit_error(float(c), iterations) for c in grid])
    best = int(np.argmin(errors))
    log.info("c search: %d points, best c=%.4f error=%.3e", grid.size, grid[best], errors[best])
    return float(grid[best]), float(errors[best])
