"""Closed-form mean squared error laws for the twirling schemes.

Values are exact; fitting belongs to :mod:`twirlkit.experiments.convergence`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Literal, Optional

import numpy as np

from ..errors import InvalidParameterError

TheoryLaw = Literal["avg-algebraic", "recursive-exponential", "biased-bound", "biased-mixing", "k-branch", "no-mixing"]
LAWS = ("avg-algebraic", "recursive-exponential", "biased-bound", "biased-mixing", "k-branch", "no-mixing")
BIASED_LAWS = ("biased-bound", "biased-mixing")


@dataclass(frozen=True, eq=False)
class TheoryCurve:
    law: TheoryLaw
    params: Dict[str, float]
    iterations: np.ndarray
    values: np.ndarray = field(repr=False)

    def value(self, iteration: int) -> float:
        hits = np.nonzero(self.iterations == iteration)[0]
        if hits.size == 0:
            raise InvalidParameterError(f"iteration {iteration} is outside the {self.law} curve")
        return float(self.values[hits[0]])

    def as_dict(self) -> Dict[int, float]:
        return {int(m): float(v) for m, v in zip(self.iterations, self.values)}


def per_unitary_rate(K: int) -> float:
    """Decay in nats per unitary consumed by Q_{K,M}: ln K / (K - 1)."""
    if K < 2:
        raise InvalidParameterError(f"K must be >= 2, got {K}")
    return math.log(K) / (K - 1)


def superop_gap(reg_superop_dim: int, n_r: int) -> float:
    """||1 - S_P||^2 = d^{2N} - N_R."""
    return float(reg_superop_dim - n_r)


def theory_curve(
    law: TheoryLaw,
    gap: float,
    M_max: int,
    *,
    p_g: Optional[float] = None,
    K: Optional[int] = None,
) -> TheoryCurve:
    """Predicted mean squared error for iterations 0..M_max (1..M_max for avg-algebraic)."""
    if law not in LAWS:
        raise InvalidParameterError(f"unknown theory law {law!r}")
    if not gap >= 0:
        raise InvalidParameterError(f"initial gap must be >= 0, got {gap}")
    if M_max < 0:
        raise InvalidParameterError(f"M_max must be >= 0, got {M_max}")
    params: Dict[str, float] = {"gap": float(gap)}

    if law == "avg-algebraic":
        its = np.arange(1, M_max + 1)
        return TheoryCurve(law, params, its, gap / its.astype(float))

    its = np.arange(0, M_max + 1)
    m = its.astype(float)
    if law == "recursive-exponential":
        values = gap * np.power(2.0, -m)
    elif law in BIASED_LAWS:
        if p_g is None or not 0.0 <= p_g <= 1.0:
            raise InvalidParameterError(f"{law} needs 0 <= p_g <= 1, got {p_g}")
        params["p_g"] = float(p_g)
        if law == "biased-bound":
            # Not an upper bound for a delta-at-V component: repeated V draws keep
            # correlated cross terms. Kept as the reference column.
            values = gap * np.power(2.0 / (1.0 + p_g ** 2), -m)
        else:
            # A Haar step halves the error in expectation; a fixed-V step never grows it.
            values = gap * np.power((1.0 + p_g) / 2.0, m)
    elif law == "k-branch":
        if K is None or K < 2:
            raise InvalidParameterError(f"k-branch needs K >= 2, got {K}")
        params["K"] = int(K)
        values = gap * np.power(float(K), -m)
    else:
        values = np.full(m.shape, float(gap))
    return TheoryCurve(law, params, its, values)
