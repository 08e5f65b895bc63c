"""Trajectory-parallel convergence runs and the statistics over them.

Every trajectory owns the stream ``RngHandle(seed, index)``; results are
reduced in index order, so a run is reproducible regardless of how the
worker pool schedules it.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .. import __version__
from ..errors import InvalidParameterError, ResourceGuardError
from ..linalg import hs_norm_sq
from ..sampling import RngHandle, UnitarySource, draw_unitary, hs_random_density
from ..states import DensityMatrix, QuditRegister
from ..superop.operators import (
    Superoperator,
    check_superop_dim,
    conjugation,
    exact_twirl_superop,
    iter_avg_twirl_superop,
    iter_recursive_twirl_superop,
    superop_error,
)
from ..superop.theory import BIASED_LAWS, LAWS, theory_curve
from ..twirl.basis import MAX_PERMUTATION_QUDITS, PermutationBasis, build_basis, exact_twirl
from ..twirl.channels import iter_average_twirl, iter_recursive_twirl, random_conjugation
from ..twirl.plan import VARIANTS, TwirlPlan, Variant
from .diagnostics import RunDiagnostics

log = logging.getLogger(__name__)

Mode = Literal["state", "superoperator"]
Scheme = Literal["recursive", "average", "conjugation"]
Metric = Literal["raw-mse", "normalized"]

MODES = ("state", "superoperator")
SCHEMES = ("recursive", "average", "conjugation")
METRICS = ("raw-mse", "normalized")
CURVE_COLUMNS = ["iteration", "mean_sq_error", "std_error", "theory"]

# Below this initial gap the normalized error is undefined.
MIN_GAP = 1e-14


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    register: QuditRegister
    source: UnitarySource
    M_max: int
    mode: Mode = "state"
    scheme: Scheme = "recursive"
    K: int = 2
    variant: Variant = "werner"
    trajectories: int = 1
    seed: int = 0
    metric: Metric = "raw-mse"
    # None: a fresh Hilbert-Schmidt random state per trajectory.
    initial_state: Optional[DensityMatrix] = None
    # None: pick the law that matches the source; "none": no theory column.
    theory_law: Optional[str] = None
    threads: int = 1
    label: str = ""

    @property
    def reference(self) -> str:
        return "exact-superop" if self.mode == "superoperator" else "exact-twirl"

    def plan(self) -> TwirlPlan:
        return TwirlPlan(self.register, self.M_max, self.source, self.K, self.variant)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise InvalidParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.scheme not in SCHEMES:
            raise InvalidParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.metric not in METRICS:
            raise InvalidParameterError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.trajectories < 1:
            raise InvalidParameterError(f"trajectories must be >= 1, got {self.trajectories}")
        if self.threads < 1:
            raise InvalidParameterError(f"threads must be >= 1, got {self.threads}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {self.seed}")
        if self.scheme == "average" and self.M_max < 1:
            raise InvalidParameterError("the average scheme needs M_max >= 1")
        if self.scheme != "recursive" and self.K != 2:
            raise InvalidParameterError(f"K={self.K} only applies to the recursive scheme")
        if self.theory_law not in (None, "none") + LAWS:
            raise InvalidParameterError(f"unknown theory law {self.theory_law!r}")
        if self.theory_law in BIASED_LAWS and self.source.kind != "biased":
            raise InvalidParameterError(f"{self.theory_law} theory needs a biased source")
        if self.register.n_qudits > MAX_PERMUTATION_QUDITS:
            raise ResourceGuardError(
                f"exact reference unavailable for N={self.register.n_qudits} > {MAX_PERMUTATION_QUDITS}"
            )
        if self.mode == "superoperator":
            check_superop_dim(self.register)
            if self.initial_state is not None:
                raise InvalidParameterError("superoperator mode starts from the identity; drop the input state")
        elif self.initial_state is not None:
            self.register.check_state(self.initial_state)
        self.plan()

    def resolved_theory_law(self) -> Optional[str]:
        if self.theory_law == "none":
            return None
        if self.theory_law is not None:
            return self.theory_law
        kind = self.source.kind
        if self.scheme == "average":
            return "avg-algebraic" if kind == "haar" else None
        if self.scheme == "conjugation":
            return "no-mixing" if kind == "haar" else None
        if kind == "haar":
            return "recursive-exponential" if self.K == 2 else "k-branch"
        if kind == "ising" and self.K == 2:
            return "recursive-exponential"
        if kind == "biased" and self.K == 2 and self.source.g.kind == "delta-at":
            return "biased-bound"
        return None

    def describe(self) -> dict:
        return {
            "label": self.label,
            "n_qudits": self.register.n_qudits,
            "local_dim": self.register.local_dim,
            "mode": self.mode,
            "scheme": self.scheme,
            "K": self.K,
            "M_max": self.M_max,
            "variant": self.variant,
            "source": self.source.describe(),
            "trajectories": self.trajectories,
            "seed": self.seed,
            "metric": self.metric,
            "reference": self.reference,
            "initial_state": "fixed" if self.initial_state is not None else "hs-random",
            "theory_law": self.resolved_theory_law(),
            "threads": self.threads,
        }


@dataclass
class ErrorCurve:
    """Per-iteration mean squared error, its standard error and the matching theory value."""
    frame: pd.DataFrame
    metadata: dict = field(default_factory=dict)
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)

    def __post_init__(self) -> None:
        if list(self.frame.columns) != CURVE_COLUMNS:
            raise InvalidParameterError(f"curve columns must be {CURVE_COLUMNS}, got {list(self.frame.columns)}")
        its = self.frame["iteration"].to_numpy()
        if its.size > 1 and np.any(np.diff(its) <= 0):
            raise InvalidParameterError("curve iterations must be strictly increasing")
        if np.any(self.frame["std_error"].to_numpy() < 0):
            raise InvalidParameterError("standard errors must be non-negative")

    @classmethod
    def from_arrays(
        cls,
        iterations: Sequence[int],
        means: Sequence[float],
        std_errors: Optional[Sequence[float]] = None,
        theory: Optional[Sequence[float]] = None,
        metadata: Optional[dict] = None,
    ) -> "ErrorCurve":
        n = len(iterations)
        frame = pd.DataFrame(
            {
                "iteration": np.asarray(iterations, dtype=np.int64),
                "mean_sq_error": np.asarray(means, dtype=float),
                "std_error": np.zeros(n) if std_errors is None else np.asarray(std_errors, dtype=float),
                "theory": np.full(n, np.nan) if theory is None else np.asarray(theory, dtype=float),
            },
            columns=CURVE_COLUMNS,
        )
        return cls(frame, dict(metadata or {}))

    @property
    def iterations(self) -> np.ndarray:
        return self.frame["iteration"].to_numpy()

    @property
    def means(self) -> np.ndarray:
        return self.frame["mean_sq_error"].to_numpy()

    @property
    def std_errors(self) -> np.ndarray:
        return self.frame["std_error"].to_numpy()

    @property
    def theory(self) -> np.ndarray:
        return self.frame["theory"].to_numpy()

    def mean_at(self, iteration: int) -> float:
        row = self.frame.loc[self.frame["iteration"] == iteration, "mean_sq_error"]
        if row.empty:
            raise InvalidParameterError(f"iteration {iteration} not recorded")
        return float(row.iloc[0])

    def __len__(self) -> int:
        return len(self.frame)


@dataclass
class _Trajectory:
    errors: np.ndarray
    gap: float
    unitaries: int
    trace_drift: float


class _Runner:
    """Shared read-only state for one run; ``__call__`` evolves trajectory ``index``."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.reg = cfg.register
        self.basis: PermutationBasis = build_basis(self.reg, cfg.variant)
        self.s_ref: Optional[Superoperator] = None
        if cfg.mode == "superoperator":
            self.s_ref = exact_twirl_superop(self.reg, self.basis)

    def iterations(self) -> np.ndarray:
        if self.cfg.scheme == "average":
            return np.arange(1, self.cfg.M_max + 1)
        return np.arange(0, self.cfg.M_max + 1)

    def unitaries_per_trajectory(self) -> int:
        cfg = self.cfg
        if cfg.scheme == "average":
            return max(cfg.M_max - 1, 0)
        if cfg.scheme == "conjugation":
            return cfg.M_max
        return cfg.M_max * (cfg.K - 1)

    def initial_state(self, rng: RngHandle) -> DensityMatrix:
        if self.cfg.initial_state is not None:
            return self.cfg.initial_state
        return hs_random_density(self.reg.dim, rng)

    def _state_sequence(self, rho: DensityMatrix, rng: RngHandle) -> Iterator[DensityMatrix]:
        cfg = self.cfg
        if cfg.scheme == "average":
            yield from iter_average_twirl(rho, cfg.M_max, cfg.source, self.reg, rng, cfg.variant)
            return
        yield rho
        if cfg.scheme == "recursive":
            yield from iter_recursive_twirl(rho, cfg.plan(), rng)
            return
        state = rho
        for k in range(cfg.M_max):
            u = draw_unitary(cfg.source, k, rng, self.reg.local_dim)
            state = random_conjugation(state, u, self.reg, cfg.variant)
            yield state

    def _superop_sequence(self, rng: RngHandle) -> Iterator[Superoperator]:
        cfg = self.cfg
        if cfg.scheme == "average":
            yield from iter_avg_twirl_superop(cfg.M_max, cfg.source, self.reg, rng, cfg.variant)
            return
        s = Superoperator.identity(self.reg)
        yield s
        if cfg.scheme == "recursive":
            yield from iter_recursive_twirl_superop(cfg.plan(), rng)
            return
        for k in range(cfg.M_max):
            c = conjugation(draw_unitary(cfg.source, k, rng, self.reg.local_dim), self.reg, cfg.variant)
            s = s.with_matrix(c @ s.matrix)
            yield s

    def __call__(self, index: int) -> _Trajectory:
        cfg = self.cfg
        rng = RngHandle(cfg.seed, index)
        errors: List[float] = []
        drift = 0.0
        if cfg.mode == "superoperator":
            gap = superop_error(np.eye(self.reg.superop_dim), self.s_ref)
            last = None
            for s in self._superop_sequence(rng):
                errors.append(superop_error(s, self.s_ref))
                last = s
            if last is not None:
                mixed = last.apply(DensityMatrix.maximally_mixed(self.reg.dim))
                drift = abs(mixed.trace - 1.0)
        else:
            rho = self.initial_state(rng)
            target = exact_twirl(rho, self.basis).matrix
            gap = hs_norm_sq(rho.matrix - target)
            for state in self._state_sequence(rho, rng):
                errors.append(hs_norm_sq(state.matrix - target))
                drift = max(drift, abs(state.trace - 1.0))
        out = np.asarray(errors)
        if cfg.metric == "normalized":
            if gap < MIN_GAP:
                raise InvalidParameterError("normalized error is undefined: the initial state is already twirled")
            out = out / gap
        return _Trajectory(out, gap, self.unitaries_per_trajectory(), drift)


def evolve_state(cfg: ExperimentConfig, index: int = 0) -> Tuple[DensityMatrix, DensityMatrix, DensityMatrix]:
    """(initial state, final state, exact twirl of the initial state) for trajectory ``index``."""
    cfg.validate()
    if cfg.mode != "state":
        raise InvalidParameterError("evolve_state needs mode=state")
    runner = _Runner(cfg)
    rng = RngHandle(cfg.seed, index)
    rho = runner.initial_state(rng)
    final = rho
    for final in runner._state_sequence(rho, rng):
        pass
    return rho, final, exact_twirl(rho, runner.basis)


def run_convergence(cfg: ExperimentConfig) -> ErrorCurve:
    cfg.validate()
    runner = _Runner(cfg)
    log.info(
        "convergence run: N=%d d=%d mode=%s scheme=%s source=%s trajectories=%d M_max=%d",
        cfg.register.n_qudits, cfg.register.local_dim, cfg.mode, cfg.scheme,
        cfg.source.kind, cfg.trajectories, cfg.M_max,
    )
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(runner, range(cfg.trajectories)))

    diagnostics = RunDiagnostics()
    for r in results:
        diagnostics.record_trajectory(r.unitaries, cfg.M_max, r.trace_drift)

    errs = np.vstack([r.errors for r in results])
    means = errs.mean(axis=0)
    if cfg.trajectories > 1:
        std_errors = errs.std(axis=0, ddof=1) / math.sqrt(cfg.trajectories)
    else:
        std_errors = np.zeros_like(means)
    its = runner.iterations()

    law = cfg.resolved_theory_law()
    theory = np.full(its.shape, np.nan)
    mean_gap = float(np.mean([r.gap for r in results]))
    if law is not None:
        scale = 1.0 if cfg.metric == "normalized" else mean_gap
        p_g = cfg.source.p_g if cfg.source.kind == "biased" else None
        curve = theory_curve(law, scale, cfg.M_max, p_g=p_g, K=cfg.K).as_dict()
        theory = np.array([curve.get(int(m), np.nan) for m in its])

    metadata = {
        "config": cfg.describe(),
        "seed": cfg.seed,
        "version": __version__,
        "mean_initial_gap": mean_gap,
        "diagnostics": diagnostics.to_dict(),
    }
    result = ErrorCurve.from_arrays(its, means, std_errors, theory, metadata)
    result.diagnostics = diagnostics
    log.info("convergence run done: final mean error %.3e\n%s", means[-1] if means.size else float("nan"), diagnostics.summary())
    return result


def fit_decay_rate(
    curve: ErrorCurve,
    window: Optional[Tuple[int, int]] = None,
    column: str = "mean_sq_error",
) -> Tuple[float, float]:
    """Least-squares decay of log2(error) against iteration.

    Returns (rate in bits per iteration, coefficient of determination).
    """
    frame = curve.frame
    if window is not None:
        lo, hi = window
        frame = frame[(frame["iteration"] >= lo) & (frame["iteration"] <= hi)]
    if len(frame) < 2:
        raise InvalidParameterError("need at least two iterations in the fit window")
    y = frame[column].to_numpy(dtype=float)
    if not np.all(y > 0):
        raise InvalidParameterError(f"non-positive {column} values in the fit window")
    x = frame["iteration"].to_numpy(dtype=float)
    logy = np.log2(y)
    slope, intercept = np.polyfit(x, logy, 1)
    resid = logy - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    if ss_tot == 0.0:
        # Constant window: exact fit, and polyfit may leave round-off in the slope.
        return 0.0, 1.0
    return float(-slope), 1.0 - ss_res / ss_tot


def decay_per_unitary(curve: ErrorCurve, window: Optional[Tuple[int, int]], K: int) -> float:
    """Fitted decay in nats per unitary consumed (K - 1 unitaries per iteration)."""
    if K < 2:
        raise InvalidParameterError(f"K must be >= 2, got {K}")
    rate, _ = fit_decay_rate(curve, window)
    return rate * math.log(2.0) / (K - 1)
