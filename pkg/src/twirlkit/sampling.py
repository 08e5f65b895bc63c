"""Seedable randomness: Haar unitaries, Ginibre matrices, Hilbert-Schmidt states
and the unitary sources that feed the twirling channels."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.linalg import qr, schur

from .errors import DimensionError, InvalidParameterError
from .linalg import ComplexMatrix, as_matrix, ensure_unitary
from .states import DensityMatrix

log = logging.getLogger(__name__)

SourceKind = Literal["haar", "biased", "deterministic-cycle", "ising"]
DEFAULT_NARROW_EPS = 0.1


class RngHandle:
    """One reproducible random stream.

    The stream is keyed by ``(seed, stream_id)``; both are mixed by
    ``numpy.random.SeedSequence(seed, spawn_key=(stream_id,))`` into the state
    of a PCG64 generator. A handle belongs to one worker at a time;
    :meth:`spawn` is the only way to hand out parallel streams.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise InvalidParameterError("seed and stream_id must be non-negative 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, stream_id: int) -> "RngHandle":
        return RngHandle(self.seed, stream_id)

    def __repr__(self) -> str:
        return f"RngHandle(seed={self.seed}, stream_id={self.stream_id})"


def ginibre(rows: int, cols: int, rng: RngHandle) -> ComplexMatrix:
    """i.i.d. standard complex Gaussians normalised to E|z|^2 = 1."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"Ginibre shape must be positive, got {rows}x{cols}")
    g = rng.gen.standard_normal((rows, cols, 2))
    return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)


def haar_unitary(d: int, rng: RngHandle) -> ComplexMatrix:
    """Haar-distributed U(d) element: QR of a Ginibre matrix with R's diagonal made positive."""
    if d < 1:
        raise DimensionError(f"unitary dimension must be >= 1, got {d}")
    q, r = qr(ginibre(d, d, rng))
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases


def special_unitary(u: ComplexMatrix) -> ComplexMatrix:
    """Project a U(d) sample onto SU(d) by removing a d-th root of its determinant."""
    d = u.shape[0]
    det = np.linalg.det(u)
    return u * np.exp(-1j * np.angle(det) / d)


def hs_random_density(dim: int, rng: RngHandle) -> DensityMatrix:
    """Density matrix distributed by the Hilbert-Schmidt measure: G G^dagger / Tr."""
    if dim < 1:
        raise DimensionError(f"state dimension must be >= 1, got {dim}")
    g = ginibre(dim, dim, rng)
    w = g @ g.conj().T
    w = 0.5 * (w + w.conj().T)
    return DensityMatrix(w / np.trace(w).real)


def random_channel(dim: int, kraus_count: int, rng: RngHandle) -> ComplexMatrix:
    """Superoperator matrix of a random CPTP map (Kraus operators cut from a Haar isometry)."""
    if kraus_count < 1:
        raise InvalidParameterError(f"kraus_count must be >= 1, got {kraus_count}")
    iso = haar_unitary(dim * kraus_count, rng)[:, :dim]
    s = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for k in range(kraus_count):
        kraus = iso[k * dim:(k + 1) * dim, :]
        s += np.kron(kraus.conj(), kraus)
    return s


@dataclass(frozen=True, eq=False)
class GSpec:
    """The biased component g(U) of a mixture source."""
    kind: Literal["delta-at", "narrow-haar"]
    unitary: Optional[ComplexMatrix] = None
    eps: float = DEFAULT_NARROW_EPS

    def __post_init__(self) -> None:
        if self.kind == "delta-at":
            if self.unitary is None:
                raise InvalidParameterError("delta-at needs a unitary")
            object.__setattr__(self, "unitary", ensure_unitary(self.unitary))
        elif self.kind == "narrow-haar":
            if not self.eps > 0:
                raise InvalidParameterError(f"narrow-haar eps must be > 0, got {self.eps}")
        else:
            raise InvalidParameterError(f"unknown g kind {self.kind!r}")

    def sample(self, d: int, rng: RngHandle) -> ComplexMatrix:
        if self.kind == "delta-at":
            if self.unitary.shape != (d, d):
                raise DimensionError(f"delta-at unitary has shape {self.unitary.shape}, need {d}x{d}")
            return self.unitary
        # Scale the Hermitian generator of a Haar draw: W = V e^{i theta} V^dagger -> V e^{i eps theta} V^dagger.
        w = haar_unitary(d, rng)
        t, v = schur(w, output="complex")
        theta = np.angle(np.diag(t))
        return (v * np.exp(1j * self.eps * theta)) @ v.conj().T


def default_delta(d: int) -> GSpec:
    """delta-at-V with V the first Haar draw of seed 0."""
    return GSpec("delta-at", haar_unitary(d, RngHandle(0)))


@dataclass(frozen=True, eq=False)
class UnitarySource:
    """Tagged generator of unitaries.

    haar: Haar samples. biased: with probability p_g a draw from ``g``, else Haar.
    deterministic-cycle: ``cycle[step % len(cycle)]``. ising: one Ising layer on
    ``n_qubits`` qubits with coupling ``alpha``.
    """
    kind: SourceKind
    p_g: float = 0.0
    g: Optional[GSpec] = None
    cycle: tuple = field(default_factory=tuple)
    n_qubits: int = 0
    alpha: float = 0.0
    special: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind == "biased":
            if not 0.0 <= self.p_g <= 1.0:
                raise InvalidParameterError(f"p_g must lie in [0, 1], got {self.p_g}")
            if self.g is None:
                raise InvalidParameterError("biased source needs a g specification")
        elif self.kind == "deterministic-cycle":
            if not self.cycle:
                raise InvalidParameterError("deterministic cycle must list at least one unitary")
            mats = tuple(ensure_unitary(as_matrix(u)) for u in self.cycle)
            shapes = {m.shape for m in mats}
            if len(shapes) != 1:
                raise DimensionError(f"cycle unitaries have mixed shapes {sorted(shapes)}")
            object.__setattr__(self, "cycle", mats)
        elif self.kind == "ising":
            if self.n_qubits < 2:
                raise InvalidParameterError(f"ising source needs n_qubits >= 2, got {self.n_qubits}")
        elif self.kind != "haar":
            raise InvalidParameterError(f"unknown source kind {self.kind!r}")

    @classmethod
    def haar(cls, *, special: bool = False) -> "UnitarySource":
        return cls("haar", special=special)

    @classmethod
    def biased(cls, p_g: float, g: GSpec) -> "UnitarySource":
        return cls("biased", p_g=p_g, g=g)

    @classmethod
    def deterministic(cls, unitaries: Sequence[ComplexMatrix], label: str = "") -> "UnitarySource":
        return cls("deterministic-cycle", cycle=tuple(unitaries), label=label)

    @classmethod
    def ising(cls, n_qubits: int, alpha: float) -> "UnitarySource":
        return cls("ising", n_qubits=n_qubits, alpha=alpha)

    @property
    def is_random(self) -> bool:
        return self.kind != "deterministic-cycle"

    def local_dim(self) -> Optional[int]:
        """Dimension fixed by the source itself, if any."""
        if self.kind == "deterministic-cycle":
            return int(self.cycle[0].shape[0])
        if self.kind == "ising":
            return 2 ** self.n_qubits
        return None

    def describe(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "biased":
            out.update(p_g=self.p_g, g=self.g.kind)
            if self.g.kind == "narrow-haar":
                out["eps"] = self.g.eps
        elif self.kind == "deterministic-cycle":
            out.update(length=len(self.cycle), label=self.label)
        elif self.kind == "ising":
            out.update(n_qubits=self.n_qubits, alpha=self.alpha)
        if self.special:
            out["special"] = True
        return out


def draw_unitary(source: UnitarySource, step: int, rng: RngHandle, dim: int) -> ComplexMatrix:
    """Next unitary from ``source`` for iteration ``step`` acting on a ``dim``-level qudit."""
    fixed = source.local_dim()
    if fixed is not None and fixed != dim:
        raise DimensionError(f"source produces {fixed}x{fixed} unitaries, register needs {dim}x{dim}")

    if source.kind == "haar":
        u = haar_unitary(dim, rng)
        return special_unitary(u) if source.special else u
    if source.kind == "biased":
        # p_g at 0 or 1 draws no coin, so p_g=0 replays the plain Haar stream.
        if source.p_g >= 1.0 or (source.p_g > 0.0 and rng.gen.random() < source.p_g):
            return source.g.sample(dim, rng)
        return haar_unitary(dim, rng)
    if source.kind == "deterministic-cycle":
        return source.cycle[step % len(source.cycle)]
    from .twirl.ising import ising_unitary

    return ising_unitary(source.n_qubits, source.alpha, rng)
