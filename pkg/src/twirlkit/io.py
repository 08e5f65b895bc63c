"""File formats: JSON matrices, curve CSVs and run metadata.

A matrix file is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` with the
entries in row-major order. Floats are written with Python's shortest
round-trip repr, so a reload is entrywise identical.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from .errors import MatrixFormatError
from .linalg import ComplexMatrix, as_matrix
from .states import DensityMatrix, QuditRegister

log = logging.getLogger(__name__)

MatrixKind = Literal["matrix", "state", "unitary", "superoperator"]
CSV_FLOAT_FORMAT = "%.17g"


class MatrixFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: MatrixKind = "matrix"
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    data: List[Tuple[float, float]]
    n_qudits: Optional[int] = Field(default=None, ge=1)
    local_dim: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _check_shape(self) -> "MatrixFile":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(f"data has {len(self.data)} entries, expected rows*cols = {self.rows * self.cols}")
        if not all(np.isfinite(re) and np.isfinite(im) for re, im in self.data):
            raise ValueError("data contains non-finite entries")
        if self.kind == "superoperator":
            if self.n_qudits is None or self.local_dim is None:
                raise ValueError("superoperator files must record n_qudits and local_dim")
            if self.rows != self.local_dim ** (2 * self.n_qudits) or self.cols != self.rows:
                raise ValueError("superoperator shape does not match d^(2N)")
        return self

    def to_array(self) -> ComplexMatrix:
        pairs = np.asarray(self.data, dtype=float).reshape(self.rows, self.cols, 2)
        return pairs[..., 0] + 1j * pairs[..., 1]

    @classmethod
    def from_array(cls, m: ComplexMatrix, kind: MatrixKind = "matrix", **extra) -> "MatrixFile":
        m = as_matrix(m)
        data = [(float(z.real), float(z.imag)) for z in m.reshape(-1)]
        return cls(kind=kind, rows=m.shape[0], cols=m.shape[1], data=data, **extra)


_MATRIX_LIST = TypeAdapter(List[MatrixFile])


def _read(path: Path) -> object:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise MatrixFormatError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise MatrixFormatError(f"{path} is not valid JSON: {e}") from e


def _write(path: Path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload) + "\n", encoding="utf-8")


def read_matrix_file(path: Path) -> MatrixFile:
    try:
        return MatrixFile.model_validate(_read(path))
    except ValidationError as e:
        raise MatrixFormatError(f"{path}: {e.errors()[0]['msg']}") from e


def load_matrix(path: Path) -> ComplexMatrix:
    return read_matrix_file(path).to_array()


def load_matrix_list(path: Path) -> List[ComplexMatrix]:
    """A JSON array of matrix objects, or a single matrix object as a one-element list."""
    raw = _read(path)
    try:
        if isinstance(raw, list):
            files = _MATRIX_LIST.validate_python(raw)
        else:
            files = [MatrixFile.model_validate(raw)]
    except ValidationError as e:
        raise MatrixFormatError(f"{path}: {e.errors()[0]['msg']}") from e
    if not files:
        raise MatrixFormatError(f"{path}: empty matrix list")
    return [f.to_array() for f in files]


def load_state(path: Path, reg: Optional[QuditRegister] = None) -> DensityMatrix:
    rho = DensityMatrix.checked(load_matrix(path))
    if reg is not None:
        reg.check_state(rho)
    return rho


def save_matrix(path: Path, m: ComplexMatrix, kind: MatrixKind = "matrix", **extra) -> Path:
    _write(path, MatrixFile.from_array(m, kind, **extra).model_dump(exclude_none=True))
    return Path(path)


def save_matrix_list(path: Path, mats: List[ComplexMatrix], kind: MatrixKind = "matrix") -> Path:
    _write(path, [MatrixFile.from_array(m, kind).model_dump(exclude_none=True) for m in mats])
    return Path(path)


def save_state(path: Path, rho: DensityMatrix) -> Path:
    return save_matrix(path, rho.matrix, "state")


def save_superop(path: Path, matrix: ComplexMatrix, reg: QuditRegister) -> Path:
    return save_matrix(path, matrix, "superoperator", n_qudits=reg.n_qudits, local_dim=reg.local_dim)


def write_json(path: Path, data: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=str) + "\n", encoding="utf-8")


def write_metadata(path: Path, data: dict) -> None:
    """Run metadata; ``written_at`` is the only field that changes between identical runs."""
    out = dict(data)
    out["written_at"] = dt.datetime.now(dt.timezone.utc).isoformat()
    write_json(path, out)


def write_curve_csv(path: Path, frame) -> None:
    """``iteration,mean_sq_error,std_error,theory``; missing theory values are left empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="")


def metadata_path(csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.json")
