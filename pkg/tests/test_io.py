"""Tests for matrix files, state loading and the source text format."""
import json

import numpy as np
import pytest

from twirlkit.errors import DimensionError, InvalidParameterError, InvalidStateError, MatrixFormatError
from twirlkit.io import (
    load_matrix,
    load_matrix_list,
    load_state,
    metadata_path,
    read_matrix_file,
    save_matrix,
    save_matrix_list,
    save_state,
    save_superop,
)
from twirlkit.linalg import PAULI
from twirlkit.sampling import RngHandle, ginibre, hs_random_density
from twirlkit.sources import parse_source
from twirlkit.states import DensityMatrix, QuditRegister
from twirlkit.twirl.schedules import TWO_QUBIT_C


def test_matrix_reload_is_entrywise_identical(tmp_path):
    m = ginibre(3, 4, RngHandle(1))
    path = save_matrix(tmp_path / "m.json", m)
    assert np.array_equal(load_matrix(path), m)


def test_matrix_file_is_row_major(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"rows": 2, "cols": 2, "data": [[1, 0], [2, 0], [3, 0], [4, 1]]}))
    assert np.array_equal(load_matrix(path), np.array([[1, 2], [3, 4 + 1j]]))


def test_shape_mismatch_is_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"rows": 2, "cols": 2, "data": [[1, 0], [0, 0], [0, 0]]}))
    with pytest.raises(MatrixFormatError):
        load_matrix(path)


@pytest.mark.parametrize("text", ["not json", "{\"rows\": 1}", "{\"rows\": 1, \"cols\": 1, \"data\": [[1, 0]], \"x\": 2}"])
def test_malformed_files_are_rejected(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(MatrixFormatError):
        load_matrix(path)


def test_missing_file(tmp_path):
    with pytest.raises(MatrixFormatError):
        load_matrix(tmp_path / "absent.json")


def test_state_round_trip_and_validation(tmp_path):
    rho = hs_random_density(4, RngHandle(2))
    path = save_state(tmp_path / "rho.json", rho)
    assert read_matrix_file(path).kind == "state"
    assert np.array_equal(load_state(path, QuditRegister(2, 2)).matrix, rho.matrix)
    with pytest.raises(DimensionError):
        load_state(path, QuditRegister(1, 3))
    save_matrix(tmp_path / "neg.json", np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        load_state(tmp_path / "neg.json")


def test_superop_file_records_register(tmp_path):
    reg = QuditRegister(1, 2)
    path = save_superop(tmp_path / "s.json", np.eye(4), reg)
    f = read_matrix_file(path)
    assert (f.kind, f.n_qudits, f.local_dim) == ("superoperator", 1, 2)
    path.write_text(json.dumps({**json.loads(path.read_text()), "local_dim": 3}))
    with pytest.raises(MatrixFormatError):
        read_matrix_file(path)


def test_matrix_lists(tmp_path):
    mats = [PAULI["X"], PAULI["Z"]]
    path = save_matrix_list(tmp_path / "cycle.json", mats, "unitary")
    loaded = load_matrix_list(path)
    assert len(loaded) == 2
    assert np.array_equal(loaded[1], PAULI["Z"])
    single = save_matrix(tmp_path / "one.json", PAULI["Y"])
    assert len(load_matrix_list(single)) == 1
    (tmp_path / "empty.json").write_text("[]")
    with pytest.raises(MatrixFormatError):
        load_matrix_list(tmp_path / "empty.json")


def test_metadata_path():
    assert metadata_path("runs/fig2.csv").name == "fig2.meta.json"


def test_density_matrix_is_read_only():
    m = np.eye(2) / 2
    rho = DensityMatrix(m)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0
    m[0, 0] = 1.0
    assert rho.matrix[0, 0] == 0.5


def test_parse_sources(tmp_path):
    assert parse_source("haar", 2).kind == "haar"
    assert parse_source("haar:special", 2).special
    sched = parse_source("schedule:two-qubit", 2)
    assert sched.label == f"two-qubit-c:c={TWO_QUBIT_C!r}"
    assert parse_source("schedule:two-qubit,c=0.5", 2).label == "two-qubit-c:c=0.5"
    assert len(parse_source("schedule:three-qubit", 2).cycle) == 3
    biased = parse_source("biased:pg=0.5,g=narrow,eps=0.2", 3)
    assert (biased.p_g, biased.g.kind, biased.g.eps) == (0.5, "narrow-haar", 0.2)
    assert parse_source("biased:pg=0.1", 3).g.unitary.shape == (3, 3)
    save_matrix(tmp_path / "v.json", PAULI["X"])
    assert np.array_equal(parse_source(f"biased:pg=1,v={tmp_path / 'v.json'}", 2).g.unitary, PAULI["X"])
    ising = parse_source("ising:n=3", 8)
    assert (ising.n_qubits, ising.alpha) == (3, 1.10)
    save_matrix_list(tmp_path / "c.json", [PAULI["X"], PAULI["Z"]])
    assert parse_source(f"cycle:{tmp_path / 'c.json'}", 2).local_dim() == 2


@pytest.mark.parametrize(
    "spec",
    ["gauss", "haar:fast", "biased:g=delta", "biased:pg=x", "biased:pg=0.5,g=wide", "ising:n=x", "schedule:four", "cycle:", "biased:pg"],
)
def test_parse_source_errors(spec):
    with pytest.raises(InvalidParameterError):
        parse_source(spec, 2)
