"""Tests for moment operators and trace-polynomial integrals over U(d)."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from twirlkit.errors import DimensionError, InvalidParameterError, ResourceGuardError
from twirlkit.integrate import (
    as_projector,
    averaged_moment_operator,
    moment_operator,
    to_twirl_superop,
    trace_integral,
)
from twirlkit.linalg import PAULI
from twirlkit.sampling import RngHandle, UnitarySource, ginibre
from twirlkit.states import QuditRegister
from twirlkit.superop.operators import exact_twirl_superop
from twirlkit.twirl.basis import build_permutation_basis, permutation_operator


def test_trivial_moment_is_identity():
    mop = moment_operator(0, 0, 3, iters=10)
    assert_allclose(mop.matrix, [[1.0]])
    assert mop.iterations_done == 10


def test_zero_iterations_keeps_identity():
    mop = moment_operator(1, 0, 2, iters=0)
    assert_allclose(mop.matrix, np.eye(2))
    assert mop.convergence == ()


@pytest.mark.parametrize("m, n", [(1, 0), (0, 1), (2, 1)])
def test_unbalanced_moments_vanish(m, n):
    mop = moment_operator(m, n, 2, iters=200, rng=RngHandle(1))
    assert np.max(np.abs(mop.matrix)) < 1e-3


@pytest.mark.parametrize("d", [2, 3])
def test_balanced_moment_is_swap_over_d(d):
    swap = permutation_operator((1, 0), d)
    runs = [moment_operator(1, 1, d, iters=200, rng=RngHandle(seed)).matrix for seed in range(9)]
    median = np.median(np.real(runs), axis=0) + 1j * np.median(np.imag(runs), axis=0)
    assert np.max(np.abs(median - swap / d)) < 1e-3


def test_convergence_series_shrinks():
    mop = moment_operator(1, 1, 2, iters=60, rng=RngHandle(2))
    assert len(mop.convergence) == 60
    assert mop.convergence[-1] < 1e-6 < mop.convergence[0]


def test_deterministic_source_is_accepted():
    src = UnitarySource.deterministic([PAULI["X"], PAULI["Z"]])
    mop = moment_operator(1, 0, 2, iters=2, source=src)
    # (1 + Z)(1 + X) / 4
    expected = 0.25 * (np.eye(2) + PAULI["Z"]) @ (np.eye(2) + PAULI["X"])
    assert_allclose(mop.matrix, expected)


def test_trace_integral_of_identities():
    for d in (2, 3):
        mop = moment_operator(1, 1, d, iters=200, rng=RngHandle(3))
        assert trace_integral([np.eye(d)], [np.eye(d)], mop) == pytest.approx(1.0, abs=1e-3)


def test_trace_integral_first_moment_vanishes():
    mop = moment_operator(1, 0, 3, iters=200, rng=RngHandle(4))
    a = ginibre(3, 3, RngHandle(5))
    assert abs(trace_integral([a], [], mop)) < 1e-3


def test_trace_integral_reproduces_trace_of_product():
    d = 3
    mop = moment_operator(1, 1, d, iters=200, rng=RngHandle(6))
    rng = RngHandle(7)
    for _ in range(20):
        a, b = ginibre(d, d, rng), ginibre(d, d, rng)
        assert abs(trace_integral([a], [b], mop) - np.trace(a @ b) / d) < 1e-3


def test_trace_integral_is_linear():
    d = 2
    mop = moment_operator(1, 1, d, iters=30, rng=RngHandle(8))
    rng = RngHandle(9)
    a1, a2, b = ginibre(d, d, rng), ginibre(d, d, rng), ginibre(d, d, rng)
    alpha, beta = 0.3 - 1.2j, 2.5
    lhs = trace_integral([alpha * a1 + beta * a2], [b], mop)
    rhs = alpha * trace_integral([a1], [b], mop) + beta * trace_integral([a2], [b], mop)
    assert abs(lhs - rhs) < 1e-12


def test_trace_integral_shape_checks():
    mop = moment_operator(1, 1, 2, iters=5)
    with pytest.raises(DimensionError):
        trace_integral([np.eye(2)], [], mop)
    with pytest.raises(DimensionError):
        trace_integral([np.eye(3)], [np.eye(3)], mop)


def test_projector_limit():
    mop = moment_operator(2, 2, 2, iters=200, rng=RngHandle(10))
    g = as_projector(mop)
    assert np.max(np.abs(g @ g - g)) < 1e-2
    assert np.max(np.abs(g - g.conj().T)) < 1e-2


def test_balanced_moment_reorders_onto_exact_twirl():
    reg = QuditRegister(2, 2)
    s_p = exact_twirl_superop(reg, build_permutation_basis(reg))
    s = to_twirl_superop(moment_operator(2, 2, 2, iters=200, rng=RngHandle(11)))
    assert s.register == reg
    assert np.max(np.abs(s.matrix - s_p.matrix)) < 1e-6
    with pytest.raises(InvalidParameterError):
        to_twirl_superop(moment_operator(1, 0, 2, iters=1))


def test_averaged_runs_are_reproducible():
    rng = RngHandle(12, 5)
    avg = averaged_moment_operator(1, 1, 2, iters=20, rng=rng, runs=3, threads=2)
    manual = sum(moment_operator(1, 1, 2, 20, rng=RngHandle(12, 5 + r)).matrix for r in range(3)) / 3
    assert_allclose(avg.matrix, manual, atol=1e-15)
    with pytest.raises(InvalidParameterError):
        averaged_moment_operator(1, 1, 2, runs=0)


def test_guards():
    with pytest.raises(ResourceGuardError):
        moment_operator(3, 3, 5, iters=1)
    with pytest.raises(InvalidParameterError):
        moment_operator(-1, 0, 2)
    with pytest.raises(InvalidParameterError):
        moment_operator(1, 1, 2, iters=-1)
