"""Tests for the invariant bases, the exact twirl and the twirling channels."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from twirlkit.errors import DimensionError, InvalidParameterError, NonCommutingError, ResourceGuardError
from twirlkit.linalg import PAULI, hs_norm_sq, pauli_rotation, tensor_power
from twirlkit.sampling import RngHandle, UnitarySource, haar_unitary, hs_random_density, random_channel
from twirlkit.states import DensityMatrix, QuditRegister
from twirlkit.superop.operators import Superoperator, conjugation
from twirlkit.twirl.basis import (
    build_basis,
    build_isotropic_basis,
    build_permutation_basis,
    exact_twirl,
    isotropic_state,
    max_entangled_projector,
    permutation_operator,
)
from twirlkit.twirl.channels import (
    average_twirl,
    channel_twirl_step,
    circuit_branch_states,
    circuit_twirl_step,
    isotropic_twirl_step,
    iter_recursive_twirl,
    k_branch_twirl_step,
    random_conjugation,
    recursive_channel_twirl,
    recursive_twirl,
    twirl_step,
)
from twirlkit.twirl.ising import default_alpha, ising_energies, ising_phases, ising_unitary
from twirlkit.twirl.plan import TwirlPlan
from twirlkit.twirl.schedules import TWO_QUBIT_C, deterministic_schedule, two_qubit_error
from twirlkit.twirl.stabilizer import (
    ghz_stabilizer_generators,
    ghz_state,
    pauli_product,
    stabilizer_depolarize,
    stabilizer_group_sum,
)

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def _sane(rho: DensityMatrix) -> None:
    assert np.max(np.abs(rho.matrix - rho.matrix.conj().T)) < 1e-10
    assert abs(rho.trace - 1.0) < 1e-10
    assert rho.min_eigenvalue() > -1e-9


@pytest.mark.parametrize("n, d, n_r", [(1, 2, 1), (1, 3, 1), (2, 2, 2), (2, 3, 2), (3, 2, 5), (3, 3, 6)])
def test_basis_size(n, d, n_r):
    assert build_permutation_basis(QuditRegister(n, d)).count == n_r


def test_basis_is_orthonormal_and_hermitian():
    basis = build_permutation_basis(QuditRegister(3, 2))
    v = basis.vectors()
    assert_allclose(v.conj().T @ v, np.eye(basis.count), atol=1e-10)
    for r in basis.operators:
        assert_allclose(r, r.conj().T, atol=1e-12)


def test_two_qudit_basis_spans_symmetric_and_antisymmetric_projectors():
    d = 3
    basis = build_permutation_basis(QuditRegister(2, d))
    swap = permutation_operator((1, 0), d)
    eye = np.eye(d * d)
    r1 = (eye + swap) / np.sqrt(d * (d + 1))
    r2 = (eye - swap) / np.sqrt(d * (d - 1))
    v = basis.vectors()
    span = v @ v.conj().T
    for r in (r1, r2):
        col = r.reshape(-1, order="F")
        assert_allclose(span @ col, col, atol=1e-10)


def test_basis_guard():
    with pytest.raises(ResourceGuardError):
        build_permutation_basis(QuditRegister(7, 2))


def test_exact_twirl_single_qudit_is_maximally_mixed():
    reg = QuditRegister(1, 3)
    rho = hs_random_density(3, RngHandle(1))
    assert_allclose(exact_twirl(rho, build_permutation_basis(reg)).matrix, np.eye(3) / 3, atol=1e-12)


def test_exact_twirl_fixes_singlet():
    basis = build_permutation_basis(QuditRegister(2, 2))
    singlet = DensityMatrix.pure(SINGLET)
    assert_allclose(exact_twirl(singlet, basis).matrix, singlet.matrix, atol=1e-12)


def test_exact_twirl_is_idempotent_and_invariant():
    reg = QuditRegister(3, 2)
    basis = build_permutation_basis(reg)
    rng = RngHandle(2)
    rho = hs_random_density(reg.dim, rng)
    once = exact_twirl(rho, basis)
    assert_allclose(exact_twirl(once, basis).matrix, once.matrix, atol=1e-10)
    u = tensor_power(haar_unitary(2, rng), 3)
    rotated = DensityMatrix(u @ rho.matrix @ u.conj().T)
    assert_allclose(exact_twirl(rotated, basis).matrix, once.matrix, atol=1e-10)
    _sane(once)


def test_exact_twirl_matches_haar_average():
    reg = QuditRegister(2, 2)
    rng = RngHandle(3)
    rho = hs_random_density(4, rng)
    n = 20000
    acc = np.zeros((4, 4), dtype=complex)
    for _ in range(n):
        big = tensor_power(haar_unitary(2, rng), 2)
        acc += big @ rho.matrix @ big.conj().T
    assert_allclose(acc / n, exact_twirl(rho, build_permutation_basis(reg)).matrix, atol=0.02)


def test_exact_twirl_rejects_wrong_register():
    basis = build_permutation_basis(QuditRegister(2, 2))
    with pytest.raises(DimensionError):
        exact_twirl(DensityMatrix.maximally_mixed(8), basis)


def test_twirl_step_examples():
    reg = QuditRegister(2, 2)
    rho = hs_random_density(4, RngHandle(4))
    assert_allclose(twirl_step(rho, np.eye(2), reg).matrix, rho.matrix)
    mixed = DensityMatrix.maximally_mixed(4)
    assert_allclose(twirl_step(mixed, haar_unitary(2, RngHandle(5)), reg).matrix, np.eye(4) / 4, atol=1e-14)
    zero = DensityMatrix.pure([1, 0, 0, 0])
    assert_allclose(twirl_step(zero, PAULI["X"], reg).matrix, np.diag([0.5, 0, 0, 0.5]))


def test_twirl_step_rejects_wrong_unitary():
    reg = QuditRegister(2, 2)
    with pytest.raises(DimensionError):
        twirl_step(DensityMatrix.maximally_mixed(4), np.eye(3), reg)


def test_k_branch_with_one_unitary_is_twirl_step():
    reg = QuditRegister(2, 3)
    rng = RngHandle(6)
    rho = hs_random_density(9, rng)
    u = haar_unitary(3, rng)
    assert_allclose(k_branch_twirl_step(rho, [u], reg).matrix, twirl_step(rho, u, reg).matrix)


def test_average_twirl_single_term_is_identity():
    reg = QuditRegister(2, 2)
    rho = hs_random_density(4, RngHandle(7))
    out = average_twirl(rho, 1, UnitarySource.haar(), reg, RngHandle(8))
    assert_allclose(out.matrix, rho.matrix)
    with pytest.raises(InvalidParameterError):
        average_twirl(rho, 0, UnitarySource.haar(), reg, RngHandle(8))


def test_average_twirl_fixes_werner_states():
    reg = QuditRegister(2, 2)
    werner = exact_twirl(hs_random_density(4, RngHandle(9)), build_permutation_basis(reg))
    out = average_twirl(werner, 6, UnitarySource.haar(), reg, RngHandle(10))
    assert_allclose(out.matrix, werner.matrix, atol=1e-12)


def test_average_twirl_error_is_algebraic():
    reg = QuditRegister(2, 2)
    basis = build_permutation_basis(reg)
    rho = hs_random_density(4, RngHandle(11))
    target = exact_twirl(rho, basis)
    gap = rho.purity() - target.purity()
    rng = RngHandle(12)
    errs = [hs_norm_sq(average_twirl(rho, 10, UnitarySource.haar(), reg, rng).matrix - target.matrix) for _ in range(2000)]
    assert np.mean(errs) == pytest.approx(gap / 10, rel=0.1)


def test_recursive_twirl_zero_iterations():
    reg = QuditRegister(2, 2)
    rho = hs_random_density(4, RngHandle(13))
    plan = TwirlPlan(reg, 0, UnitarySource.haar())
    assert recursive_twirl(rho, plan, RngHandle(0)) is rho
    assert plan.unitaries_needed == 0


def test_recursive_twirl_error_is_exponential():
    reg = QuditRegister(2, 2)
    rho = hs_random_density(4, RngHandle(14))
    target = exact_twirl(rho, build_permutation_basis(reg))
    gap = rho.purity() - target.purity()
    plan = TwirlPlan(reg, 4, UnitarySource.haar())
    errs = [
        hs_norm_sq(recursive_twirl(rho, plan, RngHandle(15, i)).matrix - target.matrix)
        for i in range(2000)
    ]
    assert np.mean(errs) == pytest.approx(gap / 16, rel=0.15)


def test_recursive_twirl_converges_and_stays_a_state():
    reg = QuditRegister(3, 2)
    rho = hs_random_density(8, RngHandle(16))
    target = exact_twirl(rho, build_permutation_basis(reg))
    plan = TwirlPlan(reg, 30, UnitarySource.haar())
    states = list(iter_recursive_twirl(rho, plan, RngHandle(17)))
    assert len(states) == 30
    for s in states:
        _sane(s)
    assert hs_norm_sq(states[-1].matrix - target.matrix) < 1e-5


def test_plan_validation():
    reg = QuditRegister(3, 2)
    with pytest.raises(InvalidParameterError):
        TwirlPlan(reg, 3, UnitarySource.haar(), K=1)
    with pytest.raises(InvalidParameterError):
        TwirlPlan(reg, -1, UnitarySource.haar())
    with pytest.raises(InvalidParameterError):
        TwirlPlan(reg, 3, UnitarySource.haar(), variant="isotropic")
    with pytest.raises(DimensionError):
        TwirlPlan(QuditRegister(2, 3), 3, deterministic_schedule("two-qubit-c"))
    assert TwirlPlan(reg, 6, UnitarySource.haar(), K=4).unitaries_needed == 18


def test_random_conjugation_keeps_error_flat():
    reg = QuditRegister(2, 2)
    rho = hs_random_density(4, RngHandle(18))
    target = exact_twirl(rho, build_permutation_basis(reg))
    gap = rho.purity() - target.purity()
    rng = RngHandle(19)
    errs = [hs_norm_sq(random_conjugation(rho, haar_unitary(2, rng), reg).matrix - target.matrix) for _ in range(200)]
    # Conjugation is an isometry fixing P rho, so the distance never shrinks.
    assert_allclose(errs, gap, rtol=1e-9)


def test_circuit_matches_twirl_step():
    reg = QuditRegister(2, 2)
    rng = RngHandle(20)
    for _ in range(100):
        rho = hs_random_density(4, rng)
        u = haar_unitary(2, rng)
        out, (p0, p1) = circuit_twirl_step(rho, u, reg)
        assert_allclose(out.matrix, twirl_step(rho, u, reg).matrix, atol=1e-12)
        assert abs(p0 - 0.5) < 1e-12 and abs(p1 - 0.5) < 1e-12


def test_circuit_branch_states():
    reg = QuditRegister(2, 2)
    rng = RngHandle(21)
    rho = hs_random_density(4, rng)
    u = haar_unitary(2, rng)
    big = tensor_power(u, 2)
    b0, b1 = circuit_branch_states(rho, u, reg)
    assert_allclose(b0.matrix, rho.matrix, atol=1e-12)
    assert_allclose(b1.matrix, big @ rho.matrix @ big.conj().T, atol=1e-12)


def test_isotropic_step_examples():
    reg = QuditRegister(2, 3)
    rng = RngHandle(22)
    rho = hs_random_density(9, rng)
    assert_allclose(isotropic_twirl_step(rho, np.eye(3), reg).matrix, rho.matrix)
    phi = DensityMatrix(max_entangled_projector(3))
    assert_allclose(isotropic_twirl_step(phi, haar_unitary(3, rng), reg).matrix, phi.matrix, atol=1e-12)
    with pytest.raises(DimensionError):
        isotropic_twirl_step(DensityMatrix.maximally_mixed(8), np.eye(2), QuditRegister(3, 2))


def test_isotropic_recursion_reaches_isotropic_state():
    reg = QuditRegister(2, 2)
    rng = RngHandle(23)
    rho = hs_random_density(4, rng)
    fidelity = float(np.trace(max_entangled_projector(2) @ rho.matrix).real)
    plan = TwirlPlan(reg, 40, UnitarySource.haar(), variant="isotropic")
    out = recursive_twirl(rho, plan, rng)
    assert_allclose(out.matrix, isotropic_state(fidelity, 2).matrix, atol=1e-4)
    basis = build_isotropic_basis(reg)
    assert_allclose(exact_twirl(rho, basis).matrix, isotropic_state(fidelity, 2).matrix, atol=1e-10)


def test_build_basis_dispatch():
    reg = QuditRegister(2, 2)
    assert build_basis(reg, "isotropic").variant == "isotropic"
    assert build_basis(reg).variant == "werner"


def test_channel_twirl_of_identity_is_identity():
    reg = QuditRegister(2, 2)
    ident = Superoperator.identity(reg)
    out = channel_twirl_step(ident, haar_unitary(2, RngHandle(24)), reg)
    assert_allclose(out.matrix, ident.matrix, atol=1e-12)


def test_channel_twirl_of_conjugation():
    reg = QuditRegister(1, 2)
    rng = RngHandle(25)
    v, u = haar_unitary(2, rng), haar_unitary(2, rng)
    lam = Superoperator(conjugation(v, reg), reg)
    expected = 0.5 * (conjugation(v, reg) + conjugation(u.conj().T @ v @ u, reg))
    assert_allclose(channel_twirl_step(lam, u, reg).matrix, expected, atol=1e-12)


def test_recursive_channel_twirl_preserves_trace():
    reg = QuditRegister(1, 2)
    rng = RngHandle(26)
    lam = Superoperator(random_channel(2, 3, rng), reg)
    out = recursive_channel_twirl(lam, 30, UnitarySource.haar(), reg, rng)
    assert abs(out.apply(DensityMatrix.maximally_mixed(2)).trace - 1.0) < 1e-10


def test_ghz_is_stabilized():
    rho = ghz_state(3)
    gens = ghz_stabilizer_generators(3)
    assert_allclose(stabilizer_depolarize(rho, gens).matrix, rho.matrix, atol=1e-12)


def test_stabilizer_sequence_matches_group_sum():
    gens = ghz_stabilizer_generators(3)
    rho = hs_random_density(8, RngHandle(27))
    seq = stabilizer_depolarize(rho, gens)
    assert_allclose(seq.matrix, stabilizer_group_sum(rho, gens).matrix, atol=1e-12)
    for g in gens:
        assert_allclose(g @ seq.matrix, seq.matrix @ g, atol=1e-10)


def test_stabilizer_rejects_bad_generators():
    rho = DensityMatrix.maximally_mixed(2)
    with pytest.raises(NonCommutingError):
        stabilizer_depolarize(rho, [PAULI["X"], PAULI["Z"]])
    with pytest.raises(NonCommutingError):
        stabilizer_depolarize(rho, [2 * PAULI["I"]])
    with pytest.raises(DimensionError):
        stabilizer_depolarize(rho, [pauli_product("XX")])
    with pytest.raises(InvalidParameterError):
        pauli_product("XQ")


def test_schedules():
    two = deterministic_schedule("two-qubit-c", 0.0)
    for u in two.cycle:
        assert_allclose(u, np.eye(2))
    three = deterministic_schedule("three-qubit-xyz")
    assert len(three.cycle) == 3
    assert_allclose(three.cycle[1], pauli_rotation("y", 2 * np.pi / 5))
    t = 2 * np.pi / 3
    assert_allclose(three.cycle[0], [[np.cos(t), 1j * np.sin(t)], [1j * np.sin(t), np.cos(t)]])


def test_two_qubit_schedule_beats_random_theory():
    assert two_qubit_error(TWO_QUBIT_C, 50) < 14 * 2.0 ** -50


def test_degenerate_schedule_stalls():
    assert two_qubit_error(0.0, 10) == pytest.approx(14.0)


def test_ising_layer():
    energies = ising_energies(3)
    assert energies[0] == 3
    assert energies[1] == -1
    assert energies[0b101] == -1
    phases = ising_phases(3, 1.1)
    assert_allclose(np.abs(phases), 1.0)
    assert_allclose(phases, np.exp(1.1j * energies))
    u = ising_unitary(4, default_alpha(4), RngHandle(28))
    assert u.shape == (16, 16)
    assert_allclose(u.conj().T @ u, np.eye(16), atol=1e-10)
    with pytest.raises(InvalidParameterError):
        default_alpha(5)
