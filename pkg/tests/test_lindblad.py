import numpy as np
import pytest

from uppump.hilbert import ModeTruncation, Operator, number, position
from uppump.lindblad import (DensityMatrix, DissipatorSet, LindbladGenerator,
                             NumericalInvariantError, TruncationLeakageError, evolve,
                             exact_propagate, iter_evolve, liouvillian, read_snapshot, rhs,
                             write_snapshot)
from uppump.model import CubicCoupling, Mode, ModeSet, build_hamiltonian


def fock(trunc, n):
    m = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    m[n, n] = 1.0
    return DensityMatrix(m, trunc)


def random_state(trunc, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(trunc.dim, trunc.dim)) + 1j * rng.normal(size=(trunc.dim, trunc.dim))
    m = a @ a.conj().T
    return DensityMatrix(m / np.trace(m).real, trunc)


def zero_h(trunc):
    return Operator(np.zeros((trunc.dim, trunc.dim)), trunc)


# --- rhs -------------------------------------------------------------------

def test_rhs_mixed_state_is_stationary_without_dissipation():
    t = ModeTruncation((3,))
    rho = DensityMatrix(np.eye(4) / 4, t)
    h = Operator(np.diag([0.0, 1.0, 2.0, 3.0]), t)
    assert np.all(rhs(rho, h, DissipatorSet.none(1)) == 0)


def test_rhs_pure_decay_and_pumping():
    t = ModeTruncation((1,))
    out = rhs(fock(t, 1), zero_h(t), DissipatorSet([0.7], [0.0]))
    np.testing.assert_allclose(out, 0.7 * np.diag([1.0, -1.0]), atol=1e-16)
    t3 = ModeTruncation((2,))
    out = rhs(fock(t3, 0), zero_h(t3), DissipatorSet([0.0], [0.3]))
    np.testing.assert_allclose(out, 0.3 * np.diag([-1.0, 1.0, 0.0]), atol=1e-16)


def test_rhs_shape_errors():
    t = ModeTruncation((1,))
    with pytest.raises(ValueError):
        rhs(fock(t, 0), zero_h(ModeTruncation((2,))), DissipatorSet.none(1))
    with pytest.raises(ValueError):
        rhs(fock(t, 0), zero_h(t), DissipatorSet.none(2))
    with pytest.raises(ValueError):
        DissipatorSet([1.0], [-0.1])
    with pytest.raises(ValueError):
        DissipatorSet([1.0, 2.0], [0.1])


# --- fast generator ----------------------------------------------------------

@pytest.mark.parametrize("cutoffs", [(1,), (3,), (2, 1), (2, 3, 1)])
def test_generator_matches_dense_rhs(cutoffs):
    t = ModeTruncation(cutoffs)
    n = len(cutoffs)
    modes = ModeSet(tuple(Mode(1.0 + 0.3 * k, c, drive=0.2 * k, kappa=0.1)
                          for k, c in enumerate(cutoffs)), 300.0)
    couplings = [CubicCoupling((0, 0, n - 1), 0.05)]
    h = build_hamiltonian(modes, couplings, t)
    rng = np.random.default_rng(1)
    diss = DissipatorSet(rng.uniform(0.1, 1.0, n), rng.uniform(0.0, 0.5, n))
    rho = random_state(t, 2)
    gen = LindbladGenerator(h, diss)
    assert gen.real
    np.testing.assert_allclose(gen(rho.matrix), rhs(rho, h, diss), rtol=0, atol=1e-14)


def test_generator_complex_hamiltonian_and_jump_reference():
    t = ModeTruncation((2, 2))
    rng = np.random.default_rng(3)
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    h = Operator(a + a.conj().T, t)
    diss = DissipatorSet([0.4, 0.9], [0.2, 0.1])
    rho = random_state(t, 4)
    gen = LindbladGenerator(h, diss)
    assert not gen.real
    np.testing.assert_allclose(gen(rho.matrix), rhs(rho, h, diss), rtol=0, atol=1e-13)
    # jump part alone: total minus the coherent and loss parts
    b = [np.diag(np.sqrt(np.arange(1, 3)), 1)]
    eye = np.eye(3)
    ops = [np.kron(b[0], eye), np.kron(eye, b[0])]
    ref = sum(diss.down[k] * ops[k] @ rho.matrix @ ops[k].T
              + diss.up[k] * ops[k].T @ rho.matrix @ ops[k] for k in range(2))
    np.testing.assert_allclose(gen.jump_terms(rho.matrix), ref, atol=1e-15)


def test_generator_time_dependent_drive():
    t = ModeTruncation((2, 1))
    modes = ModeSet((Mode(1.0, 2, kappa=0.2), Mode(1.7, 1, kappa=0.1)), 200.0)
    h = build_hamiltonian(modes, trunc=t)
    diss = DissipatorSet.from_modes(modes)
    gen = LindbladGenerator(h, diss, drive=lambda tau: (np.cos(tau), 0.5))
    rho = random_state(t, 5)
    tau = 0.8
    h_tau = h + position(t, 0) * np.cos(tau) + position(t, 1) * 0.5
    np.testing.assert_allclose(gen(rho.matrix, tau), rhs(rho, h_tau, diss), atol=1e-14)


# --- evolve ---------------------------------------------------------------

def test_energy_eigenstate_is_stationary():
    t = ModeTruncation((3,))
    res = evolve(fock(t, 1), number(t, 0), DissipatorSet.none(1), 2.0, 0.01, 50)
    np.testing.assert_allclose(res.populations[:, 0], 1.0, atol=1e-14)
    off = res.final.matrix - np.diag(np.diag(res.final.matrix))
    assert np.abs(off).max() < 1e-14


@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_analytic_decay(gamma):
    t = ModeTruncation((1,))
    dt = 0.01 / gamma
    res = evolve(fock(t, 1), zero_h(t), DissipatorSet([gamma], [0.0]), 2.0 / gamma, dt, 1,
                 leak_limit=None)
    np.testing.assert_allclose(res.populations[:, 0], np.exp(-gamma * res.taus), rtol=1e-6)


def test_rate_equation_fixed_point():
    down, up = 1.0, 0.4
    t = ModeTruncation((40,))
    res = evolve(DensityMatrix.vacuum(t), zero_h(t), DissipatorSet([down], [up]), 40.0, 0.01,
                 1000, leak_limit=1e-6)
    assert res.populations[-1, 0] == pytest.approx(up / (down - up), abs=1e-4)
    assert res.leakage[-1, 0] < 1e-12


def test_oracle_agreement_on_decay():
    t = ModeTruncation((1,))
    g = 0.8
    rho0, h, diss = fock(t, 1), zero_h(t), DissipatorSet([g], [0.0])
    exact = exact_propagate(rho0, h, diss, 1 / g)
    res = evolve(rho0, h, diss, 1 / g, 0.01 / g, 10, leak_limit=None)
    np.testing.assert_allclose(res.final.matrix, exact.matrix, rtol=0, atol=1e-8)
    assert exact.tau == pytest.approx(1 / g)


def test_oracle_agreement_two_modes_driven():
    seed = 20240607
    t = ModeTruncation((1, 1))
    modes = ModeSet((Mode(1.0, 1, drive=0.6, gamma=0.3, gamma_tilde=0.1),
                     Mode(1.5, 1, drive=0.2, kappa=0.2)), 400.0)
    h = build_hamiltonian(modes, trunc=t)
    diss = DissipatorSet.from_modes(modes, 1.0)
    rho0 = random_state(t, seed)
    exact = exact_propagate(rho0, h, diss, 5.0)
    res = evolve(rho0, h, diss, 5.0, 0.005, 100, leak_limit=None)
    np.testing.assert_allclose(res.final.matrix, exact.matrix, rtol=0, atol=1e-6)


def test_exact_propagate_identity_and_limits():
    t = ModeTruncation((2,))
    rho = random_state(t, 1)
    same = exact_propagate(rho, number(t, 0), DissipatorSet([1.0], [0.5]), 0.0)
    assert np.array_equal(same.matrix, rho.matrix)
    big = ModeTruncation((4, 4, 2))
    with pytest.raises(ValueError):
        exact_propagate(DensityMatrix.vacuum(big), zero_h(big), DissipatorSet.none(3), 1.0)


def test_liouvillian_matches_rhs():
    t = ModeTruncation((1, 2))
    modes = ModeSet((Mode(1.0, 1, drive=0.3, kappa=0.4), Mode(2.0, 2, kappa=0.3)), 500.0)
    h = build_hamiltonian(modes, [CubicCoupling((0, 0, 1), 0.1)], t)
    diss = DissipatorSet.from_modes(modes)
    rho = random_state(t, 8)
    lv = liouvillian(h, diss) @ rho.matrix.reshape(-1)
    np.testing.assert_allclose(lv.reshape(t.dim, t.dim), rhs(rho, h, diss), atol=1e-14)


def test_rk4_fourth_order():
    t = ModeTruncation((1, 1))
    modes = ModeSet((Mode(1.0, 1, drive=0.5, gamma=0.3, gamma_tilde=0.1),
                     Mode(1.3, 1, drive=0.3, gamma=0.2, gamma_tilde=0.05)))
    h = build_hamiltonian(modes, trunc=t)
    diss = DissipatorSet.from_modes(modes)
    rho0 = DensityMatrix.vacuum(t)
    exact = exact_propagate(rho0, h, diss, 2.0).matrix
    errs = [np.abs(evolve(rho0, h, diss, 2.0, dt, 10_000, leak_limit=None).final.matrix
                   - exact).max() for dt in (0.2, 0.1)]
    assert 12 <= errs[0] / errs[1] <= 20


def test_records_cadence_and_diagnostics():
    t = ModeTruncation((2, 2))
    modes = ModeSet((Mode(1.0, 2, drive=0.2, gamma=0.1, gamma_tilde=0.02),
                     Mode(2.0, 2, gamma=0.1, gamma_tilde=0.01)))
    h = build_hamiltonian(modes, [CubicCoupling((0, 0, 1), 0.05)], t)
    res = evolve(DensityMatrix.thermal(t, [0.05, 0.05]), h, DissipatorSet.from_modes(modes),
                 1.0, 0.01, 25, keep_snapshots=True)
    np.testing.assert_allclose(res.taus, [0, 0.25, 0.5, 0.75, 1.0])
    assert len(res.snapshots) == 5
    assert res.rows().shape == (5, 1 + 2 + 3 + 2)
    assert np.all(res.trace_drift <= 1e-12)
    assert np.all(res.hermiticity_drift <= 1e-12)
    assert np.all(res.min_eig >= -1e-12)
    assert np.all((res.purity > 0) & (res.purity <= 1 + 1e-12))
    assert abs(res.final.trace() - 1) < 1e-14
    assert res.final.hermiticity_error() == 0


def test_uneven_horizon_is_rounded_to_whole_steps():
    t = ModeTruncation((1,))
    res = evolve(fock(t, 1), zero_h(t), DissipatorSet([1.0], [0.0]), 0.105, 0.01, 100,
                 leak_limit=None)
    assert res.taus[-1] == pytest.approx(0.105)
    assert len(res.taus) == 2


def test_thermal_initial_state():
    t = ModeTruncation((30, 1))
    rho = DensityMatrix.thermal(t, [0.5, 0.0])
    assert rho.trace() == pytest.approx(1.0)
    assert rho.populations()[0] == pytest.approx(0.5, rel=1e-6)
    assert rho.populations()[1] == 0
    with pytest.raises(ValueError):
        DensityMatrix.thermal(t, [-1.0, 0.0])


def test_step_too_large_aborts():
    t = ModeTruncation((3,))
    with pytest.raises(NumericalInvariantError):
        evolve(DensityMatrix.vacuum(t), zero_h(t), DissipatorSet([0.0], [5.0]), 1.0, 0.5, 1,
               leak_limit=None)


def test_positivity_violation_aborts():
    t = ModeTruncation((1,))
    bad = DensityMatrix(np.diag([1.2, -0.2]).astype(complex), t)
    with pytest.raises(NumericalInvariantError, match="positivity"):
        evolve(bad, zero_h(t), DissipatorSet.none(1), 0.1, 0.01, 1, leak_limit=None)


def test_leakage_guard():
    t = ModeTruncation((2,))
    with pytest.raises(TruncationLeakageError):
        evolve(DensityMatrix.vacuum(t), zero_h(t), DissipatorSet([0.1], [1.0]), 3.0, 0.01, 10)


def test_bad_arguments():
    t = ModeTruncation((1,))
    rho, h, d = DensityMatrix.vacuum(t), zero_h(t), DissipatorSet.none(1)
    for args in ((0.0, 0.1, 1), (1.0, -0.1, 1), (1.0, 0.1, 0)):
        with pytest.raises(ValueError):
            evolve(rho, h, d, *args)
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(3), t)


def test_iter_evolve_is_lazy():
    t = ModeTruncation((1,))
    stream = iter_evolve(DensityMatrix.vacuum(t), zero_h(t), DissipatorSet.none(1), 1e6, 1.0)
    first = next(stream)
    assert first.tau == 0 and first.min_eig == pytest.approx(0.0)
    stream.close()


def test_snapshot_round_trip(tmp_path):
    t = ModeTruncation((2, 1))
    rho = random_state(t, 9)
    path = tmp_path / "rho.bin"
    write_snapshot(path, rho)
    raw = path.read_bytes()
    assert len(raw) == 8 * (2 + 2) + 16 * t.dim ** 2
    assert np.frombuffer(raw[:32], "<i8").tolist() == [6, 2, 2, 1]
    back = read_snapshot(path, 0.5)
    assert np.array_equal(back.matrix, rho.matrix)
    assert back.trunc == t and back.tau == 0.5
    path.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        read_snapshot(path)
