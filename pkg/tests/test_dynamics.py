"""Unit tests for unitary and Lindblad-dephasing propagation."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from lgopt.dynamics import (
    DephasingModel,
    MatrixExponential,
    build_liouvillian,
    bloch_generator,
    dephasing_z_closed_form,
    propagate,
    propagator,
    unitary_propagator,
    unvec,
    vec,
)
from lgopt.qubit import (
    IDENTITY,
    SIGMA_Z,
    DomainError,
    dagger,
    mixed_state,
    pure_state,
    purity,
    to_bloch,
)

ALL_KINDS = (
    DephasingModel.none(),
    DephasingModel.z_basis(0.7),
    DephasingModel.x_basis(0.7),
    DephasingModel.diag45(0.7),
    DephasingModel.general_axis((0.2, -0.5, 1.0), 0.7),
)


def random_state(rng):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return mixed_state(v * rng.uniform(0.0, 1.0) ** (1.0 / 3.0))


class TestDephasingModel:
    def test_negative_gamma(self):
        with pytest.raises(DomainError):
            DephasingModel.z_basis(-0.1)

    def test_none_forces_zero_gamma(self):
        with pytest.raises(DomainError):
            DephasingModel("none", 0.5)

    def test_axis_normalized(self):
        m = DephasingModel.general_axis((0, 0, 2), 1.0)
        assert np.linalg.norm(m.axis) == pytest.approx(1.0, abs=1e-12)

    def test_zero_axis_rejected(self):
        with pytest.raises(DomainError):
            DephasingModel.general_axis((0, 0, 0), 1.0)

    def test_diag45_equals_general_axis(self):
        # sqrt(gamma)/2 (sx + sz) == sqrt(gamma/2) (n . sigma), n = (1,0,1)/sqrt(2)
        a = DephasingModel.diag45(0.9).dephasing_operator()
        b = DephasingModel.general_axis((1, 0, 1), 0.9).dephasing_operator()
        np.testing.assert_allclose(a, b, atol=1e-15)

    def test_special_axes_match_named_kinds(self):
        for named, axis in ((DephasingModel.z_basis(0.4), (0, 0, 1)),
                            (DephasingModel.x_basis(0.4), (1, 0, 0))):
            general = DephasingModel.general_axis(axis, 0.4)
            np.testing.assert_allclose(
                named.dephasing_operator(), general.dephasing_operator(), atol=1e-15
            )


class TestUnitaryPropagator:
    def test_identity_at_zero(self):
        np.testing.assert_allclose(unitary_propagator(0.0), IDENTITY, atol=1e-15)

    def test_half_period(self):
        np.testing.assert_allclose(
            unitary_propagator(math.pi / 2), -1j * SIGMA_Z, atol=1e-12
        )

    def test_unitarity(self):
        for t in (0.1, 1.7, 9.3):
            u = unitary_propagator(t)
            np.testing.assert_allclose(u @ dagger(u), IDENTITY, atol=1e-12)

    def test_bloch_precession(self):
        # (1,0,0) rotates to (cos 2t, sin 2t, 0); consistent with the
        # damped closed form at gamma = 0
        rho = mixed_state((1, 0, 0))
        for t in (0.3, 1.1, 2.9):
            u = unitary_propagator(t)
            b = to_bloch(u @ rho @ dagger(u))
            np.testing.assert_allclose(
                b, [math.cos(2 * t), math.sin(2 * t), 0.0], atol=1e-12
            )

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            unitary_propagator(-1.0)


class TestLiouvillian:
    def test_unitary_spectrum(self):
        evals = np.linalg.eigvals(build_liouvillian(DephasingModel.none()))
        expected = np.sort_complex(np.array([0, 0, 2j, -2j]))
        np.testing.assert_allclose(np.sort_complex(evals), expected, atol=1e-12)

    def test_z_dephasing_conserves_populations(self):
        lio = build_liouvillian(DephasingModel.z_basis(1.3))
        rng = np.random.default_rng(3)
        for _ in range(20):
            rho = random_state(rng)
            deriv = unvec(lio @ vec(rho))
            assert abs(deriv[0, 0]) <= 1e-12
            assert abs(deriv[1, 1]) <= 1e-12

    def test_trace_preserving(self):
        rng = np.random.default_rng(4)
        for model in ALL_KINDS:
            lio = build_liouvillian(model)
            for _ in range(10):
                deriv = unvec(lio @ vec(random_state(rng)))
                assert abs(np.trace(deriv)) <= 1e-12

    def test_bloch_generator_matches_liouvillian(self):
        rng = np.random.default_rng(5)
        for model in ALL_KINDS:
            gen = bloch_generator(model)
            lio = build_liouvillian(model)
            for _ in range(5):
                rho = random_state(rng)
                db = gen @ to_bloch(rho)
                drho = unvec(lio @ vec(rho))
                np.testing.assert_allclose(
                    db,
                    [np.real(np.trace(drho @ s)) for s in
                     (np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), SIGMA_Z)],
                    atol=1e-12,
                )


class TestPropagate:
    def test_zero_time(self):
        rho = pure_state(0.4)
        np.testing.assert_allclose(propagate(rho, 0.0, ALL_KINDS[1]), rho, atol=1e-14)

    def test_z_matches_closed_form(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            rho = random_state(rng)
            t = rng.uniform(0.0, 10.0)
            gamma = rng.uniform(0.0, 2.0)
            got = to_bloch(propagate(rho, t, DephasingModel.z_basis(gamma)))
            want = dephasing_z_closed_form(to_bloch(rho), t, gamma)
            np.testing.assert_allclose(got, want, atol=1e-8)

    def test_none_matches_unitary(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            rho = random_state(rng)
            t = rng.uniform(0.0, 10.0)
            u = unitary_propagator(t)
            np.testing.assert_allclose(
                propagate(rho, t, DephasingModel.none()), u @ rho @ dagger(u), atol=1e-10
            )

    def test_gamma_zero_reduces_to_unitary_for_every_kind(self):
        rng = np.random.default_rng(8)
        kinds = (
            DephasingModel.none(),
            DephasingModel.z_basis(0.0),
            DephasingModel.x_basis(0.0),
            DephasingModel.diag45(0.0),
            DephasingModel.general_axis((1, 1, 0), 0.0),
        )
        for model in kinds:
            rho = random_state(rng)
            t = rng.uniform(0.0, 8.0)
            u = unitary_propagator(t)
            np.testing.assert_allclose(
                propagate(rho, t, model), u @ rho @ dagger(u), atol=1e-10
            )

    def test_x_dephasing_decays_to_maximally_mixed(self):
        # the only fixed point of the x-dephased generator is m = 0
        rho = pure_state(1.0)
        model = DephasingModel.x_basis(0.8)
        norms = [np.linalg.norm(to_bloch(propagate(rho, t, model))) for t in (5.0, 20.0, 60.0)]
        assert all(n < 1.0 for n in norms)
        assert norms[-1] < 1e-3
        assert norms[0] > norms[1] > norms[2]

    def test_semigroup(self):
        rng = np.random.default_rng(9)
        for model in ALL_KINDS:
            rho = random_state(rng)
            t1, t2 = rng.uniform(0.0, 4.0, size=2)
            once = propagate(rho, t1 + t2, model)
            twice = propagate(propagate(rho, t1, model), t2, model)
            np.testing.assert_allclose(once, twice, atol=1e-9)

    def test_purity_monotone_under_dephasing(self):
        rng = np.random.default_rng(10)
        grid = np.logspace(math.log10(1e-3), 1.0, 64)
        for model in ALL_KINDS[1:]:
            rho = random_state(rng)
            purities = [purity(propagate(rho, t, model)) for t in grid]
            diffs = np.diff(purities)
            assert np.all(diffs <= 1e-10)

    def test_z_conserves_mz_and_energy(self):
        rng = np.random.default_rng(11)
        model = DephasingModel.z_basis(1.1)
        rho = random_state(rng)
        mz0 = to_bloch(rho)[2]
        for t in (0.2, 1.5, 6.0):
            assert to_bloch(propagate(rho, t, model))[2] == pytest.approx(mz0, abs=1e-10)

    def test_state_invariants_preserved(self):
        rng = np.random.default_rng(12)
        for _ in range(60):
            model = ALL_KINDS[rng.integers(0, len(ALL_KINDS))]
            rho = random_state(rng)
            out = propagate(rho, rng.uniform(0.0, 10.0), model)
            assert abs(np.trace(out) - 1.0) <= 1e-10
            assert np.max(np.abs(out - dagger(out))) <= 1e-10
            assert np.linalg.eigvalsh(out)[0] >= -1e-10


class TestMatrixExponential:
    def test_matches_scipy_on_defective_matrix(self):
        # Jordan block: defective eigenbasis forces the fallback
        jordan = np.array([[1.0, 1.0], [0.0, 1.0]])
        exp = MatrixExponential(jordan)
        np.testing.assert_allclose(exp.at(0.7), expm(jordan * 0.7), atol=1e-12)
        assert exp.factors() is None

    def test_matches_scipy_on_generic(self):
        rng = np.random.default_rng(13)
        m = rng.normal(size=(4, 4))
        exp = MatrixExponential(m)
        np.testing.assert_allclose(exp.at(0.31), expm(m * 0.31), atol=1e-10)


class TestClosedForm:
    def test_t_zero(self):
        b0 = np.array([0.3, -0.2, 0.5])
        np.testing.assert_allclose(dephasing_z_closed_form(b0, 0.0, 1.0), b0, atol=1e-15)

    def test_half_period_flip(self):
        got = dephasing_z_closed_form((1, 0, 0), math.pi / 2, 0.0)
        np.testing.assert_allclose(got, [-1, 0, 0], atol=1e-12)

    def test_strong_damping_kills_transverse(self):
        got = dephasing_z_closed_form((0.7, -0.4, 0.33), 5.0, 50.0)
        np.testing.assert_allclose(got, [0, 0, 0.33], atol=1e-12)

    def test_propagator_cache_reuse(self):
        model = DephasingModel.z_basis(0.25)
        assert propagator(model) is propagator(DephasingModel.z_basis(0.25))
