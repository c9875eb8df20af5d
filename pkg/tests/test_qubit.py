"""Unit tests for the single-qubit state algebra."""

import math

import numpy as np
import pytest

from lgopt.qubit import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DomainError,
    MeasurementSetting,
    energy,
    hamiltonian,
    is_density_matrix,
    measure,
    mixed_state,
    observable,
    pure_state,
    purity,
    to_bloch,
)

RNG = np.random.default_rng(20240811)


def random_bloch(rng, surface=False):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    if surface:
        return v
    return v * rng.uniform(0.0, 1.0) ** (1.0 / 3.0)


class TestStates:
    def test_pure_state_basis_states(self):
        np.testing.assert_allclose(to_bloch(pure_state(1.0)), [0, 0, 1], atol=1e-12)
        np.testing.assert_allclose(to_bloch(pure_state(0.0)), [0, 0, -1], atol=1e-12)

    def test_pure_state_plus(self):
        np.testing.assert_allclose(
            to_bloch(pure_state(1.0 / math.sqrt(2.0))), [1, 0, 0], atol=1e-12
        )

    def test_pure_state_is_pure(self):
        for alpha in (0.0, 0.17, 0.5, 0.93, 1.0):
            assert purity(pure_state(alpha)) == pytest.approx(1.0, abs=1e-12)
            assert is_density_matrix(pure_state(alpha))

    def test_pure_state_domain(self):
        with pytest.raises(DomainError):
            pure_state(-0.01)
        with pytest.raises(DomainError):
            pure_state(1.01)

    def test_mixed_state_maximally_mixed(self):
        np.testing.assert_allclose(mixed_state((0, 0, 0)), IDENTITY / 2, atol=1e-15)

    def test_mixed_state_diagonal(self):
        np.testing.assert_allclose(
            mixed_state((0, 0, 0.5)), np.diag([0.75, 0.25]), atol=1e-15
        )

    def test_mixed_state_pure_boundary(self):
        plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
        np.testing.assert_allclose(mixed_state((1, 0, 0)), plus, atol=1e-15)

    def test_mixed_state_outside_ball(self):
        with pytest.raises(DomainError):
            mixed_state((0.8, 0.8, 0.8))

    def test_to_bloch_examples(self):
        np.testing.assert_allclose(to_bloch(IDENTITY / 2), [0, 0, 0], atol=1e-15)
        np.testing.assert_allclose(to_bloch(pure_state(0.6)), [0.96, 0, -0.28], atol=1e-12)

    def test_bloch_round_trip(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            b = random_bloch(rng)
            np.testing.assert_allclose(to_bloch(mixed_state(b)), b, atol=1e-12)

    def test_norm_one_iff_pure(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            b = random_bloch(rng, surface=True)
            assert purity(mixed_state(b)) == pytest.approx(1.0, abs=1e-9)
            b_in = b * 0.9
            assert purity(mixed_state(b_in)) < 1.0 - 1e-3


class TestEnergy:
    def test_maximally_mixed_zero(self):
        assert energy(IDENTITY / 2) == pytest.approx(0.0, abs=1e-15)

    def test_ground_and_excited(self):
        assert energy(pure_state(1.0)) == pytest.approx(1.0, abs=1e-15)
        assert energy(pure_state(0.0)) == pytest.approx(-1.0, abs=1e-15)

    def test_pure_family_closed_form(self):
        # oracle: direct matrix trace of H rho
        for alpha in (0.1, 0.35, 0.62, 0.9):
            rho = pure_state(alpha)
            direct = float(np.real(np.trace(hamiltonian() @ rho)))
            assert energy(rho) == pytest.approx(direct, abs=1e-14)
            assert energy(rho) == pytest.approx(2 * alpha**2 - 1, abs=1e-12)

    def test_energy_equals_j_times_mz(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            b = random_bloch(rng)
            assert energy(mixed_state(b), j=2.5) == pytest.approx(2.5 * b[2], abs=1e-12)


class TestMeasurementSetting:
    def test_canonical_ranges(self):
        s = MeasurementSetting(0.3, 7.0)
        assert 0.0 <= s.theta < math.pi
        assert 0.0 <= s.phi < 2 * math.pi

    def test_reduction_preserves_axis_up_to_sign(self):
        s = MeasurementSetting(math.pi + 0.4, 1.0)
        ref = MeasurementSetting(math.pi - 0.4, 1.0 + math.pi)
        np.testing.assert_allclose(s.axis(), ref.axis(), atol=1e-12)

    def test_axis_unit(self):
        for theta, phi in [(0.0, 0.0), (1.0, 2.0), (2.9, 5.5)]:
            assert np.linalg.norm(MeasurementSetting(theta, phi).axis()) == pytest.approx(1.0)


class TestObservable:
    def test_poles(self):
        pair = observable(MeasurementSetting(0.0, 0.0))
        np.testing.assert_allclose(pair.p_plus, np.diag([1, 0]), atol=1e-14)
        np.testing.assert_allclose(pair.p_minus, np.diag([0, 1]), atol=1e-14)

    def test_equatorial(self):
        pair = observable(MeasurementSetting(math.pi / 2, 0.0))
        plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
        np.testing.assert_allclose(pair.p_plus, plus, atol=1e-14)

    def test_circular(self):
        pair = observable(MeasurementSetting(math.pi / 2, math.pi / 2))
        ket = np.array([1, 1j]) / math.sqrt(2)
        np.testing.assert_allclose(pair.p_plus, np.outer(ket, ket.conj()), atol=1e-14)

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi, 7, endpoint=False))
    @pytest.mark.parametrize("phi", np.linspace(0, 2 * math.pi, 5, endpoint=False))
    def test_projector_invariants(self, theta, phi):
        pair = observable(MeasurementSetting(theta, phi))
        assert np.max(np.abs(pair.p_plus @ pair.p_minus)) <= 1e-12
        assert np.max(np.abs(pair.p_plus + pair.p_minus - IDENTITY)) <= 1e-12
        assert np.max(np.abs(pair.p_plus @ pair.p_plus - pair.p_plus)) <= 1e-12
        assert np.max(np.abs(pair.p_minus @ pair.p_minus - pair.p_minus)) <= 1e-12
        q = pair.observable()
        assert np.max(np.abs(q @ q - IDENTITY)) <= 1e-12

    def test_observable_is_spin_along_axis(self):
        s = MeasurementSetting(1.1, 4.2)
        n = s.axis()
        expected = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
        np.testing.assert_allclose(observable(s).observable(), expected, atol=1e-12)


class TestMeasure:
    def test_eigenstate(self):
        res = measure(pure_state(1.0), observable(MeasurementSetting(0.0, 0.0)))
        assert res.prob_plus == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(res.post_plus, pure_state(1.0), atol=1e-12)
        assert res.minus_absent

    def test_maximally_mixed(self):
        res = measure(IDENTITY / 2, observable(MeasurementSetting(1.234, 2.1)))
        assert res.prob_plus == pytest.approx(0.5, abs=1e-12)
        assert res.prob_minus == pytest.approx(0.5, abs=1e-12)

    def test_derived_probability(self):
        # (1 + m.n)/2 with m = (0.96, 0, -0.28), n = (1, 0, 0)
        res = measure(pure_state(0.6), observable(MeasurementSetting(math.pi / 2, 0.0)))
        assert res.prob_plus == pytest.approx(0.98, abs=1e-12)

    def test_probabilities_and_posts_random(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            rho = mixed_state(random_bloch(rng))
            s = MeasurementSetting(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            res = measure(rho, observable(s))
            assert res.prob_plus + res.prob_minus == pytest.approx(1.0, abs=1e-12)
            assert 0.0 <= res.prob_plus <= 1.0
            for post in (res.post_plus, res.post_minus):
                if post is not None:
                    assert is_density_matrix(post, atol=1e-10)

    def test_nonselective_state(self):
        rng = np.random.default_rng(11)
        rho = mixed_state(random_bloch(rng))
        s = MeasurementSetting(0.9, 0.4)
        pair = observable(s)
        res = measure(rho, pair)
        direct = pair.p_plus @ rho @ pair.p_plus + pair.p_minus @ rho @ pair.p_minus
        np.testing.assert_allclose(res.nonselective(), direct, atol=1e-12)
