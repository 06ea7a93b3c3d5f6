"""Unit tests for the entanglement comparators."""

import itertools
import math

import numpy as np
import pytest

from fermiq.entanglement import (
    balanced_cut,
    fermionic_concurrence,
    mode_negativity,
    natural_orbitals,
    one_body_density,
    one_body_entanglement,
    pair_block,
    particle_entanglement_entropy,
    particle_negativity,
    pure_concurrence,
    shifted_negativity,
)
from fermiq.errors import PreconditionError, ShapeError, ValidationError
from fermiq.fock import build_basis, compound_lift, slater_state, vacuum
from fermiq.lindblad import dark_state_4_2
from fermiq.optimize import OptimizerConfig
from fermiq.quantinfo import binary_entropy, pure_to_density, random_unitary

BELL = pure_to_density(np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2.0))
DARK_OCCUPATION = (3.0 - 2.0 * math.sqrt(2.0)) / 6.0


def _paired_state():
    basis = build_basis(4)
    return (slater_state(basis, (1, 1, 0, 0)) + slater_state(basis, (0, 0, 1, 1))) / math.sqrt(2.0)


def _pair_occupations():
    return [bits for bits in itertools.product((0, 1), repeat=4) if sum(bits) == 2]


class TestConcurrence:
    """Tests for fermionic_concurrence and pure_concurrence functions."""

    def test_slater_state_is_unentangled(self):
        psi = slater_state(build_basis(4), (1, 0, 1, 0))

        assert fermionic_concurrence(pure_to_density(psi)).value == pytest.approx(0.0, abs=1e-10)
        assert pure_concurrence(psi) == pytest.approx(0.0, abs=1e-12)

    def test_paired_state_is_maximal(self):
        psi = _paired_state()

        assert pure_concurrence(psi) == pytest.approx(1.0)
        assert fermionic_concurrence(pure_to_density(psi)).value == pytest.approx(1.0, abs=1e-8)

    def test_dark_state(self):
        psi = dark_state_4_2(build_basis(4))

        assert pure_concurrence(psi) == pytest.approx(1.0 / 3.0)
        assert fermionic_concurrence(pure_to_density(psi)).value == pytest.approx(1.0 / 3.0, abs=1e-8)

    def test_invariant_under_single_particle_rotations(self):
        gamma = compound_lift(random_unitary(4, np.random.default_rng(0)))

        rotated = gamma @ dark_state_4_2(build_basis(4))

        assert pure_concurrence(rotated) == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_mixture_loses_concurrence(self):
        basis = build_basis(4)
        slater = pure_to_density(slater_state(basis, (1, 0, 1, 0)))
        rho = 0.5 * pure_to_density(_paired_state()) + 0.5 * slater

        assert fermionic_concurrence(rho).value < 1.0


class TestPairBlock:
    """Tests for pair_block function."""

    def test_sector_block_is_reordered(self):
        block = np.diag(np.arange(1.0, 7.0))

        assert np.allclose(np.diag(pair_block(block)), np.arange(6.0, 0.0, -1.0))

    def test_rejects_weight_outside_pairs(self):
        rho = pure_to_density(vacuum(build_basis(4)))

        with pytest.raises(PreconditionError):
            pair_block(rho)

    def test_rejects_other_sizes(self):
        with pytest.raises(ShapeError):
            pair_block(np.eye(8) / 8)


class TestModeNegativity:
    """Tests for mode_negativity, balanced_cut and shifted_negativity functions."""

    def test_bell_state(self):
        result = mode_negativity(BELL, [1])

        assert result.value == pytest.approx(0.5)
        assert result.to_dict()["modes_a"] == [1]

    def test_rejects_invalid_side(self):
        with pytest.raises(ValidationError):
            mode_negativity(BELL, [3])

    @pytest.mark.parametrize("L, expected", [(2, (1,)), (4, (1, 2)), (5, (1, 2))])
    def test_balanced_cut(self, L, expected):
        assert balanced_cut(L) == expected

    def test_delocalized_particle_has_no_shifted_negativity(self):
        result = shifted_negativity(BELL, OptimizerConfig(restarts=2))

        assert result.value == pytest.approx(0.0, abs=1e-6)
        assert result.metadata["optimal_basis"].shape == (2, 2)

    def test_rejects_single_mode(self):
        with pytest.raises(ValidationError):
            shifted_negativity(np.diag([1.0, 0.0]))


class TestParticleNegativity:
    """Tests for particle_negativity function."""

    def test_slater_states_are_unentangled(self):
        basis = build_basis(4)
        gamma = compound_lift(random_unitary(4, np.random.default_rng(1)))

        slater = particle_negativity(pure_to_density(slater_state(basis, (1, 0, 1, 0))))
        rotated = particle_negativity(pure_to_density(gamma @ slater_state(basis, (0, 1, 1, 0))))

        assert slater.value == pytest.approx(0.0, abs=1e-10)
        assert rotated.value == pytest.approx(0.0, abs=1e-10)

    def test_paired_state_is_maximal(self):
        result = particle_negativity(pure_to_density(_paired_state()))

        assert result.value == pytest.approx(1.0, abs=1e-10)
        assert result.quantifier == "particle_negativity"

    def test_pure_states_match_the_concurrence(self):
        psi = dark_state_4_2(build_basis(4))

        result = particle_negativity(pure_to_density(psi))

        assert result.value == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert result.value == pytest.approx(pure_concurrence(psi), abs=1e-10)

    def test_uniform_mixture_is_separable(self):
        basis = build_basis(4)
        rho = sum(pure_to_density(slater_state(basis, bits)) for bits in _pair_occupations()) / 6.0

        assert particle_negativity(rho).value == pytest.approx(0.0, abs=1e-12)

    def test_rejects_other_particle_numbers(self):
        with pytest.raises(PreconditionError):
            particle_negativity(BELL)


class TestOneBodyDensity:
    """Tests for the one-body density matrix and its entropies."""

    def test_dark_state_correlations(self):
        rho = pure_to_density(dark_state_4_2(build_basis(4)))
        expected = np.array([[3, 2, 0, -2], [2, 3, 2, 0], [0, 2, 3, 2], [-2, 0, 2, 3]]) / 6.0

        assert np.allclose(one_body_density(rho), expected, atol=1e-12)

    def test_natural_orbitals_diagonalize(self):
        rho = pure_to_density(dark_state_4_2(build_basis(4)))
        g = one_body_density(rho)
        u = natural_orbitals(rho)

        rotated = u.conj() @ g @ u.T

        assert np.allclose(rotated, np.diag(np.diag(rotated)), atol=1e-12)
        assert np.sort(np.real(np.diag(rotated)))[:2] == pytest.approx([DARK_OCCUPATION] * 2)

    def test_slater_state_has_no_one_body_entanglement(self):
        psi = slater_state(build_basis(3), (0, 1, 1))

        assert one_body_entanglement(psi) == pytest.approx(0.0, abs=1e-12)

    def test_dark_state_one_body_entanglement(self):
        psi = dark_state_4_2(build_basis(4))

        assert one_body_entanglement(psi) == pytest.approx(4.0 * float(binary_entropy(DARK_OCCUPATION)))

    def test_dark_state_particle_entanglement(self):
        psi = dark_state_4_2(build_basis(4))

        assert particle_entanglement_entropy(psi) == pytest.approx(float(binary_entropy(DARK_OCCUPATION)))

    def test_particle_entanglement_needs_particles(self):
        with pytest.raises(ValidationError):
            particle_entanglement_entropy(vacuum(build_basis(2)))
