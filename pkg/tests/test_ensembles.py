"""Unit tests for the random ensembles and the disturbance landscape."""

import numpy as np
import pytest

from fermiq.ensembles import (
    EnsembleKind,
    EnsembleSpec,
    histogram_from_values,
    quantumness_histogram,
    sample_state,
    t_landscape,
)
from fermiq.errors import ValidationError
from fermiq.quantifiers import parity_sector_of
from fermiq.quantinfo import purity, validate_state


class TestEnsembleSpec:
    """Tests for EnsembleSpec validation."""

    def test_kind_from_string(self):
        spec = EnsembleSpec(kind="par")

        assert spec.kind is EnsembleKind.PAR
        assert spec.describe()["kind"] == "par"

    def test_default_rank_is_block_dimension(self):
        assert EnsembleSpec(L=3).effective_rank == 4

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            EnsembleSpec(kind="bosonic")

    @pytest.mark.parametrize("kwargs", [{"L": 0}, {"measured_mode": 4}, {"sample_size": 0}, {"rank": 0}])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValidationError):
            EnsembleSpec(**kwargs)


class TestSampleState:
    """Tests for sample_state function."""

    def test_single_parity_states_alternate_sectors(self):
        spec = EnsembleSpec(kind="par1", L=3)

        sectors = [parity_sector_of(sample_state(spec, k)) for k in range(4)]

        assert sectors == [1, -1, 1, -1]

    def test_parity_mixture_is_a_state(self):
        rho = sample_state(EnsembleSpec(kind="par", L=3), 0)

        validate_state(rho, tol=1e-9)
        assert parity_sector_of(rho) is None

    def test_slater_samples_are_pure(self):
        rho = sample_state(EnsembleSpec(kind="slater", L=3), 2)

        assert purity(rho) == pytest.approx(1.0)

    def test_depends_only_on_seed_and_index(self):
        spec = EnsembleSpec(kind="par", L=3, seed=4)

        assert np.array_equal(sample_state(spec, 7), sample_state(spec, 7))
        assert not np.array_equal(sample_state(spec, 7), sample_state(spec, 8))


class TestTLandscape:
    """Tests for t_landscape function."""

    def test_occupation_basis_has_no_excess(self):
        spec = EnsembleSpec(kind="par1", L=2, sample_size=20)

        grid = t_landscape(spec, grid=(7, 6))

        assert grid.mean.shape == (7, 6)
        assert np.all(grid.mean >= -1e-12)
        assert np.max(np.abs(grid.mean[0])) <= 1e-9
        assert len(grid.rows()) == 42

    def test_slater_states_are_classical(self):
        spec = EnsembleSpec(kind="slater", L=3, sample_size=10)

        grid = t_landscape(spec, grid=(5, 4))

        assert np.max(grid.q_values) <= 1e-9

    def test_independent_of_thread_count(self):
        spec = EnsembleSpec(kind="par", L=2, sample_size=600, seed=1)

        serial = t_landscape(spec, grid=(4, 4))
        parallel = t_landscape(spec, grid=(4, 4), threads=3)

        assert np.array_equal(serial.q_values, parallel.q_values)
        assert np.allclose(serial.mean, parallel.mean, rtol=0.0, atol=1e-14)

    @pytest.mark.slow
    def test_single_parity_landscape_vanishes_only_on_occupation_rows(self):
        spec = EnsembleSpec(kind="par1", L=3, sample_size=200, seed=0)

        grid = t_landscape(spec, grid=(13, 8))

        occupation = [0, 6, 12]
        others = [a for a in range(13) if a not in occupation]
        assert np.max(np.abs(grid.mean[occupation])) <= 1e-9
        assert np.all(grid.mean[others] > 3.0 * grid.se[others])

    @pytest.mark.slow
    def test_mixed_parity_landscape_is_strictly_positive(self):
        spec = EnsembleSpec(kind="par", L=3, sample_size=200, seed=0)

        grid = t_landscape(spec, grid=(13, 8))

        lowest = np.unravel_index(np.argmin(grid.mean), grid.mean.shape)
        assert grid.mean[lowest] > 3.0 * grid.se[lowest]
        assert np.all(grid.mean > 3.0 * grid.se)

    def test_cell_lookup(self):
        grid = t_landscape(EnsembleSpec(L=2, sample_size=2), grid=(5, 4))

        assert grid.cell(np.pi / 2, np.pi) == (2, 2)


class TestHistograms:
    """Tests for histogram_from_values and quantumness_histogram functions."""

    def test_probabilities_sum_to_one(self):
        histogram = histogram_from_values([0.0, 0.1, 0.2, 0.2], bins=4)

        assert histogram.prob.sum() == pytest.approx(1.0)
        assert histogram.bin_right[-1] == pytest.approx(0.2)

    def test_all_zero_values(self):
        histogram = histogram_from_values(np.zeros(5), bins=2)

        assert histogram.prob[0] == pytest.approx(1.0)

    def test_rejects_zero_bins(self):
        with pytest.raises(ValidationError):
            histogram_from_values([0.1], bins=0)

    def test_ensemble_histogram(self):
        histogram = quantumness_histogram(EnsembleSpec(kind="par1", L=2, sample_size=10), bins=5, grid=(5, 4))

        assert len(histogram.rows()) == 5

    def test_rerun_with_the_same_seed_is_identical(self):
        spec = EnsembleSpec(kind="par", L=3, sample_size=40, seed=9)

        first = quantumness_histogram(spec, bins=8, grid=(7, 4))
        second = quantumness_histogram(spec, bins=8, grid=(7, 4))

        assert np.array_equal(first.prob, second.prob)
        assert np.array_equal(first.bin_right, second.bin_right)
