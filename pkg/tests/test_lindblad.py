"""Unit tests for the dissipative chain and its integrator."""

import math
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from fermiq.errors import IntegrationError, ShapeError, ValidationError
from fermiq.fock import build_basis, creation_op, number_op
from fermiq.lindblad import (
    IntegratorConfig,
    LindbladModel,
    TrajectoryRecord,
    WarmStartedQuantifier,
    build_model,
    chain_lindblad_ops,
    dark_state,
    dark_state_4_2,
    dark_state_residual,
    detect_ppt_window,
    evolve_state,
    initial_state_fig2,
    liouvillian_apply,
    ppt_windows,
    rk4_evolve,
    step_doubling_check,
    trajectory_observables,
)
from fermiq.optimize import OptimizerConfig
from fermiq.quantifiers import q_particles
from fermiq.quantinfo import binary_entropy, fidelity_pure, ginibre_state, pure_to_density

DARK_VALUE = float(binary_entropy((3.0 - 2.0 * math.sqrt(2.0)) / 6.0))


def _reference_window(convention, t_max):
    basis = build_basis(4)
    cheap, _ = trajectory_observables(basis, with_quantifiers=False)
    cfg = IntegratorConfig(dt=0.005, t_max=t_max, record_every=2, quantifier_every=2)

    record = rk4_evolve(
        build_model(basis, N=2, convention=convention), pure_to_density(initial_state_fig2(basis)), cfg, cheap
    )
    return detect_ppt_window(record)


class TestChainModel:
    """Tests for chain_lindblad_ops, build_model and LindbladModel."""

    def test_one_operator_per_bond(self):
        assert len(chain_lindblad_ops(build_basis(4))) == 3

    def test_single_site_has_no_bonds(self):
        with pytest.raises(ValidationError):
            chain_lindblad_ops(build_basis(1))

    def test_rejects_non_positive_rate(self):
        with pytest.raises(ValidationError):
            build_model(build_basis(3), J=0.0)

    def test_rejects_number_changing_jumps(self):
        basis = build_basis(2)

        with pytest.raises(ValidationError, match="particle number"):
            LindbladModel(basis, 1.0, (creation_op(basis, 1),))

    def test_sector_dimension(self):
        assert build_model(build_basis(4), N=2).dim == 6
        assert build_model(build_basis(4)).dim == 16

    def test_doubled_dissipator_doubles_the_rate(self):
        basis = build_basis(3)

        assert build_model(basis, J=0.5).rate == pytest.approx(0.5)
        assert build_model(basis, J=0.5, convention="doubled").rate == pytest.approx(1.0)

    def test_rejects_unknown_convention(self):
        with pytest.raises(ValidationError, match="dissipator convention"):
            build_model(build_basis(3), convention="halved")


class TestDarkState:
    """Tests for dark_state and dark_state_residual functions."""

    @pytest.mark.parametrize("L, N", [(3, 1), (4, 2), (5, 2)])
    def test_annihilated_by_every_jump(self, L, N):
        basis = build_basis(L)

        residual = dark_state_residual(build_model(basis), dark_state(basis, N))

        assert residual <= 1e-12

    def test_equal_amplitudes(self):
        psi = dark_state_4_2(build_basis(4))

        assert np.allclose(np.abs(psi[np.abs(psi) > 0]), 1.0 / np.sqrt(6.0))
        assert np.linalg.norm(psi) == pytest.approx(1.0)

    def test_fixed_size(self):
        with pytest.raises(ValidationError):
            dark_state_4_2(build_basis(3))

    def test_initial_state_is_not_dark(self):
        basis = build_basis(4)

        assert dark_state_residual(build_model(basis), initial_state_fig2(basis)) > 0.1


class TestLiouvillian:
    """Tests for liouvillian_apply function."""

    def test_dark_state_is_stationary(self):
        basis = build_basis(4)
        model = build_model(basis, N=2)

        derivative = liouvillian_apply(model, model.to_working(pure_to_density(dark_state_4_2(basis))))

        assert np.max(np.abs(derivative)) <= 1e-10

    def test_trace_is_conserved(self):
        model = build_model(build_basis(4), N=2)

        derivative = liouvillian_apply(model, ginibre_state(6, 6, np.random.default_rng(0)))

        assert abs(np.trace(derivative)) <= 1e-12

    def test_doubled_convention_scales_the_generator(self):
        basis = build_basis(4)
        rho = ginibre_state(6, 3, np.random.default_rng(1))

        standard = liouvillian_apply(build_model(basis, N=2), rho)
        doubled = liouvillian_apply(build_model(basis, N=2, convention="doubled"), rho)

        assert np.allclose(doubled, 2.0 * standard, atol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            liouvillian_apply(build_model(build_basis(4), N=2), np.eye(16) / 16)


class TestIntegratorConfig:
    """Tests for IntegratorConfig validation."""

    def test_step_count(self):
        assert IntegratorConfig(dt=0.01, t_max=1.0).n_steps == 100

    def test_rejects_non_positive_step(self):
        with pytest.raises(ValidationError):
            IntegratorConfig(dt=0.0)

    def test_quantifier_cadence_must_align(self):
        with pytest.raises(ValidationError):
            IntegratorConfig(record_every=3, quantifier_every=10)


class TestRk4Evolve:
    """Tests for rk4_evolve function."""

    def test_dark_state_stays_put(self):
        basis = build_basis(4)
        psi = dark_state_4_2(basis)
        cfg = IntegratorConfig(dt=0.01, t_max=1.0, record_every=10, quantifier_every=10)

        record = rk4_evolve(
            build_model(basis, N=2), pure_to_density(psi), cfg, {"fidelity": lambda rho: fidelity_pure(rho, psi)}
        )

        assert len(record.times) == 11
        assert np.allclose(record.series("fidelity"), 1.0, atol=1e-6)
        assert record.diagnostics["max_trace_err"] <= 1e-7

    def test_quantifiers_are_sampled_on_their_cadence(self):
        basis = build_basis(4)
        cfg = IntegratorConfig(dt=0.01, t_max=0.2, record_every=5, quantifier_every=10)

        rho0 = pure_to_density(initial_state_fig2(basis))

        record = rk4_evolve(build_model(basis, N=2), rho0, cfg, quantifiers={"one": lambda rho: 1.0})

        assert record.series("one") == [1.0, None, 1.0, None, 1.0]

    def test_oversized_step_is_reported(self):
        basis = build_basis(4)
        cfg = IntegratorConfig(dt=2.0, t_max=40.0, record_every=1, quantifier_every=1)

        with pytest.raises(IntegrationError, match="halving dt") as excinfo:
            rk4_evolve(build_model(basis, N=2), pure_to_density(initial_state_fig2(basis)), cfg)

        assert excinfo.value.time is not None

    def test_trace_drift_is_reported(self):
        basis = build_basis(4)
        cfg = IntegratorConfig(dt=0.01, t_max=0.1, record_every=1, quantifier_every=1)
        leaking = patch("fermiq.lindblad.liouvillian_apply", side_effect=lambda model, rho: -0.1 * rho)

        with leaking, pytest.raises(IntegrationError, match="trace drifted") as excinfo:
            rk4_evolve(build_model(basis, N=2), pure_to_density(initial_state_fig2(basis)), cfg)

        assert excinfo.value.time == pytest.approx(0.01)

    def test_step_doubling_agrees(self):
        basis = build_basis(4)
        psi = dark_state_4_2(basis)
        cfg = IntegratorConfig(dt=0.01, t_max=1.0)

        change = step_doubling_check(build_model(basis, N=2), pure_to_density(initial_state_fig2(basis)), cfg, 1.0, psi)

        assert change <= 1e-6

    @pytest.mark.slow
    def test_relaxes_to_the_dark_state(self):
        basis = build_basis(4)
        number = number_op(basis).matrix
        cheap, _ = trajectory_observables(basis, with_quantifiers=False)
        observables = {**cheap, "number": lambda rho: float(np.real(np.trace(number @ rho)))}
        cfg = IntegratorConfig(dt=0.01, t_max=30.0, record_every=50, quantifier_every=50)

        record = rk4_evolve(build_model(basis, N=2), pure_to_density(initial_state_fig2(basis)), cfg, observables)

        times = np.array(record.times)
        fidelity = np.array(record.series("fidelity"))
        assert fidelity[-1] >= 0.999
        assert np.all(np.diff(fidelity[times >= 5.0]) >= -1e-12)
        assert np.allclose(record.series("number"), 2.0, atol=1e-8)
        assert record.diagnostics["max_trace_err"] <= 1e-7
        assert q_particles(record.final_state, OptimizerConfig(restarts=2)).value == pytest.approx(DARK_VALUE, abs=1e-3)


class TestTrajectoryRecord:
    """Tests for TrajectoryRecord."""

    def test_rows_fill_missing_columns(self):
        record = TrajectoryRecord(times=[0.0, 0.5], observables={"purity": [1.0, 0.9]})

        assert record.rows(["purity", "concurrence"]) == [[0.0, 1.0, None], [0.5, 0.9, None]]


class TestTrajectoryObservables:
    """Tests for trajectory_observables function."""

    def test_concurrence_only_for_two_fermions_in_four_modes(self):
        cheap, expensive = trajectory_observables(build_basis(4), 2, with_quantifiers=False)
        other, _ = trajectory_observables(build_basis(3), 1, with_quantifiers=False)

        assert set(cheap) == {"purity", "fidelity", "negativity", "concurrence"}
        assert expensive == {}
        assert "concurrence" not in other

    def test_negativity_follows_the_particle_number(self):
        two, _ = trajectory_observables(build_basis(4), 2, with_quantifiers=False)
        one, _ = trajectory_observables(build_basis(2), 1, with_quantifiers=False)
        bell = pure_to_density(np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2.0))

        assert two["negativity"](pure_to_density(dark_state_4_2(build_basis(4)))) == pytest.approx(1.0 / 3.0)
        assert one["negativity"](bell) == pytest.approx(0.5)

    @pytest.mark.slow
    def test_shifted_negativity_is_continuous_along_the_trajectory(self):
        basis = build_basis(4)
        model = build_model(basis, N=2)
        rho = evolve_state(model, pure_to_density(initial_state_fig2(basis)), 1e-3, 0.5)
        _, expensive = trajectory_observables(basis, 2)
        cfg = IntegratorConfig(dt=1e-3, t_max=0.2, record_every=50, quantifier_every=50)

        record = rk4_evolve(model, rho, cfg, quantifiers={"shifted": expensive["shifted_negativity"]})

        values = np.array(record.series("shifted"))
        assert len(values) == 5
        assert np.all((values > 0.013) & (values < 0.023))
        assert np.max(np.abs(np.diff(values))) <= 4e-3

    def test_quantifiers_are_warm_started(self):
        _, expensive = trajectory_observables(build_basis(4), 2, cfg=OptimizerConfig(restarts=1))

        assert set(expensive) == {"q_particles", "shifted_negativity"}
        assert all(isinstance(q, WarmStartedQuantifier) for q in expensive.values())


class TestWarmStartedQuantifier:
    """Tests for WarmStartedQuantifier."""

    def test_reuses_previous_basis(self):
        evaluate = MagicMock(side_effect=[(0.5, "first"), (0.25, "second")])
        cfg = OptimizerConfig(restarts=1)
        quantifier = WarmStartedQuantifier(evaluate, cfg)

        values = [quantifier("rho0"), quantifier("rho1")]

        assert values == [0.5, 0.25]
        evaluate.assert_any_call("rho0", cfg, [])
        evaluate.assert_called_with("rho1", cfg, ["first"])


class TestDetectPptWindow:
    """Tests for detect_ppt_window function."""

    def test_interval_of_vanishing_negativity(self):
        record = TrajectoryRecord(
            times=[0.0, 0.1, 0.2, 0.3],
            observables={"negativity": [0.1, 0.0, 0.0, 0.2], "concurrence": [0.5, 0.3, 0.2, 0.1]},
        )

        assert detect_ppt_window(record) == (0.1, 0.2)

    def test_window_ends_at_the_first_gap(self):
        record = TrajectoryRecord(
            times=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            observables={
                "negativity": [0.0, 0.0, 0.2, 0.0, 0.0, 0.1],
                "concurrence": [0.3, 0.3, 0.3, 0.3, 0.3, 0.3],
            },
        )

        assert detect_ppt_window(record) == (0.0, 0.1)
        assert ppt_windows(record) == [(0.0, 0.1), (0.3, 0.4)]

    def test_unsampled_records_do_not_split_a_window(self):
        record = TrajectoryRecord(
            times=[0.0, 0.1, 0.2],
            observables={"negativity": [0.0, None, 0.0], "concurrence": [0.3, 0.3, 0.3]},
        )

        assert ppt_windows(record) == [(0.0, 0.2)]

    def test_doubled_dissipator_window(self):
        start, end = _reference_window("doubled", 0.6)

        assert start <= 0.45 and end >= 0.3
        assert 0.27 <= start <= 0.31
        assert 0.42 <= end <= 0.45

    def test_standard_dissipator_runs_at_half_speed(self):
        doubled = _reference_window("doubled", 0.6)
        standard = _reference_window("standard", 1.0)

        assert 0.55 <= standard[0] <= 0.62
        assert 0.84 <= standard[1] <= 0.89
        assert np.allclose(standard, 2.0 * np.array(doubled), atol=0.02)

    def test_requires_concurrence(self):
        record = TrajectoryRecord(times=[0.0], observables={"negativity": [0.0]})

        assert detect_ppt_window(record) is None

    def test_no_window(self):
        record = TrajectoryRecord(times=[0.0], observables={"negativity": [0.3], "concurrence": [0.5]})

        assert detect_ppt_window(record) is None
