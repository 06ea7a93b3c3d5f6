"""Unit tests for the executable property suites."""

import numpy as np
import pytest

from fermiq.checks import (
    SUITES,
    PropertyResult,
    SuiteReport,
    random_parity_state,
    random_sector_pure_state,
    run_suite,
)
from fermiq.errors import ValidationError
from fermiq.optimize import OptimizerConfig
from fermiq.quantifiers import number_sector_of, parity_sector_of

FAST = OptimizerConfig(restarts=2)


class TestRandomStates:
    """Tests for the seeded state samplers."""

    def test_parity_state_has_one_sector(self):
        rho = random_parity_state(3, np.random.default_rng(0))

        assert parity_sector_of(rho) in (1, -1)
        assert np.real(np.trace(rho)) == pytest.approx(1.0)

    def test_sector_pure_state(self):
        psi = random_sector_pure_state(4, 2, np.random.default_rng(1))

        assert np.linalg.norm(psi) == pytest.approx(1.0)
        assert number_sector_of(np.outer(psi, psi.conj())) == 2


class TestReports:
    """Tests for PropertyResult and SuiteReport."""

    def test_status_strings(self):
        report = SuiteReport("fock", 1, 0, [PropertyResult("a", True, 1, 0.0), PropertyResult("b", False, 1, 1.0)])

        document = report.to_dict()

        assert not report.passed
        assert document["status"] == "fail"
        assert [p["status"] for p in document["properties"]] == ["pass", "fail"]


class TestRunSuite:
    """Tests for run_suite function."""

    def test_every_suite_is_registered(self):
        assert set(SUITES) == {"fock", "lemma", "theorem1", "theorem2", "theorem3", "appendix", "classical"}

    def test_unknown_suite(self):
        with pytest.raises(ValidationError, match="unknown suite"):
            run_suite("theorem9")

    def test_rejects_zero_samples(self):
        with pytest.raises(ValidationError):
            run_suite("fock", samples=0)

    def test_fock_suite(self):
        report = run_suite("fock", samples=3)

        assert report.passed
        assert len(report.properties) == 4

    def test_appendix_suite(self):
        report = run_suite("appendix", samples=2, seed=1, cfg=FAST)

        assert report.passed

    def test_lemma_suite(self):
        report = run_suite("lemma", samples=2, cfg=FAST)

        assert report.passed

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["theorem1", "theorem2", "theorem3", "classical"])
    def test_search_suites(self, name):
        report = run_suite(name, samples=2, cfg=FAST)

        assert report.passed, report.to_dict()
