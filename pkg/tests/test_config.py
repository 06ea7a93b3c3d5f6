"""Unit tests for environment configuration and the error hierarchy."""

import math
from unittest.mock import patch

import pytest

from fermiq import config
from fermiq.errors import (
    CapabilityError,
    FermiqError,
    IntegrationError,
    ModeIndexError,
    StateSpecError,
    ValidationError,
    error_document,
)


class TestParseLogBase:
    """Tests for parse_log_base function."""

    @pytest.mark.parametrize("value", ["2", "bits", " Bits "])
    def test_bits_aliases(self, value):
        assert config.parse_log_base(value) == 2.0

    @pytest.mark.parametrize("value", ["e", "nats"])
    def test_nats_aliases(self, value):
        assert config.parse_log_base(value) == math.e

    def test_numeric_base(self):
        assert config.parse_log_base(10) == 10.0

    def test_rejects_unknown_name(self):
        with pytest.raises(ValueError, match="unknown log base"):
            config.parse_log_base("decibels")

    def test_rejects_base_not_above_one(self):
        with pytest.raises(ValueError):
            config.parse_log_base(1)


class TestUnitLabel:
    """Tests for unit_label function."""

    def test_named_units(self):
        assert config.unit_label(2.0) == "bits"
        assert config.unit_label(math.e) == "nats"

    def test_other_base(self):
        assert config.unit_label(10.0) == "log10"


class TestDefaultLogBase:
    """Tests for default_log_base function."""

    def test_follows_environment_constant(self):
        with patch.object(config, "LOG_BASE", "e"):
            assert config.default_log_base() == math.e


class TestConfigureLogging:
    """Tests for configure_logging function."""

    def test_uses_requested_level(self):
        with patch("fermiq.config.logging.basicConfig") as basic_config:
            config.configure_logging("debug")

        basic_config.assert_called_once_with(level="DEBUG", format=config.LOG_FORMAT)

    def test_falls_back_to_environment_level(self):
        with patch.object(config, "LOG_LEVEL", "info"), patch("fermiq.config.logging.basicConfig") as basic_config:
            config.configure_logging()

        assert basic_config.call_args.kwargs["level"] == "INFO"


class TestErrors:
    """Tests for the exception hierarchy."""

    def test_all_errors_share_the_base(self):
        for cls in (ValidationError, ModeIndexError, CapabilityError, StateSpecError, IntegrationError):
            assert issubclass(cls, FermiqError)

    def test_builtin_compatibility(self):
        assert issubclass(ModeIndexError, IndexError)
        assert issubclass(ValidationError, ValueError)
        assert issubclass(IntegrationError, ArithmeticError)

    def test_exit_codes(self):
        assert ValidationError.exit_code == 2
        assert StateSpecError.exit_code == 2
        assert IntegrationError.exit_code == 3

    def test_integration_error_keeps_time(self):
        error = IntegrationError("trace drifted", time=1.5)

        assert error.time == 1.5
        assert str(error) == "trace drifted"


class TestErrorDocument:
    """Tests for error_document function."""

    def test_format(self):
        document = error_document("bad spec", StateSpecError.error_type)

        assert document == {"error": {"message": "bad spec", "type": "invalid_request_error"}}

    def test_default_type(self):
        assert error_document("boom")["error"]["type"] == "server_error"
