"""Environment configuration and logging setup."""

import logging
import math
import os

# Environment configuration
LOG_BASE = os.environ.get("FERMIQ_LOG_BASE", "2")
THREADS = int(os.environ.get("FERMIQ_THREADS", str(os.cpu_count() or 1)))
SEED = int(os.environ.get("FERMIQ_SEED", "0"))
LOG_LEVEL = os.environ.get("FERMIQ_LOG_LEVEL", "WARNING")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_BASE_ALIASES = {
    "2": 2.0,
    "bits": 2.0,
    "e": math.e,
    "nats": math.e,
}


def parse_log_base(value: str | float) -> float:
    """Turn a ``--log-base`` style value into the numeric logarithm base."""
    if isinstance(value, (int, float)):
        if value <= 1:
            raise ValueError(f"log base must exceed 1, got {value}")
        return float(value)
    try:
        return _BASE_ALIASES[value.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown log base {value!r}; expected one of 2, e, bits, nats") from None


def unit_label(base: float) -> str:
    """Name of the entropy unit for a logarithm base."""
    if math.isclose(base, 2.0):
        return "bits"
    if math.isclose(base, math.e):
        return "nats"
    return f"log{base:g}"


def default_log_base() -> float:
    return parse_log_base(LOG_BASE)


def configure_logging(level: str | None = None) -> None:
    """Route library logging to stderr at the requested level."""
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT)
