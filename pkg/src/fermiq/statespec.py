"""State specification files for ``fermiq quantumness``.

A spec is an INI file with either a ``[builtin]`` section naming a reference
state or a ``[matrix]`` section listing an explicit density matrix::

    [builtin]
    name = slater
    modes = 4
    occupations = 1,0,1,0

    [matrix]
    modes = 1
    rows =
        0.5,0 0,0
        0,0 0.5,0

    [options]
    log_base = e
"""

import configparser
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fermiq.config import parse_log_base
from fermiq.errors import FermiqError, StateSpecError
from fermiq.fock import MAX_MODES, build_basis, slater_state
from fermiq.lindblad import dark_state_4_2, initial_state_fig2
from fermiq.quantinfo import pure_to_density, validate_state

logger = logging.getLogger(__name__)

BUILTINS = ("dark_4_2", "slater", "bell_modes", "initial_fig2")


@dataclass
class StateSpec:
    rho: np.ndarray
    L: int
    source: str
    log_base: float | None = None

    def describe(self) -> dict:
        return {"source": self.source, "modes": self.L}


def _modes(section: configparser.SectionProxy, default: int | None = None) -> int:
    raw = section.get("modes")
    if raw is None:
        if default is None:
            raise StateSpecError(f"[{section.name}] needs a 'modes' entry")
        return default
    try:
        L = int(raw)
    except ValueError:
        raise StateSpecError(f"modes must be an integer, got {raw!r}") from None
    if not 1 <= L <= MAX_MODES:
        raise StateSpecError(f"modes must lie in 1..{MAX_MODES}, got {L}")
    return L


def _parse_entry(token: str) -> complex:
    parts = token.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise StateSpecError(f"matrix entry {token!r} is not of the form re,im")


def _builtin(section: configparser.SectionProxy) -> tuple[np.ndarray, int, str]:
    name = section.get("name", "").strip()
    if name in ("dark_4_2", "initial_fig2"):
        if _modes(section, 4) != 4:
            raise StateSpecError(f"builtin {name} is defined on 4 modes")
        basis = build_basis(4)
        psi = dark_state_4_2(basis) if name == "dark_4_2" else initial_state_fig2(basis)
        return pure_to_density(psi), 4, f"builtin:{name}"

    if name == "slater":
        L = _modes(section)
        raw = section.get("occupations")
        if raw is None:
            raise StateSpecError("builtin slater needs an 'occupations' list")
        try:
            occupations = [int(x) for x in raw.replace(",", " ").split()]
        except ValueError:
            raise StateSpecError(f"occupations must be 0/1 values, got {raw!r}") from None
        if len(occupations) != L or any(x not in (0, 1) for x in occupations):
            raise StateSpecError(f"occupations must be {L} values of 0 or 1, got {raw!r}")
        return pure_to_density(slater_state(build_basis(L), occupations)), L, "builtin:slater"

    if name == "bell_modes":
        L = _modes(section, 2)
        if L < 2:
            raise StateSpecError("builtin bell_modes needs at least two modes")
        basis = build_basis(L)
        first = slater_state(basis, [1, 0] + [0] * (L - 2))
        second = slater_state(basis, [0, 1] + [0] * (L - 2))
        return pure_to_density((first + second) / math.sqrt(2.0)), L, "builtin:bell_modes"

    raise StateSpecError(f"unknown builtin {name!r}; expected one of {', '.join(BUILTINS)}")


def _matrix(section: configparser.SectionProxy) -> tuple[np.ndarray, int, str]:
    L = _modes(section)
    lines = [line.strip() for line in section.get("rows", "").splitlines() if line.strip()]
    rows = [[_parse_entry(token) for token in line.split()] for line in lines]
    dim = 1 << L
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise StateSpecError(f"matrix for {L} modes must have {dim} rows of {dim} entries")
    try:
        rho = validate_state(np.array(rows, dtype=complex))
    except FermiqError as exc:
        raise StateSpecError(f"matrix is not a density matrix: {exc}") from exc
    return rho, L, "matrix"


def parse_state_spec(text: str) -> StateSpec:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise StateSpecError(f"could not parse state spec: {exc}") from exc

    has_builtin, has_matrix = parser.has_section("builtin"), parser.has_section("matrix")
    if has_builtin == has_matrix:
        raise StateSpecError("state spec needs exactly one of [builtin] or [matrix]")
    rho, L, source = _builtin(parser["builtin"]) if has_builtin else _matrix(parser["matrix"])

    log_base = None
    if parser.has_option("options", "log_base"):
        try:
            log_base = parse_log_base(parser.get("options", "log_base"))
        except ValueError as exc:
            raise StateSpecError(str(exc)) from exc

    logger.debug("parsed state spec %s on %d modes", source, L)
    return StateSpec(rho, L, source, log_base)


def load_state_spec(path: str | Path) -> StateSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StateSpecError(f"cannot read state spec {path}: {exc}") from exc
    return parse_state_spec(text)
