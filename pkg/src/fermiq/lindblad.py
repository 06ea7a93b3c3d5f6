"""Purely dissipative evolution of a fermionic chain with number-conserving jump operators.

The jump operators are L_j = (a†_j + a†_{j+1})(a_j - a_{j+1}) for j = 1..L-1 and
the Hamiltonian is zero. Evolution runs inside a fixed particle-number sector
with a classic fixed-step fourth-order Runge-Kutta scheme.

Two normalizations of the dissipator are in use. The standard one is
J Σ (L ρ L† - ½{L†L, ρ}); the doubled one, J Σ (2 L ρ L† - {L†L, ρ}), runs the
same trajectory twice as fast in units of 1/J.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from fermiq.entanglement import (
    balanced_cut,
    fermionic_concurrence,
    mode_negativity,
    particle_negativity,
    shifted_negativity,
)
from fermiq.errors import IntegrationError, ShapeError, ValidationError
from fermiq.fock import FockBasis, NumberSector, Operator, annihilation_op, creation_op, number_op, sector, slater_state
from fermiq.optimize import OptimizerConfig
from fermiq.quantifiers import q_particles
from fermiq.quantinfo import clip_to_state, fidelity_pure, purity

logger = logging.getLogger(__name__)

CONSERVATION_TOL = 1e-10
NEGATIVITY_ZERO = 1e-6
CONCURRENCE_FLOOR = 0.01
TRAJECTORY_RESTARTS = 16

DISSIPATOR_SCALES = {"standard": 1.0, "doubled": 2.0}

Observable = Callable[[np.ndarray], float]


def chain_lindblad_ops(basis: FockBasis) -> list[Operator]:
    """L_j = (a†_j + a†_{j+1})(a_j - a_{j+1}) with open boundaries."""
    if basis.L < 2:
        raise ValidationError("the chain needs at least two sites")
    ops = []
    for j in range(1, basis.L):
        raising = creation_op(basis, j) + creation_op(basis, j + 1)
        lowering = annihilation_op(basis, j) - annihilation_op(basis, j + 1)
        ops.append(raising @ lowering)
    return ops


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Jump operators and rate; evolution happens in ``sector`` when one is set.

    ``convention`` names the dissipator normalization, see ``DISSIPATOR_SCALES``.
    """

    basis: FockBasis
    J: float
    ops: tuple[Operator, ...]
    hamiltonian: Operator | None = None
    sector: NumberSector | None = None
    convention: str = "standard"

    def __post_init__(self):
        if self.J <= 0:
            raise ValidationError(f"rate J must be positive, got {self.J}")
        if self.convention not in DISSIPATOR_SCALES:
            raise ValidationError(
                f"unknown dissipator convention {self.convention!r}; expected one of {sorted(DISSIPATOR_SCALES)}"
            )
        n = number_op(self.basis).matrix
        for k, op in enumerate(self.ops, start=1):
            if np.max(np.abs(op.matrix @ n - n @ op.matrix)) > CONSERVATION_TOL:
                raise ValidationError(f"jump operator {k} does not conserve particle number")

    @property
    def rate(self) -> float:
        """Prefactor of the standard-form dissipator."""
        return DISSIPATOR_SCALES[self.convention] * self.J

    @property
    def dim(self) -> int:
        return self.sector.dim if self.sector is not None else self.basis.dim

    def _restrict(self, m: np.ndarray) -> np.ndarray:
        return self.sector.restrict_matrix(m) if self.sector is not None else np.asarray(m, dtype=complex)

    @cached_property
    def jumps(self) -> np.ndarray:
        """Stacked jump operators in the working space, shape (L-1, dim, dim)."""
        return np.array([self._restrict(op.matrix) for op in self.ops])

    @cached_property
    def decay(self) -> np.ndarray:
        """Σ_j L†_j L_j in the working space."""
        return np.einsum("kba,kbc->ac", self.jumps.conj(), self.jumps)

    @cached_property
    def coherent(self) -> np.ndarray:
        if self.hamiltonian is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self._restrict(self.hamiltonian.matrix)

    def to_working(self, rho_full: np.ndarray) -> np.ndarray:
        return self._restrict(rho_full)

    def to_full(self, rho: np.ndarray) -> np.ndarray:
        return self.sector.embed_matrix(rho) if self.sector is not None else rho


def build_model(
    basis: FockBasis, J: float = 1.0, N: int | None = None, convention: str = "standard"
) -> LindbladModel:
    """Chain model, restricted to the N-particle sector when ``N`` is given."""
    return LindbladModel(
        basis=basis,
        J=J,
        ops=tuple(chain_lindblad_ops(basis)),
        sector=sector(basis, N) if N is not None else None,
        convention=convention,
    )


def liouvillian_apply(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """dρ/dt = -i[H, ρ] + γ Σ_j (L_j ρ L†_j - ½{L†_j L_j, ρ}) with γ = ``model.rate``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.dim, model.dim):
        raise ShapeError(f"state of shape {rho.shape} does not match the model dimension {model.dim}")
    jumps = model.jumps
    gain = np.einsum("kab,bc,kdc->ad", jumps, rho, jumps.conj())
    loss = model.decay @ rho + rho @ model.decay
    return -1j * (model.coherent @ rho - rho @ model.coherent) + model.rate * (gain - 0.5 * loss)


def rk4_step(model: LindbladModel, rho: np.ndarray, dt: float) -> np.ndarray:
    half = dt / 2.0
    k1 = liouvillian_apply(model, rho)
    k2 = liouvillian_apply(model, rho + half * k1)
    k3 = liouvillian_apply(model, rho + half * k2)
    k4 = liouvillian_apply(model, rho + dt * k3)
    return rho + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size and cadences, in units of 1/J and in steps."""

    dt: float = 1e-3
    t_max: float = 30.0
    record_every: int = 10
    quantifier_every: int = 50
    trace_tol: float = 1e-7
    positivity_tol: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ValidationError("dt and t_max must be positive")
        if self.record_every < 1 or self.quantifier_every < 1:
            raise ValidationError("record and quantifier cadences must be positive step counts")
        if self.quantifier_every % self.record_every:
            raise ValidationError("quantifier_every must be a multiple of record_every")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class TrajectoryRecord:
    """Recorded times with named observable series; None marks an unsampled value."""

    times: list[float] = field(default_factory=list)
    observables: dict[str, list[float | None]] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    final_state: np.ndarray | None = None

    def series(self, name: str) -> list[float | None]:
        return self.observables[name]

    def rows(self, columns: list[str]) -> list[list[float | None]]:
        missing = [None] * len(self.times)
        return [
            [t] + [self.observables.get(name, missing)[k] for name in columns]
            for k, t in enumerate(self.times)
        ]


def _check_state(rho: np.ndarray, t: float, cfg: IntegratorConfig) -> float:
    if not np.all(np.isfinite(rho)):
        raise IntegrationError(f"state diverged at t={t:.6g}; try halving dt (dt={cfg.dt:g})", time=t)
    trace_err = abs(np.trace(rho).real - 1.0)
    if trace_err > cfg.trace_tol:
        raise IntegrationError(
            f"trace drifted by {trace_err:.3e} at t={t:.6g}; try halving dt (dt={cfg.dt:g})", time=t
        )
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -cfg.positivity_tol:
        raise IntegrationError(
            f"state lost positivity (eigenvalue {lowest:.3e}) at t={t:.6g}; try halving dt (dt={cfg.dt:g})", time=t
        )
    return float(trace_err)


def rk4_evolve(
    model: LindbladModel,
    rho0: np.ndarray,
    cfg: IntegratorConfig | None = None,
    observables: dict[str, Observable] | None = None,
    quantifiers: dict[str, Observable] | None = None,
) -> TrajectoryRecord:
    """Integrate from ``rho0`` (full space or working space) and record observables.

    ``observables`` run at every record point, ``quantifiers`` every
    ``quantifier_every`` steps; both receive the full-space state.
    """
    cfg = cfg or IntegratorConfig()
    observables = observables or {}
    quantifiers = quantifiers or {}
    rho0 = np.asarray(rho0, dtype=complex)
    rho = model.to_working(rho0) if rho0.shape[0] != model.dim else rho0.copy()
    record = TrajectoryRecord(observables={name: [] for name in ["trace_err", *observables, *quantifiers]})
    min_eig = math.inf

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(cfg.n_steps + 1):
            if step % cfg.record_every == 0:
                t = step * cfg.dt
                rho = 0.5 * (rho + rho.conj().T)
                trace_err = _check_state(rho, t, cfg)
                min_eig = min(min_eig, float(np.linalg.eigvalsh(rho)[0]))
                full = model.to_full(clip_to_state(rho, cfg.positivity_tol))
                record.times.append(t)
                record.observables["trace_err"].append(trace_err)
                for name, observable in observables.items():
                    record.observables[name].append(float(observable(full)))
                sampled = step % cfg.quantifier_every == 0
                for name, observable in quantifiers.items():
                    record.observables[name].append(float(observable(full)) if sampled else None)
                if sampled:
                    logger.info("t=%.4g trace_err=%.2e", t, trace_err)
            if step < cfg.n_steps:
                rho = rk4_step(model, rho, cfg.dt)

    record.final_state = model.to_full(rho)
    record.diagnostics = {
        "steps": cfg.n_steps,
        "dt": cfg.dt,
        "max_trace_err": max(record.observables["trace_err"]),
        "min_eigenvalue": min_eig,
    }
    return record


def evolve_state(model: LindbladModel, rho0: np.ndarray, dt: float, t: float) -> np.ndarray:
    """Final full-space state after integrating to ``t`` without recording."""
    rho0 = np.asarray(rho0, dtype=complex)
    rho = model.to_working(rho0) if rho0.shape[0] != model.dim else rho0.copy()
    for _ in range(int(round(t / dt))):
        rho = rk4_step(model, rho, dt)
    return model.to_full(0.5 * (rho + rho.conj().T))


def step_doubling_check(
    model: LindbladModel, rho0: np.ndarray, cfg: IntegratorConfig, t: float, psi: np.ndarray
) -> float:
    """Change in the fidelity with ``psi`` at time ``t`` when dt is halved."""
    coarse = evolve_state(model, rho0, cfg.dt, t)
    fine = evolve_state(model, rho0, cfg.dt / 2.0, t)
    return abs(fidelity_pure(coarse, psi) - fidelity_pure(fine, psi))


def dark_state(basis: FockBasis, N: int) -> np.ndarray:
    """Equal-weight superposition of every N-particle configuration."""
    sec = sector(basis, N)
    return sec.embed(np.full(sec.dim, 1.0 / math.sqrt(sec.dim), dtype=complex))


def dark_state_4_2(basis: FockBasis) -> np.ndarray:
    if basis.L != 4:
        raise ValidationError(f"this dark state is defined for L=4, got L={basis.L}")
    return dark_state(basis, 2)


def initial_state_fig2(basis: FockBasis) -> np.ndarray:
    """a†_1 a†_3 |vac>."""
    if basis.L != 4:
        raise ValidationError(f"the reference initial state is defined for L=4, got L={basis.L}")
    return slater_state(basis, (1, 0, 1, 0))


def dark_state_residual(model: LindbladModel, psi: np.ndarray) -> float:
    """max_j ‖L_j ψ‖."""
    psi = np.asarray(psi, dtype=complex)
    return max(float(np.linalg.norm(op.matrix @ psi)) for op in model.ops)


class WarmStartedQuantifier:
    """Observable that reuses the previous optimal basis as its first start.

    ``evaluate(rho, cfg, starts)`` returns the value and the basis achieving it.
    """

    def __init__(self, evaluate: Callable, cfg: OptimizerConfig):
        self.evaluate = evaluate
        self.cfg = cfg
        self.basis: np.ndarray | None = None

    def __call__(self, rho: np.ndarray) -> float:
        starts = [] if self.basis is None else [self.basis]
        value, self.basis = self.evaluate(rho, self.cfg, starts)
        return value


def negativity_kind(N: int) -> tuple[str, Observable]:
    """Name and evaluator of the negativity recorded along a trajectory with N particles."""
    if N == 2:
        return "particle", lambda rho: particle_negativity(rho).value

    def across_cut(rho):
        return mode_negativity(rho, balanced_cut(rho.shape[0].bit_length() - 1)).value

    return "mode", across_cut


def trajectory_observables(
    basis: FockBasis,
    N: int = 2,
    cfg: OptimizerConfig | None = None,
    base: float = 2.0,
    with_quantifiers: bool = True,
) -> tuple[dict[str, Observable], dict[str, Observable]]:
    """Cheap per-record observables and the warm-started quantifiers.

    The negativity is the particle negativity for two fermions and the balanced-cut
    mode negativity otherwise. The concurrence is only defined for two fermions in
    four modes and is left out elsewhere.
    """
    psi_dark = dark_state(basis, N)
    cheap = {
        "purity": purity,
        "fidelity": lambda rho: fidelity_pure(rho, psi_dark),
        "negativity": negativity_kind(N)[1],
    }
    if (basis.L, N) == (4, 2):
        cheap["concurrence"] = lambda rho: fermionic_concurrence(rho).value
    if not with_quantifiers:
        return cheap, {}
    cfg = cfg or OptimizerConfig(restarts=TRAJECTORY_RESTARTS)

    def quantumness(rho, c, starts):
        result = q_particles(rho, c, base=base, starts=starts)
        return result.value, result.optimal_basis[0]

    def shifted(rho, c, starts):
        result = shifted_negativity(rho, c, starts=starts)
        return result.value, result.metadata["optimal_basis"]

    expensive = {
        "q_particles": WarmStartedQuantifier(quantumness, cfg),
        "shifted_negativity": WarmStartedQuantifier(shifted, cfg),
    }
    return cheap, expensive


def ppt_windows(
    record: TrajectoryRecord,
    negativity_tol: float = NEGATIVITY_ZERO,
    concurrence_floor: float = CONCURRENCE_FLOOR,
) -> list[tuple[float, float]]:
    """Maximal runs of consecutive records with vanishing negativity while the concurrence persists.

    Records without a sampled negativity are skipped and do not end a run.
    """
    concurrence = record.observables.get("concurrence")
    if concurrence is None:
        return []
    windows: list[tuple[float, float]] = []
    start = end = None
    for t, n, c in zip(record.times, record.observables["negativity"], concurrence, strict=True):
        if n is None or c is None:
            continue
        if n <= negativity_tol and c > concurrence_floor:
            start = t if start is None else start
            end = t
        elif start is not None:
            windows.append((start, end))
            start = None
    if start is not None:
        windows.append((start, end))
    return windows


def detect_ppt_window(
    record: TrajectoryRecord,
    negativity_tol: float = NEGATIVITY_ZERO,
    concurrence_floor: float = CONCURRENCE_FLOOR,
) -> tuple[float, float] | None:
    """First and last time of the earliest window of vanishing negativity with persisting concurrence."""
    windows = ppt_windows(record, negativity_tol, concurrence_floor)
    return windows[0] if windows else None
