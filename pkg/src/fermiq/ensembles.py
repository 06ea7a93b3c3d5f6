"""Parity-restricted random state ensembles and the measurement-disturbance landscape.

For every sampled state the disturbance S(ρ‖Π^{(φ,θ)}[ρ]) of a single-mode
measurement is evaluated on the whole (φ, θ) grid; the landscape is its ensemble
mean minus the per-state grid minimum.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from fermiq.errors import ValidationError
from fermiq.fock import MAX_MODES, FockBasis, compound_lift, parity_signs
from fermiq.measurement import DEFAULT_GRID, angle_grid, disturbance_landscape
from fermiq.optimize import OptimizerConfig
from fermiq.quantifiers import one_way_deficit
from fermiq.quantinfo import ginibre_state, random_unitary

logger = logging.getLogger(__name__)

BATCH_SIZE = 256


class EnsembleKind(str, Enum):
    PAR1 = "par1"
    PAR = "par"
    SLATER = "slater"


@dataclass(frozen=True)
class EnsembleSpec:
    """Which states to draw and how many.

    ``rank`` is the ancilla dimension of the induced measure; None means the
    dimension of the parity block (Hilbert-Schmidt measure).
    """

    kind: EnsembleKind = EnsembleKind.PAR1
    L: int = 3
    measured_mode: int = 1
    sample_size: int = 10_000
    rank: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", EnsembleKind(self.kind))
        if not 1 <= self.L <= MAX_MODES:
            raise ValidationError(f"L must lie in 1..{MAX_MODES}, got {self.L}")
        if not 1 <= self.measured_mode <= self.L:
            raise ValidationError(f"measured mode {self.measured_mode} outside 1..{self.L}")
        if self.sample_size < 1:
            raise ValidationError("sample_size must be at least 1")
        if self.rank is not None and self.rank < 1:
            raise ValidationError("rank must be at least 1")

    @property
    def block_dim(self) -> int:
        return 1 << (self.L - 1)

    @property
    def effective_rank(self) -> int:
        return self.rank if self.rank is not None else self.block_dim

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "L": self.L,
            "measured_mode": self.measured_mode,
            "sample_size": self.sample_size,
            "rank": self.effective_rank,
            "seed": self.seed,
        }


def _parity_blocks(L: int) -> tuple[np.ndarray, np.ndarray]:
    signs = parity_signs(FockBasis(L))
    return np.flatnonzero(signs > 0), np.flatnonzero(signs < 0)


def sample_state(spec: EnsembleSpec, index: int) -> np.ndarray:
    """State number ``index`` of the ensemble; depends only on (seed, index)."""
    rng = np.random.default_rng([spec.seed, index])
    dim = 1 << spec.L
    even, odd = _parity_blocks(spec.L)
    rho = np.zeros((dim, dim), dtype=complex)

    if spec.kind is EnsembleKind.PAR1:
        block = even if index % 2 == 0 else odd
        rho[np.ix_(block, block)] = ginibre_state(spec.block_dim, spec.effective_rank, rng)
        return rho

    if spec.kind is EnsembleKind.PAR:
        q = rng.uniform()
        rho[np.ix_(even, even)] = q * ginibre_state(spec.block_dim, spec.effective_rank, rng)
        rho[np.ix_(odd, odd)] = (1.0 - q) * ginibre_state(spec.block_dim, spec.effective_rank, rng)
        return rho

    # Slater determinant whose measured mode is one of its orbitals
    occupation = rng.integers(0, 2, size=spec.L)
    u = np.eye(spec.L, dtype=complex)
    others = [k for k in range(spec.L) if k != spec.measured_mode - 1]
    if others:
        u[np.ix_(others, others)] = random_unitary(len(others), rng)
    psi = compound_lift(u)[:, int("".join(map(str, occupation)), 2)]
    return np.outer(psi, psi.conj())


@dataclass
class LandscapeGrid:
    phis: np.ndarray
    thetas: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    n: int
    q_values: np.ndarray = field(repr=False)

    def rows(self) -> list[tuple[float, float, float, float, int]]:
        return [
            (float(phi), float(theta), float(self.mean[a, b]), float(self.se[a, b]), self.n)
            for a, phi in enumerate(self.phis)
            for b, theta in enumerate(self.thetas)
        ]

    def cell(self, phi: float, theta: float) -> tuple[int, int]:
        return int(np.argmin(np.abs(self.phis - phi))), int(np.argmin(np.abs(self.thetas - theta)))


@dataclass
class HistogramRecord:
    bin_left: np.ndarray
    bin_right: np.ndarray
    prob: np.ndarray

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.bin_left.tolist(), self.bin_right.tolist(), self.prob.tolist(), strict=True))


def _chunk(spec, indices, phis, thetas, refine_cfg):
    total = np.zeros((len(phis), len(thetas)))
    squares = np.zeros_like(total)
    q_values = []
    for index in indices:
        rho = sample_state(spec, index)
        disturbance = disturbance_landscape(rho, spec.measured_mode, phis, thetas)
        q = float(disturbance.min())
        if refine_cfg is not None:
            q = min(q, one_way_deficit(rho, (spec.measured_mode,), refine_cfg).value)
        excess = disturbance - q
        total += excess
        squares += excess**2
        q_values.append(q)
    return total, squares, q_values


def t_landscape(
    spec: EnsembleSpec,
    grid: tuple[int, int] = DEFAULT_GRID,
    threads: int = 1,
    refine: bool = False,
) -> LandscapeGrid:
    """Monte-Carlo mean and standard error of the excess disturbance over the grid."""
    phis, thetas = angle_grid(*grid)
    refine_cfg = OptimizerConfig(restarts=2, seed=spec.seed) if refine else None
    starts = range(0, spec.sample_size, BATCH_SIZE)
    chunks = [range(start, min(start + BATCH_SIZE, spec.sample_size)) for start in starts]

    def work(indices):
        return _chunk(spec, indices, phis, thetas, refine_cfg)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(indices) for indices in chunks]

    total = np.zeros((len(phis), len(thetas)))
    squares = np.zeros_like(total)
    q_values: list[float] = []
    for chunk_total, chunk_squares, chunk_q in results:
        total += chunk_total
        squares += chunk_squares
        q_values.extend(chunk_q)

    n = spec.sample_size
    mean = total / n
    if n > 1:
        variance = np.clip((squares - n * mean**2) / (n - 1), 0.0, None)
        se = np.sqrt(variance / n)
    else:
        se = np.full_like(mean, math.nan)
    logger.info("landscape over %d %s states: min cell %.3e", n, spec.kind.value, float(mean.min()))
    return LandscapeGrid(phis, thetas, mean, se, n, np.array(q_values))


def histogram_from_values(q_values, bins: int = 50) -> HistogramRecord:
    """Normalized histogram on [0, max Q]."""
    q_values = np.asarray(q_values, dtype=float)
    if bins < 1:
        raise ValidationError("bins must be at least 1")
    top = float(q_values.max()) if q_values.size and q_values.max() > 0 else 1.0
    counts, edges = np.histogram(q_values, bins=bins, range=(0.0, top))
    return HistogramRecord(edges[:-1], edges[1:], counts / max(len(q_values), 1))


def quantumness_histogram(
    spec: EnsembleSpec, bins: int = 50, grid: tuple[int, int] = DEFAULT_GRID, threads: int = 1
) -> HistogramRecord:
    """Distribution of the per-state quantumness over the ensemble."""
    return histogram_from_values(t_landscape(spec, grid, threads).q_values, bins)
