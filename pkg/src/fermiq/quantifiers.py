"""Quantumness-of-correlations quantifiers for fermionic mode systems.

Closed forms are used whenever the state sits in a single parity sector, where
occupation-basis (symmetric) measurements are optimal. Outside that regime the
quantifiers fall back to a joint search over single-particle bases and local
mode rotations, and the result is flagged with ``route="fallback"``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, schur
from scipy.special import entr

from fermiq.entanglement import natural_orbitals
from fermiq.errors import CapabilityError, PreconditionError, ShapeError, ValidationError
from fermiq.fock import (
    FockBasis,
    SingleParticleUnitary,
    bogoliubov_lift,
    compound_lift,
    parity_signs,
    sector_indices,
    sector_unitary,
)
from fermiq.measurement import (
    ModePartition,
    angle_grid,
    block_unitary,
    disturbance_landscape,
    embed_local,
    occupation_dephase,
    rotated_dephase,
)
from fermiq.optimize import OptimizerConfig, minimize_over_unitaries
from fermiq.quantinfo import (
    EPS_EIG,
    as_matrix,
    binary_entropy,
    negativity_of,
    partial_trace,
    partial_transpose_dims,
    purity,
    random_unitary,
    relative_entropy,
    schmidt_state,
    spectrum,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-8
SECTOR_WEIGHT_TOL = 1e-10
MAX_BLOCK_MODES = 3
LEMMA_SLACK = 1e-8


@dataclass
class QuantifierResult:
    """Value of a quantifier with the basis that achieves it."""

    value: float
    base: float | None
    optimal_basis: list[np.ndarray]
    restarts: int = 0
    iterations: int = 0
    gap: float | None = None
    converged: bool = True
    route: str = "closed_form"
    extra: dict = field(default_factory=dict)

    def optimizer_stats(self) -> dict:
        return {"restarts": self.restarts, "iterations": self.iterations, "gap": self.gap}


def _entropy_nats(eigvals: np.ndarray) -> float:
    return float(entr(eigvals[eigvals > EPS_EIG]).sum())


def _block_entropy(block: np.ndarray) -> float:
    """Entropy of an unnormalized positive block."""
    if block.size == 0:
        return 0.0
    return _entropy_nats(np.clip(np.linalg.eigvalsh(block), 0.0, None))


def _mode_count(m: np.ndarray) -> int:
    L = m.shape[0].bit_length() - 1
    if m.shape != (1 << L, 1 << L):
        raise ShapeError(f"state of shape {m.shape} is not on a Fock space")
    return L


def parity_sector_of(rho) -> int | None:
    """+1 or -1 when ρ commutes with parity and lives in one of its sectors, else None."""
    m = as_matrix(rho)
    signs = parity_signs(FockBasis(_mode_count(m)))
    commutator = signs[:, None] * m - m * signs[None, :]
    if np.max(np.abs(commutator)) > SYMMETRY_TOL:
        return None
    diag = np.real(np.diag(m))
    even, odd = diag[signs > 0].sum(), diag[signs < 0].sum()
    if odd <= SYMMETRY_TOL:
        return 1
    if even <= SYMMETRY_TOL:
        return -1
    return None


def number_sector_of(rho) -> int | None:
    """Particle number N when ρ is supported on one number sector, else None."""
    m = as_matrix(rho)
    L = _mode_count(m)
    diag = np.real(np.diag(m))
    weights = [diag[sector_indices(L, N)].sum() for N in range(L + 1)]
    occupied = [N for N, w in enumerate(weights) if w > SECTOR_WEIGHT_TOL]
    return occupied[0] if len(occupied) == 1 else None


class _SupportFrame:
    """ρ restricted to the number sectors it populates, for fast rotations.

    Γ(U) is block diagonal in N, so the rotated state never leaves these sectors.
    """

    def __init__(self, m: np.ndarray):
        self.L = _mode_count(m)
        diag = np.real(np.diag(m))
        self.numbers = [N for N in range(self.L + 1) if diag[sector_indices(self.L, N)].sum() > SECTOR_WEIGHT_TOL]
        self.indices = np.concatenate([sector_indices(self.L, N) for N in self.numbers])
        self.rho = m[np.ix_(self.indices, self.indices)]
        bits = (self.indices[:, None] >> (self.L - 1 - np.arange(self.L))) & 1
        self.occupied = [np.flatnonzero(bits[:, j] == 1) for j in range(self.L)]
        self.empty = [np.flatnonzero(bits[:, j] == 0) for j in range(self.L)]
        self.entropy = _entropy_nats(spectrum(m))

    def rotate(self, u: np.ndarray) -> np.ndarray:
        gamma = block_diag(*[sector_unitary(u, N) for N in self.numbers])
        return gamma @ self.rho @ gamma.conj().T

    def occupation_deficit(self, u: np.ndarray) -> float:
        """H{p(l)} - S(ρ) in the basis U, in nats."""
        probs = np.clip(np.real(np.diag(self.rotate(u))), 0.0, None)
        return float(entr(probs).sum()) - self.entropy

    def mode_deficits(self, u: np.ndarray) -> np.ndarray:
        """S(Π_j(ρ')) - S(ρ') for every mode j of the rotated state, in nats."""
        rotated = self.rotate(u)
        return np.array(
            [
                _block_entropy(rotated[np.ix_(self.empty[j], self.empty[j])])
                + _block_entropy(rotated[np.ix_(self.occupied[j], self.occupied[j])])
                - self.entropy
                for j in range(self.L)
            ]
        )


def single_mode_deficit_symmetric(rho, j: int, base: float = 2.0) -> float:
    """S(a†_j a_j ρ a†_j a_j + a_j a†_j ρ a_j a†_j) - S(ρ) for single-parity-sector states."""
    m = as_matrix(rho)
    L = _mode_count(m)
    FockBasis(L).check_mode(j)
    if parity_sector_of(m) is None:
        raise PreconditionError(
            "state is not confined to a single parity sector; use one_way_deficit for a general measurement"
        )
    value = _entropy_nats(spectrum(occupation_dephase(m, [j]))) - _entropy_nats(spectrum(m))
    return max(value, 0.0) / math.log(base)


def _local_eigenbasis(m: np.ndarray, modes) -> np.ndarray:
    reduced = partial_trace(m, modes)
    _, vectors = np.linalg.eigh(0.5 * (reduced + reduced.conj().T))
    return vectors.astype(complex)


def one_way_deficit(rho, modes_a, cfg: OptimizerConfig | None = None, base: float = 2.0) -> QuantifierResult:
    """min over rank-1 measurements on ``modes_a`` of S(Π^A(ρ)) - S(ρ)."""
    m = as_matrix(rho)
    L = _mode_count(m)
    modes_a = tuple(sorted(set(modes_a)))
    if not modes_a or any(not 1 <= j <= L for j in modes_a):
        raise ValidationError(f"invalid measured modes {modes_a} for {L} modes")
    if len(modes_a) > MAX_BLOCK_MODES:
        raise CapabilityError(f"one-way deficit searches U(2^|A|); |A| = {len(modes_a)} exceeds {MAX_BLOCK_MODES}")
    entropy = _entropy_nats(spectrum(m))

    def objective(unitaries):
        w = embed_local(unitaries[0], modes_a, L)
        return _entropy_nats(spectrum(occupation_dephase(w.conj().T @ m @ w, modes_a))) - entropy

    d = 1 << len(modes_a)
    starts = [[np.eye(d, dtype=complex)], [_local_eigenbasis(m, modes_a)]]
    result = minimize_over_unitaries(objective, (d,), cfg, starts=starts)
    return _search_result(result, base, "search")


def mreq(rho, partition: ModePartition, cfg: OptimizerConfig | None = None, base: float = 2.0) -> QuantifierResult:
    """Relative entropy to the closest state dephased on every block of ``partition``."""
    m = as_matrix(rho)
    L = _mode_count(m)
    partition.check(L)
    if any(len(block) > MAX_BLOCK_MODES for block in partition.blocks):
        raise CapabilityError(f"partition blocks are limited to {MAX_BLOCK_MODES} modes")
    entropy = _entropy_nats(spectrum(m))

    if all(len(block) == 1 for block in partition.blocks) and parity_sector_of(m) is not None:
        value = _entropy_nats(spectrum(occupation_dephase(m, partition.measured))) - entropy
        return QuantifierResult(
            value=max(value, 0.0) / math.log(base),
            base=base,
            optimal_basis=[np.eye(2, dtype=complex) for _ in partition.blocks],
        )

    dims = tuple(1 << len(block) for block in partition.blocks)

    def objective(unitaries):
        return _entropy_nats(spectrum(rotated_dephase(m, partition.blocks, unitaries))) - entropy

    starts = [
        [np.eye(d, dtype=complex) for d in dims],
        [_local_eigenbasis(m, block) for block in partition.blocks],
    ]
    result = minimize_over_unitaries(objective, dims, cfg, starts=starts)
    return _search_result(result, base, "search")


def natural_orbital_basis(rho) -> np.ndarray:
    """Basis diagonalizing the one-body density matrix."""
    return natural_orbitals(as_matrix(rho))


def pairing_basis(rho) -> np.ndarray | None:
    """Basis putting a real two-particle amplitude matrix into 2x2 pairing blocks.

    Uses the dominant eigenvector of ρ; returns None unless that vector is a
    two-particle state whose amplitudes are real up to a global phase.
    """
    m = as_matrix(rho)
    L = _mode_count(m)
    if L < 2:
        return None
    eigvals, vectors = np.linalg.eigh(0.5 * (m + m.conj().T))
    psi = vectors[:, -1]
    idx = sector_indices(L, 2)
    if np.linalg.norm(psi[idx]) < 1.0 - 1e-8:
        return None
    top = psi[idx][np.argmax(np.abs(psi[idx]))]
    amplitudes = psi[idx] * abs(top) / top
    if np.max(np.abs(amplitudes.imag)) > 1e-8:
        return None
    c = np.zeros((L, L))
    for s, amplitude in zip(idx, amplitudes.real, strict=True):
        i, k = [p for p in range(L) if (s >> (L - 1 - p)) & 1]
        c[i, k], c[k, i] = amplitude, -amplitude
    _, q = schur(c, output="real")
    return q.T.astype(complex)


def _informed_starts(m: np.ndarray, starts) -> list[list[np.ndarray]]:
    L = _mode_count(m)
    informed = [[np.asarray(u, dtype=complex)] for u in starts]
    informed.append([natural_orbital_basis(m)])
    informed.append([np.eye(L, dtype=complex)])
    pairing = pairing_basis(m)
    if pairing is not None:
        informed.append([pairing])
    return informed


def _search_result(result, base: float, route: str) -> QuantifierResult:
    """Package an optimizer outcome; trailing 2x2 unitaries of a joint search are local mode rotations."""
    n_basis = 1 if route == "fallback" else len(result.unitaries)
    return QuantifierResult(
        value=max(result.value, 0.0) / math.log(base),
        base=base,
        optimal_basis=result.unitaries[:n_basis],
        restarts=result.restarts,
        iterations=result.iterations,
        gap=result.gap,
        converged=result.converged,
        route=route,
        extra={"local_rotations": result.unitaries[n_basis:]} if len(result.unitaries) > n_basis else {},
    )


def q_particles(rho, cfg: OptimizerConfig | None = None, base: float = 2.0, starts=()) -> QuantifierResult:
    """Quantumness of indistinguishable particles: min_U H{diag(Γ(U) ρ Γ(U)†)} - S(ρ)."""
    m = as_matrix(rho)
    L = _mode_count(m)
    informed = _informed_starts(m, starts)

    if parity_sector_of(m) is not None:
        frame = _SupportFrame(m)
        result = minimize_over_unitaries(lambda us: frame.occupation_deficit(us[0]), (L,), cfg, starts=informed)
        return _search_result(result, base, "closed_form")

    logger.warning("state spans both parity sectors; searching single-particle and local mode bases jointly")
    entropy = _entropy_nats(spectrum(m))
    blocks = tuple((j,) for j in range(1, L + 1))

    def objective(unitaries):
        gamma = compound_lift(unitaries[0])
        w = block_unitary(blocks, unitaries[1:], L)
        v = gamma.conj().T @ w
        probs = np.clip(np.real(np.einsum("ia,ij,ja->a", v.conj(), m, v)), 0.0, None)
        return float(entr(probs).sum()) - entropy

    local = [np.eye(2, dtype=complex)] * L
    result = minimize_over_unitaries(objective, (L,) + (2,) * L, cfg, starts=[start + local for start in informed])
    return _search_result(result, base, "fallback")


def q_sp(rho, cfg: OptimizerConfig | None = None, base: float = 2.0, starts=()) -> QuantifierResult:
    """One-body quantumness: min_U Σ_j of the single-mode deficits of Γ(U) ρ Γ(U)†."""
    m = as_matrix(rho)
    L = _mode_count(m)
    informed = _informed_starts(m, starts)

    if parity_sector_of(m) is not None:
        frame = _SupportFrame(m)
        result = minimize_over_unitaries(lambda us: float(frame.mode_deficits(us[0]).sum()), (L,), cfg, starts=informed)
        return _search_result(result, base, "closed_form")

    logger.warning("state spans both parity sectors; searching single-particle and local mode bases jointly")
    entropy = _entropy_nats(spectrum(m))

    def objective(unitaries):
        gamma = compound_lift(unitaries[0])
        rotated = gamma @ m @ gamma.conj().T
        total = 0.0
        for j, local in enumerate(unitaries[1:], start=1):
            w = embed_local(local, (j,), L)
            total += _entropy_nats(spectrum(occupation_dephase(w.conj().T @ rotated @ w, [j]))) - entropy
        return total

    local = [np.eye(2, dtype=complex)] * L
    result = minimize_over_unitaries(objective, (L,) + (2,) * L, cfg, starts=[start + local for start in informed])
    return _search_result(result, base, "fallback")


def classical_state(basis: FockBasis, p, u: SingleParticleUnitary | np.ndarray | None = None) -> np.ndarray:
    """Γ(U) [Σ_l p(l) |l><l|] Γ(U)†."""
    p = np.asarray(p, dtype=float)
    if p.shape != (basis.dim,):
        raise ShapeError(f"need {basis.dim} occupation probabilities, got shape {p.shape}")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-10:
        raise ValidationError("occupation probabilities must be nonnegative and sum to 1")
    diagonal = np.diag(np.clip(p, 0.0, None)).astype(complex)
    if u is None:
        return diagonal
    gamma = bogoliubov_lift(basis, u).matrix
    return gamma @ diagonal @ gamma.conj().T


def _apparatus_rotation(m: np.ndarray, v) -> np.ndarray:
    d = m.shape[0]
    L = _mode_count(m)
    if v is None:
        return m
    v = v.u if isinstance(v, SingleParticleUnitary) else np.asarray(v, dtype=complex)
    if v.shape == (L, L):
        gamma = bogoliubov_lift(FockBasis(L), v).matrix
    elif v.shape == (d, d):
        gamma = v
    else:
        raise ShapeError(f"rotation of shape {v.shape} fits neither {L} modes nor dimension {d}")
    return gamma @ m @ gamma.conj().T


def copy_state(rho) -> np.ndarray:
    """Σ_kk' ρ_kk' |kk><k'k'|: ρ after the copying interaction with a blank apparatus."""
    m = as_matrix(rho)
    d = m.shape[0]
    diagonal = np.arange(d) * (d + 1)
    out = np.zeros((d * d, d * d), dtype=complex)
    out[np.ix_(diagonal, diagonal)] = m
    return out


def activation_entanglement(rho, v=None, functional: str = "negativity", base: float = 2.0) -> float:
    """Entanglement generated between system and apparatus after rotating by ``v`` and copying."""
    m = as_matrix(rho)
    rotated = _apparatus_rotation(m, v)
    d = m.shape[0]
    if functional == "negativity":
        return negativity_of(partial_transpose_dims(copy_state(rotated), [d, d], [1]))
    if functional == "entropy":
        if purity(m) < 1.0 - 1e-10:
            raise CapabilityError("entropy of entanglement is only defined here for pure inputs")
        probs = np.clip(np.real(np.diag(rotated)), 0.0, None)
        return float(entr(probs[probs > EPS_EIG]).sum()) / math.log(base)
    raise ValidationError(f"unknown entanglement functional {functional!r}; expected negativity or entropy")


def activation_quantumness(rho, cfg: OptimizerConfig | None = None, starts=()) -> QuantifierResult:
    """min over single-particle bases of the activated negativity."""
    m = as_matrix(rho)
    L = _mode_count(m)

    def objective(unitaries):
        gamma = compound_lift(unitaries[0])
        rotated = gamma @ m @ gamma.conj().T
        # the partially transposed copy splits into 2x2 blocks with eigenvalues ±|ρ'_kk'|
        return float(np.abs(np.triu(rotated, k=1)).sum())

    result = minimize_over_unitaries(objective, (L,), cfg, starts=_informed_starts(m, starts))
    return QuantifierResult(
        value=max(result.value, 0.0),
        base=None,
        optimal_basis=result.unitaries,
        restarts=result.restarts,
        iterations=result.iterations,
        gap=result.gap,
        converged=result.converged,
        route="search",
        extra={"functional": "negativity"},
    )


def basis_deficit_scan(p1: float, grid: tuple[int, int] = (61, 61), base: float = 2.0) -> dict:
    """h(p̃₁) of the two-mode Schmidt state measured on mode 1 along every grid direction."""
    phis, thetas = angle_grid(*grid)
    psi = schmidt_state(p1)
    values = disturbance_landscape(np.outer(psi, psi.conj()), 1, phis, thetas, base=base)
    bound = float(binary_entropy(p1, base=base))
    return {
        "phis": phis,
        "thetas": thetas,
        "values": values,
        "schmidt_value": bound,
        "minimum": float(values.min()),
        "holds": bool(values.min() >= bound - 1e-12),
    }


@dataclass
class SymmetryBlockDecomposition:
    """ρ split along the eigenspaces of a symmetry Θ."""

    symmetry: np.ndarray
    eigenvalues: list[float]
    degeneracies: list[int]
    weights: list[float]
    projectors: list[np.ndarray]
    block_states: list[np.ndarray | None]

    @classmethod
    def build(cls, rho, symmetry: np.ndarray, tol: float = 1e-9) -> "SymmetryBlockDecomposition":
        m = as_matrix(rho)
        theta = np.asarray(symmetry, dtype=complex)
        if theta.shape != m.shape:
            raise ShapeError(f"symmetry of shape {theta.shape} does not act on a state of shape {m.shape}")
        if np.max(np.abs(theta @ m - m @ theta)) > SYMMETRY_TOL:
            raise PreconditionError("state does not commute with the symmetry")
        eigvals, vectors = np.linalg.eigh(0.5 * (theta + theta.conj().T))
        groups: list[list[int]] = []
        for k, value in enumerate(eigvals):
            if groups and abs(value - eigvals[groups[-1][0]]) <= tol:
                groups[-1].append(k)
            else:
                groups.append([k])
        eigenvalues, degeneracies, weights, projectors, block_states = [], [], [], [], []
        for group in groups:
            v = vectors[:, group]
            projector = v @ v.conj().T
            weight = float(np.real(np.trace(projector @ m)))
            eigenvalues.append(float(eigvals[group[0]]))
            degeneracies.append(len(group))
            weights.append(weight)
            projectors.append(projector)
            block_states.append(projector @ m @ projector / weight if weight > SECTOR_WEIGHT_TOL else None)
        return cls(theta, eigenvalues, degeneracies, weights, projectors, block_states)

    @property
    def populated(self) -> list[int]:
        return [j for j, w in enumerate(self.weights) if w > SECTOR_WEIGHT_TOL]

    @property
    def is_single_sector(self) -> bool:
        return len(self.populated) == 1

    def isometry_image(self) -> np.ndarray:
        """Σ_j q_j ρ_j ⊗ |θ_j><θ_j| with the label register as the second factor."""
        k = len(self.eigenvalues)
        out = np.zeros((self.symmetry.shape[0] * k,) * 2, dtype=complex)
        for j in self.populated:
            label = np.zeros((k, k))
            label[j, j] = 1.0
            out += self.weights[j] * np.kron(self.block_states[j], label)
        return out


@dataclass
class LemmaReport:
    symmetric: float
    min_sampled: float
    margin: float
    nonnegative: bool
    n_samples: int
    single_sector: bool
    sampled: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "symmetric": self.symmetric,
            "min_sampled": self.min_sampled,
            "margin": self.margin,
            "nonnegative": self.nonnegative,
            "n_samples": self.n_samples,
            "single_sector": self.single_sector,
        }


def symmetry_operator(basis: FockBasis, symmetry: str) -> np.ndarray:
    if symmetry == "parity":
        return np.diag(parity_signs(basis)).astype(complex)
    if symmetry == "number":
        return np.diag(basis.popcounts.astype(float)).astype(complex)
    raise ValidationError(f"unknown symmetry {symmetry!r}; expected parity or number")


def lemma_inequality_check(
    rho,
    partition: ModePartition,
    n_samples: int = 1000,
    seed: int = 0,
    symmetry: str = "parity",
    allow_mixed_sectors: bool = False,
) -> LemmaReport:
    """Compare the symmetric-measurement disturbance with Haar-random local measurements."""
    m = as_matrix(rho)
    L = _mode_count(m)
    partition.check(L)
    if any(len(block) != 1 for block in partition.blocks):
        raise CapabilityError("the disturbance comparison measures single-mode blocks")
    decomposition = SymmetryBlockDecomposition.build(m, symmetry_operator(FockBasis(L), symmetry))
    if not decomposition.is_single_sector and not allow_mixed_sectors:
        raise PreconditionError(f"state populates {len(decomposition.populated)} {symmetry} sectors, expected one")

    symmetric = relative_entropy(m, occupation_dephase(m, partition.measured))
    rng = np.random.default_rng(seed)
    sampled = np.empty(n_samples)
    for k in range(n_samples):
        unitaries = [random_unitary(2, rng) for _ in partition.blocks]
        sampled[k] = relative_entropy(m, rotated_dephase(m, partition.blocks, unitaries))
    min_sampled = float(sampled.min()) if n_samples else math.inf
    return LemmaReport(
        symmetric=symmetric,
        min_sampled=min_sampled,
        margin=min_sampled - symmetric,
        nonnegative=bool(min_sampled >= symmetric - LEMMA_SLACK),
        n_samples=n_samples,
        single_sector=decomposition.is_single_sector,
        sampled=sampled,
    )
