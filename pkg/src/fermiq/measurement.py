"""Local projective measurements on mode subsets and the dephasing maps they induce."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from fermiq.errors import MeasurementError, ModeIndexError, ShapeError, ValidationError
from fermiq.fock import FockBasis, annihilation_op
from fermiq.quantinfo import EPS_EIG, as_matrix, partial_trace, spectrum

logger = logging.getLogger(__name__)

PROJECTOR_TOL = 1e-10
DEFAULT_GRID = (61, 61)


@dataclass(frozen=True)
class ModePartition:
    """Disjoint measured blocks of modes (1-based labels)."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(j) for j in block)) for block in self.blocks)
        flat = [j for block in blocks for j in block]
        if any(not block for block in blocks):
            raise ValidationError("partition blocks must be non-empty")
        if len(flat) != len(set(flat)):
            raise ValidationError(f"partition blocks overlap: {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def single_modes(cls, modes) -> "ModePartition":
        return cls(tuple((j,) for j in modes))

    @property
    def measured(self) -> tuple[int, ...]:
        return tuple(sorted(j for block in self.blocks for j in block))

    def check(self, L: int) -> None:
        for j in self.measured:
            if not 1 <= j <= L:
                raise ModeIndexError(f"partition mode {j} outside 1..{L}")


@dataclass(frozen=True)
class ProjectorAngles:
    phi: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.phi <= math.pi:
            raise ValidationError(f"phi={self.phi} outside [0, pi]")
        if not 0.0 <= self.theta < 2.0 * math.pi:
            raise ValidationError(f"theta={self.theta} outside [0, 2 pi)")

    def vectors(self) -> np.ndarray:
        """Columns |ψ₁>, |ψ₂> on the single-mode space {|0>, |1>}."""
        c, s = math.cos(self.phi), math.sin(self.phi)
        phase = np.exp(1j * self.theta)
        return np.array([[c, -s / phase], [phase * s, c]], dtype=complex)


def embed_local(op: np.ndarray, modes, L: int) -> np.ndarray:
    """Lift an operator on ``modes`` (in ascending order) to the full space with identity elsewhere."""
    idx = [j - 1 for j in modes]
    rest = [i for i in range(L) if i not in idx]
    full = np.kron(np.asarray(op, dtype=complex), np.eye(1 << len(rest)))
    inverse = list(np.argsort(idx + rest))
    axes = inverse + [L + i for i in inverse]
    return full.reshape([2] * (2 * L)).transpose(axes).reshape(1 << L, 1 << L)


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Complete orthogonal projectors acting on ``modes`` (full-space matrices)."""

    projectors: tuple[np.ndarray, ...]
    modes: tuple[int, ...]

    def __post_init__(self):
        projectors = tuple(np.asarray(p, dtype=complex) for p in self.projectors)
        if not projectors:
            raise MeasurementError("measurement has no projectors")
        dim = projectors[0].shape[0]
        if any(p.shape != (dim, dim) for p in projectors):
            raise ShapeError("projectors differ in shape")
        total = sum(projectors)
        if np.max(np.abs(total - np.eye(dim))) > PROJECTOR_TOL:
            raise MeasurementError("projectors do not sum to the identity")
        for m, pm in enumerate(projectors):
            for n, pn in enumerate(projectors):
                expected = pm if m == n else 0.0
                if np.max(np.abs(pm @ pn - expected)) > PROJECTOR_TOL:
                    raise MeasurementError(f"projectors {m} and {n} are not orthogonal projectors")
        object.__setattr__(self, "projectors", projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @classmethod
    def trivial(cls, basis: FockBasis) -> "ProjectiveMeasurement":
        return cls((np.eye(basis.dim),), ())

    @classmethod
    def from_local(cls, local_projectors, modes, basis: FockBasis) -> "ProjectiveMeasurement":
        modes = tuple(sorted(basis.check_mode(j) for j in modes))
        return cls(tuple(embed_local(p, modes, basis.L) for p in local_projectors), modes)


def basis_measurement(basis: FockBasis, modes, unitary: np.ndarray) -> ProjectiveMeasurement:
    """Rank-1 measurement on ``modes`` along the columns of ``unitary``."""
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (1 << len(modes),) * 2:
        raise ShapeError(f"block unitary shape {unitary.shape} does not fit {len(modes)} modes")
    local = [np.outer(unitary[:, k], unitary[:, k].conj()) for k in range(unitary.shape[1])]
    return ProjectiveMeasurement.from_local(local, modes, basis)


def mode_projectors(basis: FockBasis, j: int) -> ProjectiveMeasurement:
    """{a_j a†_j, a†_j a_j}: empty and occupied mode j."""
    a = annihilation_op(basis, j).matrix
    return ProjectiveMeasurement((a @ a.conj().T, a.conj().T @ a), (j,))


def angle_projectors(basis: FockBasis, j: int, angles: ProjectorAngles) -> ProjectiveMeasurement:
    """{|ψ₁><ψ₁|, |ψ₂><ψ₂|} ⊗ I on the rest, with |ψ₁> = cos φ|0> + e^{iθ} sin φ|1>."""
    return basis_measurement(basis, (j,), angles.vectors())


def dephase(rho, measurement: ProjectiveMeasurement) -> np.ndarray:
    """Σ_m Π_m ρ Π_m."""
    m = as_matrix(rho)
    if m.shape[0] != measurement.dim:
        raise ShapeError(f"state dimension {m.shape[0]} does not match measurement dimension {measurement.dim}")
    return sum(p @ m @ p for p in measurement.projectors)


def is_fixed_point(rho, measurement: ProjectiveMeasurement, tol: float = 1e-10) -> bool:
    m = as_matrix(rho)
    return bool(np.max(np.abs(dephase(m, measurement) - m)) <= tol)


def _same_bits_mask(L: int, modes) -> np.ndarray:
    idx = np.array([j - 1 for j in modes], dtype=int)
    table = (np.arange(1 << L)[:, None] >> (L - 1 - idx)) & 1
    return np.all(table[:, None, :] == table[None, :, :], axis=2)


def occupation_dephase(rho, modes) -> np.ndarray:
    """Occupation-basis dephasing of the listed modes only."""
    m = as_matrix(rho)
    L = m.shape[0].bit_length() - 1
    return np.where(_same_bits_mask(L, list(modes)), m, 0.0)


def all_modes_occupation_dephase(rho) -> np.ndarray:
    """Π₁ ⊗ ... ⊗ Π_L applied to ρ: its diagonal in the occupation basis."""
    return np.diag(np.diag(as_matrix(rho)))


def occupation_probabilities(rho) -> np.ndarray:
    """p(l) for every occupation string, clipped at round-off."""
    return np.clip(np.real(np.diag(as_matrix(rho))), 0.0, None)


def block_unitary(blocks, unitaries, L: int) -> np.ndarray:
    """Product of block unitaries embedded on their modes."""
    full = np.eye(1 << L, dtype=complex)
    for block, unitary in zip(blocks, unitaries, strict=True):
        full = full @ embed_local(unitary, block, L)
    return full


def rotated_dephase(rho, blocks, unitaries) -> np.ndarray:
    """Rank-1 block measurement along the columns of each block unitary: W Π(W† ρ W) W†."""
    m = as_matrix(rho)
    L = m.shape[0].bit_length() - 1
    w = block_unitary(blocks, unitaries, L)
    measured = sorted(j for block in blocks for j in block)
    return w @ occupation_dephase(w.conj().T @ m @ w, measured) @ w.conj().T


def outcome_statistics(rho, measurement: ProjectiveMeasurement) -> list[tuple[float, np.ndarray | None]]:
    """Outcome probabilities with the conditional state of the unmeasured modes."""
    m = as_matrix(rho)
    L = m.shape[0].bit_length() - 1
    rest = [j for j in range(1, L + 1) if j not in measurement.modes]
    stats = []
    for p in measurement.projectors:
        branch = p @ m @ p
        weight = float(np.real(np.trace(branch)))
        if weight <= EPS_EIG:
            stats.append((weight, None))
            continue
        stats.append((weight, partial_trace(branch / weight, rest)))
    return stats


def angle_grid(n_phi: int, n_theta: int) -> tuple[np.ndarray, np.ndarray]:
    """φ uniform on [0, π] inclusive, θ uniform on [0, 2π)."""
    if n_phi < 1 or n_theta < 1:
        raise ValidationError("grid dimensions must be positive")
    return np.linspace(0.0, math.pi, n_phi), np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)


def angle_vectors(phis: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Array (n_φ, n_θ, 2, 2) of the measurement vectors, vector index first."""
    c = np.cos(phis)[:, None]
    s = np.sin(phis)[:, None]
    phase = np.exp(1j * thetas)[None, :]
    vectors = np.empty((len(phis), len(thetas), 2, 2), dtype=complex)
    vectors[..., 0, 0] = c
    vectors[..., 0, 1] = phase * s
    vectors[..., 1, 0] = -s / phase
    vectors[..., 1, 1] = c
    return vectors


def disturbance_landscape(rho, j: int, phis: np.ndarray, thetas: np.ndarray, base: float = 2.0) -> np.ndarray:
    """S(ρ‖Π^{(φ,θ)}(ρ)) on mode j for every grid point, shape (n_φ, n_θ)."""
    m = as_matrix(rho)
    L = m.shape[0].bit_length() - 1
    if not 1 <= j <= L:
        raise ModeIndexError(f"mode {j} outside 1..{L}")
    left, right = 1 << (j - 1), 1 << (L - j)
    r = m.reshape(left, 2, right, left, 2, right)
    vectors = angle_vectors(np.asarray(phis), np.asarray(thetas))
    blocks = np.einsum("pqab,xbyXcY,pqac->pqaxyXY", vectors.conj(), r, vectors, optimize=True)
    blocks = blocks.reshape(len(phis), len(thetas), 2, left * right, left * right)
    eigvals = np.clip(np.linalg.eigvalsh(blocks), 0.0, None)
    dephased_entropy = np.where(eigvals > EPS_EIG, entr(eigvals), 0.0).sum(axis=(2, 3))
    own = spectrum(m)
    base_entropy = float(entr(own[own > EPS_EIG]).sum())
    return np.clip(dephased_entropy - base_entropy, 0.0, None) / math.log(base)
