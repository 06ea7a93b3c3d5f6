"""Entropic primitives over density matrices.

Entropies are computed with natural logarithms and converted to the requested
``base`` on return (2 gives bits, e gives nats).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr
from scipy.stats import entropy, unitary_group

from fermiq.errors import ShapeError, ValidationError
from fermiq.fock import FockBasis

logger = logging.getLogger(__name__)

EPS_EIG = 1e-12
NEG_EIG_TOL = 1e-10
STATE_TOL = 1e-10
SUPPORT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix, optionally tied to a Fock basis."""

    matrix: np.ndarray
    basis: FockBasis | None = None

    def __post_init__(self):
        matrix = validate_state(self.matrix)
        if self.basis is not None and matrix.shape[0] != self.basis.dim:
            raise ShapeError(f"state dimension {matrix.shape[0]} does not match Fock dimension {self.basis.dim}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, amplitudes: np.ndarray, basis: FockBasis | None = None) -> "DensityMatrix":
        return cls(pure_to_density(amplitudes), basis)


def as_matrix(rho) -> np.ndarray:
    """Raw complex matrix of a ``DensityMatrix`` or array-like."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def validate_state(m, tol: float = STATE_TOL) -> np.ndarray:
    """Check Hermiticity, positivity and unit trace; return the complex matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"density matrix must be square, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise ValidationError("density matrix is not Hermitian")
    trace = np.trace(m).real
    if abs(trace - 1.0) > tol:
        raise ValidationError(f"density matrix trace is {trace:.12g}, expected 1")
    lowest = np.linalg.eigvalsh(m)[0]
    if lowest < -tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lowest:.3e}")
    return m


def normalized_pure(amplitudes, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.ndim != 1:
        raise ShapeError(f"pure state must be a vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"pure state norm is {norm:.12g}, expected 1")
    return psi


def pure_to_density(amplitudes) -> np.ndarray:
    psi = normalized_pure(amplitudes)
    return np.outer(psi, psi.conj())


def spectrum(rho) -> np.ndarray:
    """Eigenvalues of a state with round-off negatives clipped to zero."""
    m = as_matrix(rho)
    eigvals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if eigvals[0] < -NEG_EIG_TOL:
        raise ValidationError(f"state has negative eigenvalue {eigvals[0]:.3e}")
    return np.clip(eigvals, 0.0, None)


def _entropy_nats(eigvals: np.ndarray) -> float:
    return float(entr(eigvals[eigvals > EPS_EIG]).sum())


def von_neumann_entropy(rho, base: float = 2.0) -> float:
    """-Tr(ρ log ρ) in units of ``base``."""
    return _entropy_nats(spectrum(rho)) / math.log(base)


def relative_entropy(rho, sigma, base: float = 2.0) -> float:
    """S(ρ‖σ); ``inf`` when ρ has weight on the kernel of σ."""
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError(f"relative entropy of shapes {rho.shape} and {sigma.shape}")
    weights, vectors = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    if weights[0] < -NEG_EIG_TOL:
        raise ValidationError(f"reference state has negative eigenvalue {weights[0]:.3e}")
    overlaps = np.real(np.einsum("ia,ij,ja->a", vectors.conj(), rho, vectors))
    support = weights > EPS_EIG
    if overlaps[~support].sum() > SUPPORT_TOL:
        return math.inf
    cross = float(np.dot(overlaps[support], np.log(weights[support])))
    value = -_entropy_nats(spectrum(rho)) - cross
    return max(value, 0.0) / math.log(base)


def shannon_entropy(p, base: float = 2.0) -> float:
    """H(p) with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -NEG_EIG_TOL) or abs(p.sum() - 1.0) > STATE_TOL:
        raise ValidationError("not a probability vector")
    return float(entropy(np.clip(p, 0.0, None), base=base))


def binary_entropy(x, base: float = 2.0):
    """h(x) = -x log x - (1 - x) log(1 - x); vectorized over arrays."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -NEG_EIG_TOL) or np.any(x > 1.0 + NEG_EIG_TOL):
        raise ValidationError("binary entropy argument outside [0, 1]")
    x = np.clip(x, 0.0, 1.0)
    value = (entr(x) + entr(1.0 - x)) / math.log(base)
    return float(value) if value.ndim == 0 else value


def purity(rho) -> float:
    m = as_matrix(rho)
    return float(np.real(np.vdot(m, m)))


def fidelity_pure(rho, psi) -> float:
    """<ψ|ρ|ψ> for a pure reference state."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(psi.conj() @ as_matrix(rho) @ psi))


def clip_to_state(m, tol: float = 1e-6) -> np.ndarray:
    """Nearest state obtained by clipping eigenvalues above ``-tol`` to zero."""
    m = as_matrix(m)
    m = 0.5 * (m + m.conj().T)
    eigvals, vectors = np.linalg.eigh(m)
    if eigvals[0] < -tol:
        raise ValidationError(f"matrix eigenvalue {eigvals[0]:.3e} is below the clipping tolerance")
    eigvals = np.clip(eigvals, 0.0, None)
    eigvals /= eigvals.sum()
    return (vectors * eigvals) @ vectors.conj().T


def _mode_count(dim: int) -> int:
    L = dim.bit_length() - 1
    if dim != 1 << L:
        raise ShapeError(f"dimension {dim} is not a power of two")
    return L


def partial_trace_dims(rho, dims: list[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (0-based positions)."""
    m = as_matrix(rho)
    n = len(dims)
    if m.shape != (math.prod(dims),) * 2:
        raise ShapeError(f"state of shape {m.shape} does not factor as {dims}")
    kept = sorted(set(keep))
    traced = [i for i in range(n) if i not in kept]
    perm = kept + traced + [n + i for i in kept] + [n + i for i in traced]
    d_keep = math.prod(dims[i] for i in kept)
    d_trace = math.prod(dims[i] for i in traced)
    t = m.reshape(dims + dims).transpose(perm).reshape(d_keep, d_trace, d_keep, d_trace)
    return np.einsum("ajbj->ab", t)


def partial_transpose_dims(rho, dims: list[int], transpose) -> np.ndarray:
    """Transpose the subsystems in ``transpose`` (0-based positions)."""
    m = as_matrix(rho)
    n = len(dims)
    axes = list(range(2 * n))
    for i in transpose:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return m.reshape(dims + dims).transpose(axes).reshape(m.shape)


def partial_trace(rho, keep) -> np.ndarray:
    """Reduced state on the modes in ``keep`` (1-based), in ascending mode order."""
    m = as_matrix(rho)
    L = _mode_count(m.shape[0])
    keep = set(keep)
    if not keep <= set(range(1, L + 1)):
        raise ValidationError(f"modes {sorted(keep)} not all within 1..{L}")
    return partial_trace_dims(m, [2] * L, [j - 1 for j in keep])


def partial_transpose(rho, modes) -> np.ndarray:
    m = as_matrix(rho)
    L = _mode_count(m.shape[0])
    return partial_transpose_dims(m, [2] * L, [j - 1 for j in modes])


def negativity_of(matrix_pt: np.ndarray) -> float:
    """(‖X‖₁ - 1) / 2 for a Hermitian partially transposed state X."""
    eigvals = np.linalg.eigvalsh(0.5 * (matrix_pt + matrix_pt.conj().T))
    return float(max(0.0, -eigvals[eigvals < 0].sum()))


def schmidt_state(p1: float, rotation_a: np.ndarray | None = None, rotation_b: np.ndarray | None = None) -> np.ndarray:
    """√p₁|a₁b₁> + √(1-p₁)|a₂b₂> over two modes; columns of the rotations give the local bases."""
    if not 0.0 <= p1 <= 1.0:
        raise ValidationError(f"Schmidt weight {p1} outside [0, 1]")
    a = np.eye(2) if rotation_a is None else np.asarray(rotation_a, dtype=complex)
    b = np.eye(2) if rotation_b is None else np.asarray(rotation_b, dtype=complex)
    return math.sqrt(p1) * np.kron(a[:, 0], b[:, 0]) + math.sqrt(1.0 - p1) * np.kron(a[:, 1], b[:, 1])


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random n x n unitary."""
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)


def ginibre_state(d: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Induced-measure state: partial trace of a Haar pure state on C^d ⊗ C^rank."""
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
