"""Entanglement quantifiers used as comparators along the dissipative trajectory.

The concurrence is the two-fermions-in-four-modes construction through the dual
state ρ̃ = D ρ* D. Shifted negativity is taken as the mode negativity across the
balanced cut, minimized over single-particle bases. The particle negativity works
in first quantization: a two-particle state is written on the antisymmetric
subspace of C^L ⊗ C^L, one particle is transposed, and the negativity 1/2 that
every Slater determinant carries there is subtracted.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from fermiq.errors import PreconditionError, ShapeError, ValidationError
from fermiq.fock import FockBasis, compound_lift, hopping_ops, sector_indices
from fermiq.optimize import OptimizerConfig, minimize_until_agreement
from fermiq.quantinfo import (
    as_matrix,
    binary_entropy,
    negativity_of,
    partial_transpose,
    partial_transpose_dims,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

SECTOR_TOL = 1e-10

# Negativity of any two-fermion Slater determinant in first quantization.
SLATER_NEGATIVITY = 0.5

# Full-space indices of the pairs (12, 13, 14, 23, 24, 34) at L = 4.
PAIR_INDICES = (12, 10, 9, 6, 5, 3)

# Antisymmetric-tensor duality on the pair basis above.
DUALITY = np.array(
    [
        [0, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, -1, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, -1, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0],
    ],
    dtype=complex,
)


@dataclass
class EntanglementValue:
    value: float
    quantifier: str
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "quantifier": self.quantifier, **self.metadata}


def _mode_count(rho: np.ndarray) -> int:
    L = rho.shape[0].bit_length() - 1
    if rho.shape[0] != 1 << L:
        raise ShapeError(f"dimension {rho.shape[0]} is not a Fock dimension")
    return L


def pair_block(rho) -> np.ndarray:
    """The 6x6 two-particle block of an L=4 state, in lexicographic pair order."""
    m = as_matrix(rho)
    if m.shape == (6, 6):
        # ascending sector order lists the pairs in reverse lexicographic order
        return m[::-1, ::-1]
    if m.shape != (16, 16):
        raise ShapeError(f"concurrence needs an L=4 state or its two-particle block, got shape {m.shape}")
    idx = list(PAIR_INDICES)
    outside = float(np.real(np.trace(m))) - float(np.real(np.trace(m[np.ix_(idx, idx)])))
    if outside > SECTOR_TOL:
        raise PreconditionError(f"state has weight {outside:.3e} outside the two-particle sector")
    return m[np.ix_(idx, idx)]


def fermionic_concurrence(rho) -> EntanglementValue:
    """max(0, λ₁ - λ₂ - ... - λ₆) over the decreasing square-rooted spectrum of √ρ ρ̃ √ρ."""
    block = pair_block(rho)
    eigvals, vectors = np.linalg.eigh(0.5 * (block + block.conj().T))
    root = (vectors * np.sqrt(np.clip(eigvals, 0.0, None))) @ vectors.conj().T
    dual = DUALITY @ block.conj() @ DUALITY
    product = root @ dual @ root
    lambdas = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (product + product.conj().T)), 0.0, None))[::-1]
    value = max(0.0, float(lambdas[0] - lambdas[1:].sum()))
    return EntanglementValue(value, "concurrence", {"pair_order": "12,13,14,23,24,34"})


def pure_concurrence(psi) -> float:
    """|<ψ̃|ψ>| for a pure two-particle state given on L=4 or on its pair block."""
    psi = np.asarray(psi, dtype=complex)
    coeffs = psi[list(PAIR_INDICES)] if psi.shape == (16,) else psi[::-1]
    return float(abs(coeffs @ DUALITY @ coeffs))


def mode_negativity(rho, modes_a) -> EntanglementValue:
    """(‖ρ^{T_A}‖₁ - 1) / 2 across the modes in ``modes_a`` and the rest."""
    m = as_matrix(rho)
    L = _mode_count(m)
    modes_a = tuple(sorted(set(modes_a)))
    if not modes_a or any(not 1 <= j <= L for j in modes_a):
        raise ValidationError(f"invalid bipartition side {modes_a} for {L} modes")
    value = negativity_of(partial_transpose(m, modes_a))
    return EntanglementValue(value, "negativity", {"modes_a": list(modes_a)})


def balanced_cut(L: int) -> tuple[int, ...]:
    return tuple(range(1, L // 2 + 1))


def _antisymmetric_embedding(L: int) -> np.ndarray:
    """Columns (|ij> - |ji>)/√2 in C^L ⊗ C^L for each two-particle sector state, i < j."""
    idx = sector_indices(L, 2)
    w = np.zeros((L * L, len(idx)), dtype=complex)
    for col, state in enumerate(idx):
        i, j = np.flatnonzero((int(state) >> (L - 1 - np.arange(L))) & 1)
        w[i * L + j, col] = 1.0 / math.sqrt(2.0)
        w[j * L + i, col] = -1.0 / math.sqrt(2.0)
    return w


def particle_negativity(rho) -> EntanglementValue:
    """Negativity between the two particles of a two-fermion state, less its Slater value.

    Slater determinants give zero; a pure state of four modes gives its concurrence.
    """
    m = as_matrix(rho)
    L = _mode_count(m)
    if L < 2:
        raise ValidationError("two fermions need at least two modes")
    idx = sector_indices(L, 2)
    outside = float(np.real(np.trace(m))) - float(np.real(np.trace(m[np.ix_(idx, idx)])))
    if outside > SECTOR_TOL:
        raise PreconditionError(f"state has weight {outside:.3e} outside the two-particle sector")
    w = _antisymmetric_embedding(L)
    first_quantized = w @ m[np.ix_(idx, idx)] @ w.conj().T
    value = negativity_of(partial_transpose_dims(first_quantized, [L, L], [1]))
    return EntanglementValue(max(value - SLATER_NEGATIVITY, 0.0), "particle_negativity", {"shift": SLATER_NEGATIVITY})


def shifted_negativity(rho, cfg: OptimizerConfig | None = None, starts=()) -> EntanglementValue:
    """Mode negativity across the balanced cut, minimized over Bogoliubov rotations."""
    m = as_matrix(rho)
    L = _mode_count(m)
    modes_a = balanced_cut(L)
    if L < 2:
        raise ValidationError("a bipartition needs at least two modes")

    def objective(unitaries):
        gamma = compound_lift(unitaries[0])
        return negativity_of(partial_transpose(gamma @ m @ gamma.conj().T, modes_a))

    informed = [[u] for u in starts] + [[natural_orbitals(m)], [np.eye(L, dtype=complex)]]
    result = minimize_until_agreement(objective, (L,), cfg, starts=informed)
    return EntanglementValue(
        max(result.value, 0.0),
        "shifted_negativity",
        {
            "modes_a": list(modes_a),
            "optimal_basis": result.unitaries[0],
            "converged": result.converged,
            "gap": result.gap,
        },
    )


def one_body_density(rho) -> np.ndarray:
    """G_ij = Tr(ρ a†_i a_j)."""
    m = as_matrix(rho)
    L = _mode_count(m)
    return np.einsum("ijab,ba->ij", hopping_ops(FockBasis(L)), m)


def natural_orbitals(rho) -> np.ndarray:
    """Single-particle unitary U with Ū G U^T diagonal."""
    g = one_body_density(rho)
    _, vectors = np.linalg.eigh(0.5 * (g + g.conj().T))
    return vectors.T.astype(complex)


def _pure_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        return np.outer(psi, psi.conj())
    return psi


def one_body_entanglement(psi, base: float = 2.0) -> float:
    """Σ_k h(λ_k) over the occupations λ_k of the natural orbitals."""
    g = one_body_density(_pure_density(psi))
    occupations = np.clip(np.linalg.eigvalsh(0.5 * (g + g.conj().T)), 0.0, 1.0)
    return float(np.sum(binary_entropy(occupations, base=base)))


def particle_entanglement_entropy(psi, n_particles: int | None = None, base: float = 2.0) -> float:
    """S(G/N) - log N, the entanglement entropy of indistinguishable particles."""
    g = one_body_density(_pure_density(psi))
    n = float(np.real(np.trace(g))) if n_particles is None else float(n_particles)
    if n < 1.0 - 1e-9:
        raise ValidationError("particle entanglement entropy needs at least one particle")
    return max(0.0, von_neumann_entropy(g / n, base=base) - math.log(n) / math.log(base))
