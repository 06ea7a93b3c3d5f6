"""Fock space of L fermionic modes in the occupation-number representation.

Ordering convention: the occupation vector (j_1, ..., j_L) has basis index
sum_k j_k * 2**(L - k), so mode 1 is the most significant bit. The Jordan-Wigner
string of a_j counts the occupied modes with a smaller index, which makes
a†_{i_1} ... a†_{i_N} |vac> = +|bits> whenever i_1 < ... < i_N.

Everything here is dense; ``MAX_MODES`` guards the 2**L allocations.
"""

import logging
from dataclasses import dataclass
from functools import cache, cached_property, reduce
from math import comb

import numpy as np
from scipy.linalg import expm, schur

from fermiq.errors import ModeIndexError, ShapeError, SizeError, ValidationError

logger = logging.getLogger(__name__)

MAX_MODES = 14
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]])
_PARITY_STRING = np.diag([1.0, -1.0])
_IDENTITY_2 = np.eye(2)


@dataclass(frozen=True)
class OccupationVector:
    """Occupations (j_1, ..., j_L) labelling one Fock basis element."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits or any(b not in (0, 1) for b in bits):
            raise ValidationError(f"occupations must be a non-empty sequence of 0/1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @property
    def L(self) -> int:
        return len(self.bits)

    @property
    def particle_number(self) -> int:
        return sum(self.bits)

    @property
    def index(self) -> int:
        return int("".join(str(b) for b in self.bits), 2)

    @classmethod
    def from_index(cls, L: int, index: int) -> "OccupationVector":
        if not 0 <= index < (1 << L):
            raise ValidationError(f"index {index} outside 0..{(1 << L) - 1}")
        return cls(tuple((index >> (L - 1 - k)) & 1 for k in range(L)))


@dataclass(frozen=True)
class FockBasis:
    """The 2**L occupation basis, big-endian in the mode label."""

    L: int

    @property
    def dim(self) -> int:
        return 1 << self.L

    @property
    def modes(self) -> range:
        return range(1, self.L + 1)

    def index(self, bits) -> int:
        occupation = OccupationVector(tuple(bits))
        if occupation.L != self.L:
            raise ShapeError(f"expected {self.L} occupations, got {occupation.L}")
        return occupation.index

    def occupations(self, index: int) -> OccupationVector:
        return OccupationVector.from_index(self.L, index)

    def check_mode(self, j: int) -> int:
        if not 1 <= j <= self.L:
            raise ModeIndexError(f"mode {j} outside 1..{self.L}")
        return j

    @cached_property
    def occupation_table(self) -> np.ndarray:
        """Row s holds the occupations of basis element s."""
        shifts = self.L - 1 - np.arange(self.L)
        return (np.arange(self.dim)[:, None] >> shifts) & 1

    @cached_property
    def popcounts(self) -> np.ndarray:
        return self.occupation_table.sum(axis=1)


def build_basis(L: int) -> FockBasis:
    """Fock basis of ``L`` modes (dimension 2**L)."""
    if isinstance(L, bool) or not isinstance(L, (int, np.integer)) or not 1 <= L <= MAX_MODES:
        raise SizeError(f"mode count must be an integer in 1..{MAX_MODES}, got {L!r}")
    return FockBasis(int(L))


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on a Fock space."""

    matrix: np.ndarray
    basis: FockBasis
    hermitian: bool = False

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (self.basis.dim, self.basis.dim):
            raise ShapeError(f"operator shape {matrix.shape} does not match Fock dimension {self.basis.dim}")
        if self.hermitian and np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValidationError("operator tagged hermitian is not Hermitian")
        object.__setattr__(self, "matrix", matrix)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.basis, self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.matrix @ other.matrix, self.basis)
        return self.matrix @ np.asarray(other)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + other.matrix, self.basis, self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - other.matrix, self.basis, self.hermitian and other.hermitian)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(scalar * self.matrix, self.basis, self.hermitian and np.isrealobj(scalar))

    __rmul__ = __mul__


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def anticommutator(a: Operator, b: Operator) -> Operator:
    return a @ b + b @ a


@dataclass(frozen=True, eq=False)
class SingleParticleUnitary:
    """L x L unitary of the mode change Γ(U) a†_j Γ(U)† = sum_k U_kj a†_k."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValidationError(f"single-particle unitary must be square, got shape {u.shape}")
        deviation = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        if deviation > UNITARY_TOL:
            raise ValidationError(f"matrix is not unitary (max |U†U - I| = {deviation:.3e})")
        object.__setattr__(self, "u", u)

    @property
    def L(self) -> int:
        return self.u.shape[0]

    def generator(self) -> np.ndarray:
        """Principal-branch logarithm h with exp(h) = U; h is anti-Hermitian."""
        triangular, vectors = schur(self.u, output="complex")
        phases = np.angle(np.diag(triangular))
        return (vectors * (1j * phases)) @ vectors.conj().T


@cache
def _annihilators(L: int) -> tuple[np.ndarray, ...]:
    ops = []
    for j in range(L):
        factors = [_PARITY_STRING] * j + [_SIGMA_MINUS] + [_IDENTITY_2] * (L - j - 1)
        op = reduce(np.kron, factors)
        op.setflags(write=False)
        ops.append(op)
    return tuple(ops)


@cache
def _hopping(L: int) -> np.ndarray:
    a = _annihilators(L)
    stack = np.array([[a[j].T @ a[k] for k in range(L)] for j in range(L)])
    stack.setflags(write=False)
    return stack


def annihilators(basis: FockBasis) -> tuple[np.ndarray, ...]:
    """Raw real matrices of a_1..a_L (read-only, cached per L)."""
    return _annihilators(basis.L)


def annihilation_op(basis: FockBasis, j: int) -> Operator:
    """a_j with the Jordan-Wigner sign of the modes left of j."""
    basis.check_mode(j)
    return Operator(_annihilators(basis.L)[j - 1], basis)


def creation_op(basis: FockBasis, j: int) -> Operator:
    return annihilation_op(basis, j).dag()


def hopping_ops(basis: FockBasis) -> np.ndarray:
    """Stack E[j, k] = a†_{j+1} a_{k+1}, shape (L, L, dim, dim)."""
    return _hopping(basis.L)


def number_op(basis: FockBasis) -> Operator:
    return Operator(np.diag(basis.popcounts.astype(float)), basis, hermitian=True)


def parity_op(basis: FockBasis) -> Operator:
    return Operator(np.diag((-1.0) ** basis.popcounts), basis, hermitian=True)


def parity_signs(basis: FockBasis) -> np.ndarray:
    """Diagonal of (-1)^N as a vector."""
    return np.where(basis.popcounts % 2 == 0, 1.0, -1.0)


@cache
def sector_indices(L: int, N: int) -> np.ndarray:
    popcounts = np.array([bin(s).count("1") for s in range(1 << L)])
    return np.flatnonzero(popcounts == N)


@cache
def _sector_hopping(L: int, N: int) -> np.ndarray:
    idx = sector_indices(L, N)
    stack = np.ascontiguousarray(_hopping(L)[:, :, idx][:, :, :, idx])
    stack.setflags(write=False)
    return stack


def sector_lift(L: int, N: int, h: np.ndarray) -> np.ndarray:
    """Block of the lift on the N-particle sector, in ascending sector order."""
    generator = np.tensordot(np.asarray(h, dtype=complex), _sector_hopping(L, N), axes=([0, 1], [0, 1]))
    return expm(generator)


@cache
def _sector_modes(L: int, N: int) -> np.ndarray:
    """0-based occupied modes of each sector element, shape (C(L, N), N)."""
    idx = sector_indices(L, N)
    table = (idx[:, None] >> (L - 1 - np.arange(L))) & 1
    return np.array([np.flatnonzero(row) for row in table], dtype=int).reshape(len(idx), N)


def sector_unitary(u: np.ndarray, N: int) -> np.ndarray:
    """Γ(U) on the N-particle sector from minors: <K|Γ|I> = det U[K, I]."""
    u = np.asarray(u, dtype=complex)
    if N == 0:
        return np.ones((1, 1), dtype=complex)
    modes = _sector_modes(u.shape[0], N)
    minors = u[modes[:, None, :, None], modes[None, :, None, :]]
    return np.linalg.det(minors)


def compound_lift(u: np.ndarray) -> np.ndarray:
    """Γ(U) on the full Fock space assembled from sector minors; no matrix logarithm involved."""
    u = np.asarray(u, dtype=complex)
    L = u.shape[0]
    full = np.zeros((1 << L, 1 << L), dtype=complex)
    for N in range(L + 1):
        idx = sector_indices(L, N)
        full[np.ix_(idx, idx)] = sector_unitary(u, N)
    return full


def lift_matrix(L: int, h: np.ndarray) -> np.ndarray:
    """exp(sum_jk h_jk a†_j a_k) as a raw matrix; h must be anti-Hermitian.

    The generator conserves N, so the exponential is assembled sector by sector.
    """
    full = np.zeros((1 << L, 1 << L), dtype=complex)
    for N in range(L + 1):
        idx = sector_indices(L, N)
        full[np.ix_(idx, idx)] = sector_lift(L, N, h)
    return full


def lift_generator(basis: FockBasis, h: np.ndarray) -> Operator:
    """Many-body unitary generated by the one-body anti-Hermitian matrix ``h``."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (basis.L, basis.L):
        raise ShapeError(f"generator must be {basis.L}x{basis.L}, got {h.shape}")
    return Operator(lift_matrix(basis.L, h), basis)


def bogoliubov_lift(basis: FockBasis, u: SingleParticleUnitary | np.ndarray) -> Operator:
    """Γ(U) with Γ a†_j Γ† = sum_k U_kj a†_k and Γ|vac> = |vac>."""
    if not isinstance(u, SingleParticleUnitary):
        u = SingleParticleUnitary(u)
    if u.L != basis.L:
        raise ShapeError(f"single-particle unitary is {u.L}x{u.L} but the basis has {basis.L} modes")
    return lift_generator(basis, u.generator())


def vacuum(basis: FockBasis) -> np.ndarray:
    state = np.zeros(basis.dim, dtype=complex)
    state[0] = 1.0
    return state


def slater_state(basis: FockBasis, occupations) -> np.ndarray:
    """Amplitudes of (a†_1)^{j_1} ... (a†_L)^{j_L} |vac>."""
    state = np.zeros(basis.dim, dtype=complex)
    state[basis.index(occupations)] = 1.0
    return state


@dataclass(frozen=True, eq=False)
class NumberSector:
    """Fixed-N subspace, listed by ascending full-space index."""

    L: int
    N: int
    basis_indices: tuple[int, ...]

    def __post_init__(self):
        indices = tuple(int(i) for i in self.basis_indices)
        if list(indices) != sorted(indices):
            raise ValidationError("sector indices must be sorted ascending")
        if any(bin(i).count("1") != self.N for i in indices):
            raise ValidationError(f"sector index with particle number other than {self.N}")
        object.__setattr__(self, "basis_indices", indices)

    @property
    def dim(self) -> int:
        return len(self.basis_indices)

    @cached_property
    def _index_array(self) -> np.ndarray:
        return np.array(self.basis_indices, dtype=int)

    @cached_property
    def isometry(self) -> np.ndarray:
        """Full-dim x sector-dim embedding matrix."""
        iso = np.zeros((1 << self.L, self.dim))
        iso[self._index_array, np.arange(self.dim)] = 1.0
        return iso

    def embed(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise ShapeError(f"sector vector must have length {self.dim}, got {v.shape}")
        full = np.zeros(1 << self.L, dtype=complex)
        full[self._index_array] = v
        return full

    def restrict(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (1 << self.L,):
            raise ShapeError(f"full-space vector must have length {1 << self.L}, got {v.shape}")
        return v[self._index_array].astype(complex)

    def embed_matrix(self, m: np.ndarray) -> np.ndarray:
        full = np.zeros((1 << self.L, 1 << self.L), dtype=complex)
        full[np.ix_(self._index_array, self._index_array)] = m
        return full

    def restrict_matrix(self, m: np.ndarray) -> np.ndarray:
        return np.asarray(m, dtype=complex)[np.ix_(self._index_array, self._index_array)]

    def weight_outside(self, rho: np.ndarray) -> float:
        """Probability a full-space state assigns outside this sector."""
        diag = np.real(np.diag(rho))
        return float(max(0.0, diag.sum() - diag[self._index_array].sum()))


def sector(basis: FockBasis, N: int) -> NumberSector:
    """The C(L, N)-dimensional sector with exactly N particles."""
    if not 0 <= N <= basis.L:
        raise ValidationError(f"particle number {N} outside 0..{basis.L}")
    indices = tuple(int(i) for i in np.flatnonzero(basis.popcounts == N))
    sec = NumberSector(basis.L, N, indices)
    assert sec.dim == comb(basis.L, N)
    return sec
