"""Executable property suites behind ``fermiq check``.

Each suite draws seeded random states, evaluates a handful of cross-module
properties and reports pass/fail per property with the worst deviation seen.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from fermiq.entanglement import one_body_entanglement
from fermiq.errors import ValidationError
from fermiq.fock import FockBasis, annihilators, compound_lift, number_op, sector_indices
from fermiq.measurement import (
    ModePartition,
    ProjectiveMeasurement,
    all_modes_occupation_dephase,
    is_fixed_point,
    occupation_probabilities,
)
from fermiq.optimize import OptimizerConfig
from fermiq.quantifiers import (
    SymmetryBlockDecomposition,
    classical_state,
    lemma_inequality_check,
    mreq,
    one_way_deficit,
    q_particles,
    q_sp,
    single_mode_deficit_symmetric,
    symmetry_operator,
)
from fermiq.quantinfo import (
    ginibre_state,
    partial_trace,
    random_pure_state,
    random_unitary,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

ANTICOMMUTATION_TOL = 1e-12
COVARIANCE_TOL = 1e-10
IDENTITY_TOL = 1e-8
HIERARCHY_SLACK = 1e-6
MATCH_TOL = 1e-5
FOCK_MAX_MODES = 6
HAAR_DRAWS = 1000


@dataclass
class PropertyResult:
    name: str
    passed: bool
    checked: int
    worst: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "checked": self.checked,
            "worst": self.worst,
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    suite: str
    samples: int
    seed: int
    properties: list[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "samples": self.samples,
            "seed": self.seed,
            "status": "pass" if self.passed else "fail",
            "properties": [p.to_dict() for p in self.properties],
        }


class _Tally:
    """Collects one deviation per sample; the property holds when every one is within ``tol``."""

    def __init__(self, name: str, tol: float):
        self.name = name
        self.tol = tol
        self.deviations: list[float] = []

    def add(self, deviation: float) -> None:
        self.deviations.append(float(deviation))

    def result(self, detail: str = "") -> PropertyResult:
        worst = max(self.deviations) if self.deviations else None
        passed = worst is None or worst <= self.tol
        return PropertyResult(self.name, passed, len(self.deviations), worst, detail)


def _parity_block(L: int, parity: int) -> np.ndarray:
    indices = np.arange(1 << L)
    popcounts = np.array([bin(i).count("1") for i in indices])
    return indices[(popcounts % 2 == 0) == (parity > 0)]


def random_parity_state(L: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Induced-measure state supported on one randomly chosen parity sector."""
    block = _parity_block(L, 1 if rng.integers(2) == 0 else -1)
    rho = np.zeros((1 << L, 1 << L), dtype=complex)
    rho[np.ix_(block, block)] = ginibre_state(len(block), rank or len(block), rng)
    return rho


def random_sector_pure_state(L: int, N: int, rng: np.random.Generator) -> np.ndarray:
    psi = np.zeros(1 << L, dtype=complex)
    psi[sector_indices(L, N)] = random_pure_state(len(sector_indices(L, N)), rng)
    return psi


def _rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng([seed, k])


def fock_suite(samples: int, seed: int, cfg: OptimizerConfig) -> list[PropertyResult]:
    mixed = _Tally("{a_i, a_j†} = δ_ij", ANTICOMMUTATION_TOL)
    pure = _Tally("{a_i, a_j} = 0", ANTICOMMUTATION_TOL)
    for L in range(1, FOCK_MAX_MODES + 1):
        ops = annihilators(FockBasis(L))
        identity = np.eye(1 << L)
        for i, a in enumerate(ops):
            for j, b in enumerate(ops):
                expected = identity if i == j else 0.0
                mixed.add(np.max(np.abs(a @ b.conj().T + b.conj().T @ a - expected)))
                pure.add(np.max(np.abs(a @ b + b @ a)))

    covariance = _Tally("Γ(U) a†_j Γ(U)† = Σ_k U_kj a†_k", COVARIANCE_TOL)
    conserving = _Tally("[Γ(U), N] = 0", COVARIANCE_TOL)
    for k in range(samples):
        rng = _rng(seed, k)
        L = 2 + k % 3
        basis = FockBasis(L)
        u = random_unitary(L, rng)
        gamma = compound_lift(u)
        creators = [a.conj().T for a in annihilators(basis)]
        for j in range(L):
            expected = sum(u[m, j] * creators[m] for m in range(L))
            covariance.add(np.max(np.abs(gamma @ creators[j] @ gamma.conj().T - expected)))
        n = number_op(basis).matrix
        conserving.add(np.max(np.abs(gamma @ n - n @ gamma)))

    return [
        mixed.result(f"L = 1..{FOCK_MAX_MODES}"),
        pure.result(f"L = 1..{FOCK_MAX_MODES}"),
        covariance.result(),
        conserving.result(),
    ]


def lemma_suite(samples: int, seed: int, cfg: OptimizerConfig) -> list[PropertyResult]:
    inequality = _Tally("symmetric dephasing disturbs least", 0.0)
    closed_form = _Tally("closed form equals searched one-way deficit", MATCH_TOL)
    for k in range(samples):
        rng = _rng(seed, k)
        L = 2 + k % 3
        rho = random_parity_state(L, rng)
        j = int(rng.integers(1, L + 1))
        report = lemma_inequality_check(rho, ModePartition.single_modes([j]), n_samples=HAAR_DRAWS, seed=seed + k)
        inequality.add(0.0 if report.nonnegative else -report.margin)
        searched = one_way_deficit(rho, (j,), cfg).value
        closed_form.add(abs(single_mode_deficit_symmetric(rho, j) - searched))
    return [inequality.result(f"{HAAR_DRAWS} Haar measurements per state"), closed_form.result()]


def theorem1_suite(samples: int, seed: int, cfg: OptimizerConfig) -> list[PropertyResult]:
    dephasing = _Tally("MREQ over single modes equals S(ρ‖Π(ρ))", IDENTITY_TOL)
    attained = _Tally("optimal basis reproduces the quantumness", IDENTITY_TOL)
    below = _Tally("quantumness does not exceed the MREQ in the given basis", IDENTITY_TOL)
    for k in range(samples):
        rng = _rng(seed, k)
        L = 2 + k % 2
        rho = random_parity_state(L, rng)
        partition = ModePartition.single_modes(range(1, L + 1))
        local = mreq(rho, partition, cfg).value
        dephasing.add(abs(local - relative_entropy(rho, all_modes_occupation_dephase(rho))))

        result = q_particles(rho, cfg)
        gamma = compound_lift(result.optimal_basis[0])
        rotated = gamma @ rho @ gamma.conj().T
        attained.add(abs(relative_entropy(rotated, all_modes_occupation_dephase(rotated)) - result.value))
        below.add(result.value - local)
    return [dephasing.result(), attained.result(), below.result()]


def theorem2_suite(samples: int, seed: int, cfg: OptimizerConfig) -> list[PropertyResult]:
    equality = _Tally("one-body quantumness equals one-body entanglement", MATCH_TOL)
    for k in range(samples):
        rng = _rng(seed, k)
        L = 3 + k % 2
        N = int(rng.integers(1, L))
        psi = random_sector_pure_state(L, N, rng)
        rho = np.outer(psi, psi.conj())
        equality.add(abs(q_sp(rho, cfg).value - one_body_entanglement(psi)))
    return [equality.result("random pure states of fixed particle number")]


def theorem3_suite(samples: int, seed: int, cfg: OptimizerConfig) -> list[PropertyResult]:
    hierarchy = _Tally("Q_p <= Q_sp", HIERARCHY_SLACK)
    joint = _Tally("H{p(l)} <= Σ_j H{p_j}", IDENTITY_TOL)
    for k in range(samples):
        rng = _rng(seed, k)
        L = 3 + k % 2
        rho = random_parity_state(L, rng)
        one_body = q_sp(rho, cfg)
        particles = q_particles(rho, cfg, starts=one_body.optimal_basis)
        hierarchy.add(particles.value - one_body.value)

        probs = occupation_probabilities(rho)
        bits = (np.arange(1 << L)[:, None] >> (L - 1 - np.arange(L))) & 1
        marginals = sum(shannon_entropy([probs[bits[:, j] == 0].sum(), probs[bits[:, j] == 1].sum()]) for j in range(L))
        joint.add(shannon_entropy(probs) - marginals)
    return [hierarchy.result(), joint.result()]


def appendix_suite(samples: int, seed: int, cfg: OptimizerConfig) -> list[PropertyResult]:
    disturbance = _Tally("number-symmetric dephasing disturbs least", 0.0)
    contraction = _Tally("relative entropy contracts under partial trace", IDENTITY_TOL)
    additivity = _Tally("relative entropy is additive over labelled blocks", IDENTITY_TOL)
    isometry = _Tally("symmetry-block isometry preserves entropy", IDENTITY_TOL)
    for k in range(samples):
        rng = _rng(seed, k)
        L = 2 + k % 2

        N = int(rng.integers(0, L + 1))
        idx = sector_indices(L, N)
        rho = np.zeros((1 << L, 1 << L), dtype=complex)
        rho[np.ix_(idx, idx)] = ginibre_state(len(idx), len(idx), rng)
        j = int(rng.integers(1, L + 1))
        report = lemma_inequality_check(
            rho, ModePartition.single_modes([j]), n_samples=HAAR_DRAWS // 5, seed=seed + k, symmetry="number"
        )
        disturbance.add(0.0 if report.nonnegative else -report.margin)

        full = ginibre_state(1 << L, 1 << L, rng)
        other = ginibre_state(1 << L, 1 << L, rng)
        keep = [m for m in range(1, L + 1) if rng.integers(2)] or [1]
        reduced = relative_entropy(partial_trace(full, keep), partial_trace(other, keep))
        contraction.add(reduced - relative_entropy(full, other))

        weights = rng.dirichlet(np.ones(3))
        rhos = [ginibre_state(2, 2, rng) for _ in range(3)]
        sigmas = [ginibre_state(2, 2, rng) for _ in range(3)]
        joined = block_diag(*[w * r for w, r in zip(weights, rhos, strict=True)])
        reference = block_diag(*[w * s for w, s in zip(weights, sigmas, strict=True)])
        expected = sum(w * relative_entropy(r, s) for w, r, s in zip(weights, rhos, sigmas, strict=True))
        additivity.add(abs(relative_entropy(joined, reference) - expected))

        mixture = random_parity_state(L, rng) * 0.5 + random_parity_state(L, rng) * 0.5
        decomposition = SymmetryBlockDecomposition.build(mixture, symmetry_operator(FockBasis(L), "parity"))
        isometry.add(abs(von_neumann_entropy(decomposition.isometry_image()) - von_neumann_entropy(mixture)))
    return [disturbance.result(), contraction.result(), additivity.result(), isometry.result()]


def classical_suite(samples: int, seed: int, cfg: OptimizerConfig) -> list[PropertyResult]:
    vanishing = _Tally("classical states carry no quantumness", MATCH_TOL)
    fixed = _Tally("optimal basis measurement leaves the state unchanged", 0.0)
    for k in range(samples):
        rng = _rng(seed, k)
        L = 3 + k % 2
        N = int(rng.integers(1, L))
        basis = FockBasis(L)
        p = np.zeros(basis.dim)
        p[sector_indices(L, N)] = rng.dirichlet(np.ones(len(sector_indices(L, N))))
        rho = classical_state(basis, p, random_unitary(L, rng))

        result = q_particles(rho, cfg)
        vanishing.add(result.value)
        # occupation projectors of the optimal basis, pulled back to the original modes
        frame = compound_lift(result.optimal_basis[0]).conj().T
        projectors = tuple(np.outer(frame[:, i], frame[:, i].conj()) for i in range(basis.dim))
        measurement = ProjectiveMeasurement(projectors, tuple(range(1, L + 1)))
        fixed.add(0.0 if is_fixed_point(rho, measurement, tol=MATCH_TOL) else 1.0)
    return [vanishing.result(), fixed.result()]


SUITES: dict[str, tuple[Callable[[int, int, OptimizerConfig], list[PropertyResult]], int]] = {
    "fock": (fock_suite, 30),
    "lemma": (lemma_suite, 200),
    "theorem1": (theorem1_suite, 50),
    "theorem2": (theorem2_suite, 100),
    "theorem3": (theorem3_suite, 500),
    "appendix": (appendix_suite, 100),
    "classical": (classical_suite, 100),
}


def run_suite(name: str, samples: int | None = None, seed: int = 0, cfg: OptimizerConfig | None = None) -> SuiteReport:
    """Run one property suite; ``samples`` overrides its default state count."""
    if name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    suite, default_samples = SUITES[name]
    samples = default_samples if samples is None else samples
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    cfg = cfg or OptimizerConfig(restarts=4, seed=seed)
    logger.info("running %s suite on %d samples", name, samples)
    report = SuiteReport(name, samples, seed, suite(samples, seed, cfg))
    for prop in report.properties:
        if not prop.passed:
            logger.warning("%s: %s failed (worst deviation %s)", name, prop.name, prop.worst)
    return report
