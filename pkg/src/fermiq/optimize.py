"""Multi-start simplex search over products of unitary groups.

A unitary is parametrized as U = exp(A) with A anti-Hermitian, which takes n²
real numbers: the imaginary diagonal, then the real and imaginary parts of the
strict upper triangle.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from fermiq.errors import ValidationError
from fermiq.fock import SingleParticleUnitary
from fermiq.quantinfo import random_unitary

logger = logging.getLogger(__name__)

INFEASIBLE_PENALTY = 1e12

# Best and runner-up values closer than this count as the same minimum.
AGREEMENT_TOL = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    """Restart and tolerance settings for ``minimize_over_unitaries``."""

    restarts: int = 32
    max_iters: int = 2000
    xatol: float = 1e-10
    fatol: float = 1e-9
    seed: int = 0
    threads: int = 1
    simplex_step: float = 0.3
    polish_rounds: int = 2

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError(f"restarts must be at least 1, got {self.restarts}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be at least 1, got {self.max_iters}")


@dataclass
class OptimizationResult:
    unitaries: list[np.ndarray]
    value: float
    restarts: int
    iterations: int
    gap: float | None
    converged: bool
    best_restart: int
    values: list[float] = field(default_factory=list)


def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def generator_from_params(x: np.ndarray, n: int) -> np.ndarray:
    rows, cols = _triu(n)
    m = len(rows)
    a = np.zeros((n, n), dtype=complex)
    a[np.diag_indices(n)] = 1j * x[:n]
    a[rows, cols] = x[n : n + m] + 1j * x[n + m : n + 2 * m]
    a[cols, rows] = -np.conj(a[rows, cols])
    return a


def params_from_generator(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    rows, cols = _triu(n)
    upper = a[rows, cols]
    return np.concatenate([np.imag(np.diag(a)), np.real(upper), np.imag(upper)])


def unitary_from_params(x: np.ndarray, n: int) -> np.ndarray:
    return expm(generator_from_params(np.asarray(x, dtype=float), n))


def params_from_unitary(u: np.ndarray) -> np.ndarray:
    """Parameters of the principal logarithm of ``u``."""
    return params_from_generator(SingleParticleUnitary(u).generator())


def split_params(x: np.ndarray, dims: Sequence[int]) -> list[np.ndarray]:
    chunks, offset = [], 0
    for n in dims:
        chunks.append(x[offset : offset + n * n])
        offset += n * n
    return chunks


def unitaries_from_params(x: np.ndarray, dims: Sequence[int]) -> list[np.ndarray]:
    return [unitary_from_params(chunk, n) for chunk, n in zip(split_params(x, dims), dims, strict=True)]


def params_from_unitaries(unitaries: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([params_from_unitary(u) for u in unitaries])


def distance_to_identity(unitaries: Sequence[np.ndarray]) -> float:
    return float(sum(np.linalg.norm(u - np.eye(u.shape[0])) for u in unitaries))


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0, x0 + step * np.eye(len(x0))])


def minimize_over_unitaries(
    objective: Callable[[list[np.ndarray]], float],
    dims: Sequence[int],
    cfg: OptimizerConfig | None = None,
    starts: Sequence[Sequence[np.ndarray]] = (),
) -> OptimizationResult:
    """Minimize ``objective`` over U(dims[0]) x U(dims[1]) x ...

    Caller-supplied ``starts`` are tried first; the remaining restarts begin at
    Haar-random points drawn from ``default_rng([seed, restart])``. The winner is
    the lowest value, ties within ``fatol`` going to the point closest to the
    identity and then to the lower restart index.
    """
    cfg = cfg or OptimizerConfig()
    dims = tuple(int(n) for n in dims)
    runs = max(cfg.restarts, len(starts))

    def penalized(x: np.ndarray) -> float:
        value = objective(unitaries_from_params(x, dims))
        return INFEASIBLE_PENALTY if not np.isfinite(value) else float(value)

    def run(index: int) -> tuple[np.ndarray, float, int, bool]:
        if index < len(starts):
            x = params_from_unitaries(starts[index])
        else:
            rng = np.random.default_rng([cfg.seed, index])
            x = params_from_unitaries([random_unitary(n, rng) for n in dims])
        value, iterations, success = penalized(x), 0, False
        step = cfg.simplex_step
        for _ in range(1 + cfg.polish_rounds):
            result = minimize(
                penalized,
                x,
                method="Nelder-Mead",
                options={
                    "maxiter": cfg.max_iters,
                    "maxfev": 2 * cfg.max_iters,
                    "xatol": cfg.xatol,
                    "fatol": cfg.fatol,
                    "adaptive": True,
                    "initial_simplex": _simplex(x, step),
                },
            )
            iterations += int(result.nit)
            improved = value - result.fun
            if result.fun <= value:
                x, value = result.x, float(result.fun)
            success = bool(result.success)
            if improved <= cfg.fatol:
                break
            step /= 10.0
        logger.debug("restart %d finished at %.12g after %d iterations", index, value, iterations)
        return x, value, iterations, success

    if cfg.threads > 1 and runs > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(run, range(runs)))
    else:
        outcomes = [run(index) for index in range(runs)]

    values = [value for _, value, _, _ in outcomes]
    best_value = min(values)
    tied = [i for i, value in enumerate(values) if value <= best_value + cfg.fatol]
    candidates = {i: unitaries_from_params(outcomes[i][0], dims) for i in tied}
    winner = min(tied, key=lambda i: (distance_to_identity(candidates[i]), i))
    ordered = sorted(values)
    gap = ordered[1] - ordered[0] if len(ordered) > 1 else None
    converged = outcomes[winner][3]
    if not converged:
        logger.warning("simplex search did not converge; best value %.12g", values[winner])
    return OptimizationResult(
        unitaries=candidates[winner],
        value=values[winner],
        restarts=runs,
        iterations=sum(it for _, _, it, _ in outcomes),
        gap=gap,
        converged=converged,
        best_restart=winner,
        values=values,
    )


def minimize_until_agreement(
    objective: Callable[[list[np.ndarray]], float],
    dims: Sequence[int],
    cfg: OptimizerConfig | None = None,
    starts: Sequence[Sequence[np.ndarray]] = (),
    tol: float = AGREEMENT_TOL,
    max_doublings: int = 2,
) -> OptimizationResult:
    """Rerun the search with twice as many restarts until the two best runs agree within ``tol``.

    Restart seeds depend only on the restart index, so each doubling repeats the
    previous runs and adds as many new ones.
    """
    cfg = cfg or OptimizerConfig()
    result = minimize_over_unitaries(objective, dims, cfg, starts)
    for _ in range(max_doublings):
        if result.gap is not None and result.gap <= tol:
            return result
        cfg = replace(cfg, restarts=2 * max(cfg.restarts, len(starts)))
        logger.info("runner-up %.3g above best; retrying with %d restarts", result.gap or 0.0, cfg.restarts)
        result = minimize_over_unitaries(objective, dims, cfg, starts)
    if result.gap is None or result.gap > tol:
        logger.warning("best value %.12g was reached by a single restart", result.value)
    return result
