"""Command-line front end.

Usage:
    fermiq quantumness state.ini --quantifier q_particles
    fermiq evolve --L 4 --N 2 --tmax 30
    fermiq landscape --ensemble par1 --samples 10000 --grid 61x61
    fermiq check theorem3 --samples 50

Results are printed to stdout as JSON; files go to --out together with a
manifest.json carrying the configuration and SHA-256 digests. Failures are
reported on stderr as {"error": {"message": ..., "type": ...}}.

Exit codes: 0 success, 1 property-suite failure, 2 usage or parse error,
3 numerical failure.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from fermiq import __version__, config
from fermiq.checks import SUITES, run_suite
from fermiq.ensembles import EnsembleKind, EnsembleSpec, histogram_from_values, t_landscape
from fermiq.entanglement import (
    balanced_cut,
    fermionic_concurrence,
    mode_negativity,
    particle_negativity,
    shifted_negativity,
)
from fermiq.errors import FermiqError, error_document
from fermiq.fock import build_basis, slater_state
from fermiq.lindblad import (
    DISSIPATOR_SCALES,
    TRAJECTORY_RESTARTS,
    IntegratorConfig,
    build_model,
    dark_state,
    detect_ppt_window,
    negativity_kind,
    ppt_windows,
    rk4_evolve,
    trajectory_observables,
)
from fermiq.manifest import RunManifest, to_jsonable, write_csv, write_json
from fermiq.measurement import ModePartition
from fermiq.optimize import OptimizerConfig
from fermiq.quantifiers import activation_quantumness, mreq, one_way_deficit, q_particles, q_sp
from fermiq.quantinfo import fidelity_pure
from fermiq.statespec import load_state_spec

logger = logging.getLogger(__name__)

QUANTIFIERS = (
    "q_particles",
    "q_sp",
    "one_way",
    "mreq",
    "activation",
    "concurrence",
    "negativity",
    "particle_negativity",
    "shifted_negativity",
)
TRAJECTORY_COLUMNS = ["purity", "q_particles", "concurrence", "negativity", "shifted_negativity", "trace_err"]

EXIT_OK = 0
EXIT_SUITE_FAILED = 1


def _log_base(value: str) -> float:
    try:
        return config.parse_log_base(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(value: str) -> tuple[int, int]:
    try:
        n_phi, n_theta = (int(x) for x in value.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 61x61, got {value!r}") from None
    if n_phi < 2 or n_theta < 1:
        raise argparse.ArgumentTypeError("grid needs at least 2 phi points and 1 theta point")
    return n_phi, n_theta


def _modes(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in value.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"modes must be a comma separated list, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=config.SEED, help="Seed for every random stream.")
    shared.add_argument("--threads", type=int, default=config.THREADS, help="Worker threads.")
    shared.add_argument("--log-base", type=_log_base, default=None, help="Entropy unit: 2/bits or e/nats.")
    shared.add_argument("--out", type=Path, default=Path("results"), help="Output directory (default: results).")
    shared.add_argument("--format", choices=["csv", "json"], default="csv", help="Output file format.")
    shared.add_argument("--log-level", default=None, help="Logging level (default: FERMIQ_LOG_LEVEL or WARNING).")

    optimizer = argparse.ArgumentParser(add_help=False)
    optimizer.add_argument("--restarts", type=int, default=OptimizerConfig.restarts, help="Optimizer restarts.")
    optimizer.add_argument("--max-iters", type=int, default=OptimizerConfig.max_iters, help="Simplex iterations.")

    parser = argparse.ArgumentParser(prog="fermiq", description="Quantumness of correlations for fermionic modes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("quantumness", parents=[shared, optimizer], help="Evaluate a quantifier on a state spec.")
    p.add_argument("spec", type=Path, help="State spec file (INI).")
    p.add_argument("--quantifier", choices=QUANTIFIERS, default="q_particles")
    p.add_argument("--modes", type=_modes, default=(1,), help="Measured modes for one_way/mreq, e.g. 1,2.")
    p.set_defaults(func=cmd_quantumness)

    p = commands.add_parser("evolve", parents=[shared, optimizer], help="Dissipative chain trajectory.")
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument(
        "--dissipator",
        choices=list(DISSIPATOR_SCALES),
        default="doubled",
        help="Dissipator normalization: J(LρL† - ½{L†L,ρ}) or J(2LρL† - {L†L,ρ}).",
    )
    p.add_argument("--dt", type=float, default=IntegratorConfig.dt)
    p.add_argument("--tmax", type=float, default=IntegratorConfig.t_max)
    p.add_argument("--record-every", type=int, default=IntegratorConfig.record_every)
    p.add_argument("--quantifier-every", type=int, default=IntegratorConfig.quantifier_every)
    p.add_argument("--skip-quantifiers", action="store_true", help="Record only the cheap observables.")
    p.set_defaults(func=cmd_evolve, restarts=TRAJECTORY_RESTARTS)

    p = commands.add_parser("landscape", parents=[shared], help="Measurement-disturbance landscape over an ensemble.")
    p.add_argument("--ensemble", choices=[kind.value for kind in EnsembleKind], default="par1")
    p.add_argument("--L", type=int, default=3)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--grid", type=_grid, default=(61, 61), help="Angle grid NxM (phi x theta).")
    p.add_argument("--mode", type=int, default=1, help="Measured mode.")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--refine", action="store_true", help="Refine each per-state minimum with a continuous search.")
    p.set_defaults(func=cmd_landscape)

    p = commands.add_parser("check", parents=[shared], help="Run a property suite.")
    p.add_argument("suite", choices=list(SUITES))
    p.add_argument("--samples", type=int, default=None, help="Override the suite's number of random states.")
    p.set_defaults(func=cmd_check)

    return parser


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, seed=args.seed, threads=args.threads)


def _snapshot(args) -> dict:
    snapshot = {key: value for key, value in vars(args).items() if key != "func"}
    return {key: str(value) if isinstance(value, Path) else value for key, value in snapshot.items()}


def _emit(payload: dict) -> None:
    print(json.dumps(to_jsonable(payload), indent=2, sort_keys=True))


def _evaluate(spec, args, base: float) -> dict:
    rho, quantifier = spec.rho, args.quantifier
    unit = config.unit_label(base)

    if quantifier in ("concurrence", "negativity", "particle_negativity"):
        if quantifier == "concurrence":
            value = fermionic_concurrence(rho)
        elif quantifier == "particle_negativity":
            value = particle_negativity(rho)
        else:
            value = mode_negativity(rho, balanced_cut(spec.L))
        return {"value": value.value, "unit": None, "converged": True, "optimal_basis": None, **value.metadata}

    cfg = _optimizer_config(args)
    if quantifier == "shifted_negativity":
        value = shifted_negativity(rho, cfg)
        return {
            "value": value.value,
            "unit": None,
            "converged": value.metadata["converged"],
            "gap": value.metadata["gap"],
            "optimal_basis": value.metadata["optimal_basis"],
        }

    if quantifier == "q_particles":
        result = q_particles(rho, cfg, base=base)
    elif quantifier == "q_sp":
        result = q_sp(rho, cfg, base=base)
    elif quantifier == "one_way":
        result = one_way_deficit(rho, args.modes, cfg, base=base)
    elif quantifier == "mreq":
        result = mreq(rho, ModePartition.single_modes(args.modes), cfg, base=base)
    else:
        result = activation_quantumness(rho, cfg)
        unit = None

    return {
        "value": result.value,
        "unit": unit,
        "converged": result.converged,
        "route": result.route,
        "optimal_basis": result.optimal_basis[0] if len(result.optimal_basis) == 1 else result.optimal_basis,
        **result.optimizer_stats(),
        **result.extra,
    }


def cmd_quantumness(args, manifest: RunManifest) -> int:
    spec = load_state_spec(args.spec)
    base = args.log_base or spec.log_base or config.default_log_base()
    payload = {"quantifier": args.quantifier, "state": spec.describe(), **_evaluate(spec, args, base)}
    if not payload["converged"]:
        logger.warning("%s search did not converge; reporting the best value found", args.quantifier)

    if args.format == "json":
        manifest.add_output(write_json(args.out / "quantumness.json", payload))
    else:
        row = [payload["value"], payload["unit"] or "", payload["converged"]]
        manifest.add_output(write_csv(args.out / "quantumness.csv", ["value", "unit", "converged"], [row]))
    _emit(payload)
    return EXIT_OK


def alternating_occupation(L: int, N: int) -> list[int]:
    """Occupy modes 1, 3, 5, ... first, then the remaining ones in order."""
    order = list(range(0, L, 2)) + list(range(1, L, 2))
    bits = [0] * L
    for k in order[:N]:
        bits[k] = 1
    return bits


def cmd_evolve(args, manifest: RunManifest) -> int:
    base = args.log_base or config.default_log_base()
    basis = build_basis(args.L)
    model = build_model(basis, J=args.J, N=args.N, convention=args.dissipator)
    cfg = IntegratorConfig(
        dt=args.dt, t_max=args.tmax, record_every=args.record_every, quantifier_every=args.quantifier_every
    )
    psi0 = slater_state(basis, alternating_occupation(args.L, args.N))
    cheap, expensive = trajectory_observables(
        basis, args.N, _optimizer_config(args), base=base, with_quantifiers=not args.skip_quantifiers
    )
    record = rk4_evolve(model, np.outer(psi0, psi0.conj()), cfg, cheap, expensive)

    final_fidelity = fidelity_pure(record.final_state, dark_state(basis, args.N))
    window = detect_ppt_window(record)
    metadata = {
        "seed": args.seed,
        "dt": cfg.dt,
        "J": args.J,
        "dissipator": args.dissipator,
        "negativity": negativity_kind(args.N)[0],
        "ppt_windows": [list(w) for w in ppt_windows(record)],
        "L": args.L,
        "N": args.N,
        "t_max": cfg.t_max,
        "unit": config.unit_label(base),
        "version": __version__,
        "diagnostics": record.diagnostics,
    }

    if args.format == "json":
        series = {"t": record.times, **{name: record.observables.get(name) for name in TRAJECTORY_COLUMNS}}
        series["fidelity"] = record.observables["fidelity"]
        manifest.add_output(write_json(args.out / "trajectory.json", {"metadata": metadata, "series": series}))
    else:
        rows = record.rows(TRAJECTORY_COLUMNS)
        manifest.add_output(write_csv(args.out / "trajectory.csv", ["t", *TRAJECTORY_COLUMNS], rows))
        manifest.add_output(write_json(args.out / "trajectory_meta.json", metadata))

    _emit(
        {
            "final_fidelity": final_fidelity,
            "ppt_window": list(window) if window else None,
            "max_trace_err": record.diagnostics["max_trace_err"],
            "records": len(record.times),
        }
    )
    return EXIT_OK


def cmd_landscape(args, manifest: RunManifest) -> int:
    spec = EnsembleSpec(
        kind=args.ensemble,
        L=args.L,
        measured_mode=args.mode,
        sample_size=args.samples,
        rank=args.rank,
        seed=args.seed,
    )
    grid = t_landscape(spec, args.grid, threads=args.threads, refine=args.refine)
    histogram = histogram_from_values(grid.q_values, args.bins)
    manifest.config["ensemble_spec"] = spec.describe()

    if args.format == "json":
        landscape = {
            "ensemble": spec.describe(),
            "phi": grid.phis,
            "theta": grid.thetas,
            "T_mean": grid.mean,
            "T_se": grid.se,
            "n": grid.n,
        }
        distribution = {
            "ensemble": spec.describe(),
            "bin_left": histogram.bin_left,
            "bin_right": histogram.bin_right,
            "prob": histogram.prob,
        }
        manifest.add_output(write_json(args.out / "landscape.json", landscape))
        manifest.add_output(write_json(args.out / "histogram.json", distribution))
    else:
        manifest.add_output(write_csv(args.out / "landscape.csv", ["phi", "theta", "T_mean", "T_se", "n"], grid.rows()))
        manifest.add_output(write_csv(args.out / "histogram.csv", ["bin_left", "bin_right", "prob"], histogram.rows()))

    a, b = np.unravel_index(int(np.argmin(grid.mean)), grid.mean.shape)
    _emit(
        {
            "ensemble": spec.describe(),
            "min_T": grid.mean[a, b],
            "min_T_se": grid.se[a, b],
            "min_T_at": [grid.phis[a], grid.thetas[b]],
            "mean_Q": float(np.mean(grid.q_values)),
        }
    )
    return EXIT_OK


def cmd_check(args, manifest: RunManifest) -> int:
    cfg = OptimizerConfig(restarts=4, seed=args.seed, threads=args.threads)
    report = run_suite(args.suite, samples=args.samples, seed=args.seed, cfg=cfg)
    for prop in report.properties:
        worst = "n/a" if prop.worst is None else f"{prop.worst:.3e}"
        print(f"{'PASS' if prop.passed else 'FAIL'}  {args.suite}: {prop.name} ({prop.checked} checked, worst {worst})")
    manifest.add_output(write_json(args.out / f"check_{args.suite}.json", report.to_dict()))
    return EXIT_OK if report.passed else EXIT_SUITE_FAILED


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    config.configure_logging(args.log_level)
    manifest = RunManifest(command=args.command, config=_snapshot(args), seed=args.seed, version=__version__)
    started = time.perf_counter()
    try:
        code = args.func(args, manifest)
    except FermiqError as exc:
        logger.debug("command failed", exc_info=True)
        print(json.dumps(error_document(str(exc), exc.error_type)), file=sys.stderr)
        return exc.exit_code

    manifest.wall_time = time.perf_counter() - started
    manifest.write(args.out)
    return code
