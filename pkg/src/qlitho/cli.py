"""Command-line front end: job parsing, pattern evaluation, synthesis runs,
oracle verification, and CSV/JSON export for plotting.

One job per process; a job file supplies the command and its inputs, the
flags select seed, worker count, output directory, and an optional oracle
cross-check.  Exit codes: 0 ok, 2 invalid job, 3 numeric failure, 4 oracle
mismatch.  Errors are emitted as machine-readable JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import deposition as dep
from . import fock
from . import jobs
from . import optimize as opt
from . import states as st
from . import synth
from .errors import (
    JobValidationError,
    NumericError,
    OptimizationAbort,
    QlithoError,
    StateValidationError,
)

EXIT_OK = 0
EXIT_INVALID_JOB = 2
EXIT_NUMERIC_FAILURE = 3
EXIT_ORACLE_MISMATCH = 4

ORACLE_TOLERANCE = 1e-10

NORMALIZATION_NOTE = (
    "deposition rate = <(e+)^N e^N>/N! with e = (sum of mode operators)/"
    "sqrt(mode count); published proportional curves compare after peak "
    "normalization"
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qlitho",
        description="Evaluate and synthesize multi-photon lithography patterns.",
    )
    parser.add_argument("--job", required=True, help="path to a JSON job file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the job seed (unsigned 64-bit)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for fitness evaluation")
    parser.add_argument("--oracle", action="store_true",
                        help="force a Fock-oracle cross-check of the results")
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)

    if args.threads < 1:
        _emit_error("invalid-job", f"--threads must be >= 1, got {args.threads}")
        return EXIT_INVALID_JOB
    if args.seed is not None and not 0 <= args.seed < 2**64:
        _emit_error("invalid-job", "--seed must be an unsigned 64-bit integer")
        return EXIT_INVALID_JOB

    try:
        job = jobs.load_job(args.job)
    except JobValidationError as exc:
        _emit_error("invalid-job", "job validation failed", exc.violations)
        return EXIT_INVALID_JOB

    seed = args.seed if args.seed is not None else job.seed
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    handlers = {
        "eval-1d": _run_eval_1d,
        "eval-2d": _run_eval_2d,
        "classical": _run_classical,
        "fit-fourier": _run_fit_fourier,
        "fit-superposition-1d": _run_fit_superposition_1d,
        "fit-superposition-2d": _run_fit_superposition_2d,
        "verify-oracle": _run_verify_oracle,
    }
    try:
        manifest, exit_code = handlers[job.command](
            job, seed, args.threads, args.oracle, out_dir
        )
    except (JobValidationError, StateValidationError) as exc:
        _emit_error("invalid-job", str(exc), getattr(exc, "violations", None))
        return EXIT_INVALID_JOB
    except ValueError as exc:
        _emit_error("invalid-job", str(exc))
        return EXIT_INVALID_JOB
    except (NumericError, OptimizationAbort) as exc:
        _emit_error("numeric-failure", str(exc))
        return EXIT_NUMERIC_FAILURE

    manifest_path = job.output_path("manifest", out_dir)
    manifest.setdefault("artifacts", {})["manifest"] = manifest_path.name
    _write_manifest(manifest_path, manifest)
    if exit_code == EXIT_ORACLE_MISMATCH:
        _emit_error(
            "oracle-mismatch",
            f"closed forms deviate from the Fock oracle beyond {ORACLE_TOLERANCE:g}",
            manifest.get("oracle_check"),
        )
    return exit_code


def _emit_error(code: str, message: str, details=None) -> None:
    payload = {"error": {"code": code, "message": message}}
    if details:
        payload["error"]["details"] = details
    json.dump(payload, sys.stderr)
    sys.stderr.write("\n")


def _write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            for value in row:
                if isinstance(value, float) and not math.isfinite(value):
                    raise NumericError(f"non-finite value in {path.name}")
            writer.writerow(row)


def _base_manifest(job: jobs.JobSpec, seed: int, threads: int) -> dict:
    return {
        "schema_version": jobs.SCHEMA_VERSION,
        "command": job.command,
        "package_version": __version__,
        "seed_used": seed,
        "threads": threads,
        "normalization": NORMALIZATION_NOTE,
        "inputs": job.data,
        "derived": {},
        "artifacts": {},
    }


def _eval_grid(points: int) -> np.ndarray:
    # plotting grids start at phi = 0; quadrature grids use midpoints
    return np.arange(points) * (2.0 * math.pi / points)


def _rate_1d(state, phi):
    if isinstance(state, st.SuperpositionFixedM):
        return dep.fixed_m_superposition_rate(state, phi)
    return dep.fixed_n_superposition_rate(state, phi)


def _oracle_deviation_1d(state, phi_samples) -> float:
    worst = 0.0
    for phi in phi_samples:
        if isinstance(state, st.SuperpositionFixedM):
            oracle = 0.0
            for term in state.terms:
                proto = st.ProtoState1D(term.n_photons, state.minority, term.phase)
                raw = fock.build_proto_state(proto, phi, normalize=False)
                element = fock.deposition_matrix_element(
                    raw, raw, (0, 1), term.n_photons
                )
                oracle += abs(term.amplitude) ** 2 * element.real
        else:
            ket = fock.superposition_ket(state, phi)
            oracle = fock.deposition_matrix_element(
                ket, ket, (0, 1), state.n_photons
            ).real
        closed = _rate_1d(state, float(phi))
        worst = max(worst, abs(closed - oracle) / max(1.0, abs(oracle)))
    return worst


def _oracle_deviation_2d(state, phi_samples, chi_samples) -> float:
    worst = 0.0
    for phi, chi in zip(phi_samples, chi_samples):
        ket = fock.superposition_ket(state, phi, chi)
        oracle = fock.deposition_matrix_element(
            ket, ket, (0, 1, 2, 3), state.n_photons
        ).real
        closed = dep.superposition_2d_rate(state, float(phi), float(chi))
        worst = max(worst, abs(closed - oracle) / max(1.0, abs(oracle)))
    return worst


def _subsample(grid: np.ndarray, limit: int = 32) -> np.ndarray:
    step = max(1, grid.size // limit)
    return grid[::step]


def _run_eval_1d(job, seed, threads, oracle_flag, out_dir):
    state = jobs.parse_state(job)
    points = job.data.get("grid", {}).get("points", 1024)
    exposure_time = job.data.get("exposure_time")
    grid = _eval_grid(points)
    rate = _rate_1d(state, grid)

    header = ["phi_rad", "delta_norm_intensity"]
    columns = [grid, rate]
    if exposure_time is not None:
        header.append("exposure_norm_intensity")
        columns.append(rate * exposure_time)
    csv_path = job.output_path("pattern_csv", out_dir)
    _write_csv(csv_path, header, zip(*(c.tolist() for c in columns)))

    manifest = _base_manifest(job, seed, threads)
    manifest["artifacts"]["pattern_csv"] = csv_path.name
    manifest["derived"] = {
        "points": points,
        "max_rate": float(rate.max()),
        "min_rate": float(rate.min()),
        "maxima_count": synth.count_periodic_maxima(rate),
    }
    if isinstance(state, st.SuperpositionFixedM):
        per_order = dep.fixed_m_rate_by_order(state, grid)
        manifest["derived"]["per_order_max_rate"] = {
            str(n): float(np.max(v)) for n, v in sorted(per_order.items())
        }

    exit_code = EXIT_OK
    if oracle_flag:
        deviation = _oracle_deviation_1d(state, _subsample(grid))
        ok = deviation <= ORACLE_TOLERANCE
        manifest["oracle_check"] = {
            "max_relative_deviation": deviation,
            "tolerance": ORACLE_TOLERANCE,
            "ok": ok,
        }
        if not ok:
            exit_code = EXIT_ORACLE_MISMATCH
    return manifest, exit_code


def _run_eval_2d(job, seed, threads, oracle_flag, out_dir):
    state = jobs.parse_state(job)
    grid_block = job.data.get("grid", {})
    points_phi = grid_block.get("points_phi", 256)
    points_chi = grid_block.get("points_chi", 256)
    exposure_time = job.data.get("exposure_time")
    gp = _eval_grid(points_phi)
    gc = _eval_grid(points_chi)
    rate = dep.superposition_2d_rate(state, gp[:, None], gc[None, :])

    header = ["phi_rad", "chi_rad", "delta_norm_intensity"]
    if exposure_time is not None:
        header.append("exposure_norm_intensity")

    def rows():
        for i, phi in enumerate(gp.tolist()):
            for j, chi in enumerate(gc.tolist()):
                row = [phi, chi, float(rate[i, j])]
                if exposure_time is not None:
                    row.append(float(rate[i, j]) * exposure_time)
                yield row

    csv_path = job.output_path("pattern_csv", out_dir)
    _write_csv(csv_path, header, rows())

    manifest = _base_manifest(job, seed, threads)
    manifest["artifacts"]["pattern_csv"] = csv_path.name
    manifest["derived"] = {
        "points_phi": points_phi,
        "points_chi": points_chi,
        "max_rate": float(rate.max()),
        "min_rate": float(rate.min()),
    }

    exit_code = EXIT_OK
    if oracle_flag:
        rng = np.random.default_rng(seed)
        phis = rng.uniform(0.0, 2.0 * math.pi, 16)
        chis = rng.uniform(0.0, 2.0 * math.pi, 16)
        deviation = _oracle_deviation_2d(state, phis, chis)
        ok = deviation <= ORACLE_TOLERANCE
        manifest["oracle_check"] = {
            "max_relative_deviation": deviation,
            "tolerance": ORACLE_TOLERANCE,
            "ok": ok,
        }
        if not ok:
            exit_code = EXIT_ORACLE_MISMATCH
    return manifest, exit_code


def _run_classical(job, seed, threads, oracle_flag, out_dir):
    block = job.data["classical"]
    wavelength = float(block["wavelength"])
    theta = float(block.get("theta", math.pi / 2))
    points = block.get("points", 512)
    span = block.get("span", [0.0, wavelength])
    x = np.linspace(float(span[0]), float(span[1]), points)
    intensity = synth.classical_intensity(x, wavelength, theta)

    csv_path = job.output_path("pattern_csv", out_dir)
    _write_csv(
        csv_path,
        ["x_length_units", "intensity_norm"],
        zip(x.tolist(), intensity.tolist()),
    )
    manifest = _base_manifest(job, seed, threads)
    manifest["artifacts"]["pattern_csv"] = csv_path.name
    manifest["derived"] = {
        "rayleigh_resolution": synth.rayleigh_resolution(wavelength, theta),
        "first_zero_x": wavelength / (4.0 * math.sin(theta)),
        "points": points,
    }
    return manifest, EXIT_OK


def _run_fit_fourier(job, seed, threads, oracle_flag, out_dir):
    target = jobs.parse_target(job, 1)
    block = job.data["fourier"]
    n_max = block["n_max"]
    coeff_points = block.get("points", max(1024, 4 * n_max + 1))
    exposure_time = float(job.data.get("exposure_time", 1.0))
    pattern_points = job.data.get("grid", {}).get("points", 1024)

    a, b = synth.fourier_coefficients(target, n_max, coeff_points)
    program = synth.to_fourier_program(a, b, exposure_time)
    grid = _eval_grid(pattern_points)
    exposure = synth.program_exposure(program, grid)
    target_values = np.asarray(target.evaluator(grid), dtype=float)

    csv_path = job.output_path("pattern_csv", out_dir)
    _write_csv(
        csv_path,
        ["phi_rad", "delta_norm_intensity", "exposure_norm_intensity"],
        zip(
            grid.tolist(),
            (exposure / exposure_time).tolist(),
            exposure.tolist(),
        ),
    )

    quad_grid = synth.periodic_grid(coeff_points)
    residual = synth.periodic_integral(
        (
            np.asarray(target.evaluator(quad_grid), dtype=float)
            - synth.program_exposure(program, quad_grid)
        )
        ** 2
    )
    penalty = synth.penalty_rate(program)
    manifest = _base_manifest(job, seed, threads)
    manifest["artifacts"]["pattern_csv"] = csv_path.name
    manifest["derived"] = {
        "harmonics": len(program.terms),
        "terms": [
            {"harmonic": n, "weight": c, "phase": theta}
            for n, c, theta in program.terms
        ],
        "penalty_Q": penalty,
        "penalty_exposure": penalty * exposure_time,
        "mean_exposure": float(exposure.mean()),
        "min_exposure": float(exposure.min()),
        "truncation_distance": synth.truncation_distance(target, n_max, coeff_points),
        "residual_with_offset": residual,
        "coefficients_a": a.tolist(),
        "coefficients_b": b.tolist(),
    }
    epsilon = job.data.get("epsilon")
    if epsilon is not None:
        report = synth.approximation_ok(
            target,
            lambda phi: synth.program_exposure(program, phi),
            float(epsilon),
            n_max,
            coeff_points,
        )
        manifest["derived"]["approximation"] = {
            "ok": report.ok,
            "residual": report.residual,
            "truncation_distance": report.truncation_distance,
            "epsilon": report.epsilon,
            "degenerate": report.degenerate,
            "note": report.note,
        }
    return manifest, EXIT_OK


def _optimizer_config(job, seed, dimension, amplitude_slots):
    block = job.data.get("optimizer", {})
    return opt.OptimizerConfig(
        population_size=block.get("population_size", min(200, 15 * dimension)),
        generations=block.get("generations", 500),
        bounds=((-1.0, 1.0),) * (2 * amplitude_slots) + (opt.LOG_EXPOSURE_BOUNDS,),
        mutation_factor=block.get("mutation_factor", 0.7),
        crossover_rate=block.get("crossover_rate", 0.9),
        seed=seed,
        strategy=block.get("strategy", "rand1bin"),
    )


def _write_trace(path: Path, result: opt.FitResult) -> None:
    _write_csv(
        path,
        ["generation", "best_objective", "mean_objective"],
        zip(range(len(result.history)), result.history, result.mean_history),
    )


def _run_fit_superposition_1d(job, seed, threads, oracle_flag, out_dir):
    target = jobs.parse_target(job, 1)
    n_photons = job.data["photons"]
    points = job.data.get("grid", {}).get("points", 1024)
    phases = job.data.get("phases")
    count = n_photons // 2 + 1
    dark_weight = float(job.data.get("optimizer", {}).get("dark_weight", 1.0))
    weights = None
    if dark_weight > 1.0:
        samples = np.asarray(target.evaluator(synth.periodic_grid(points)), dtype=float)
        weights = opt.dark_region_weights(samples, dark_weight)
    config = _optimizer_config(job, seed, 2 * count + 1, count)
    fit = opt.fit_superposition_1d(
        target,
        n_photons,
        config=config,
        points=points,
        phases=phases,
        weights=weights,
        workers=threads,
    )
    plain_objective = synth.objective_1d(fit.state, fit.exposure_time, target, points)

    grid = _eval_grid(points)
    rate = dep.fixed_n_superposition_rate(fit.state, grid)
    csv_path = job.output_path("pattern_csv", out_dir)
    _write_csv(
        csv_path,
        ["phi_rad", "delta_norm_intensity", "exposure_norm_intensity"],
        zip(grid.tolist(), rate.tolist(), (rate * fit.exposure_time).tolist()),
    )
    trace_path = job.output_path("trace_csv", out_dir)
    _write_trace(trace_path, fit.result)

    manifest = _base_manifest(job, seed, threads)
    manifest["artifacts"]["pattern_csv"] = csv_path.name
    manifest["artifacts"]["trace_csv"] = trace_path.name
    manifest["derived"] = {
        "fitted_state": st.state_to_dict(fit.state),
        "exposure_time": fit.exposure_time,
        "best_objective": fit.result.best_objective,
        "objective_unweighted": plain_objective,
        "dark_weight": dark_weight,
        "evaluations": fit.result.evaluations,
        "generations": len(fit.result.history) - 1,
        "best_params": fit.result.best_params.tolist(),
    }

    exit_code = EXIT_OK
    if oracle_flag:
        rng = np.random.default_rng(seed)
        deviation = _oracle_deviation_1d(
            fit.state, rng.uniform(0.0, 2.0 * math.pi, 16)
        )
        ok = deviation <= ORACLE_TOLERANCE
        manifest["oracle_check"] = {
            "max_relative_deviation": deviation,
            "tolerance": ORACLE_TOLERANCE,
            "ok": ok,
        }
        if not ok:
            exit_code = EXIT_ORACLE_MISMATCH
    return manifest, exit_code


def _run_fit_superposition_2d(job, seed, threads, oracle_flag, out_dir):
    target = jobs.parse_target(job, 2)
    n_photons = job.data["photons"]
    grid_block = job.data.get("grid", {})
    points_phi = grid_block.get("points_phi", 64)
    points_chi = grid_block.get("points_chi", 64)
    count = n_photons // 2 + 1
    dark_weight = float(job.data.get("optimizer", {}).get("dark_weight", 1.0))
    weights = None
    if dark_weight > 1.0:
        gp = synth.periodic_grid(points_phi)
        gc = synth.periodic_grid(points_chi)
        samples = np.asarray(target.evaluator(gp[:, None], gc[None, :]), dtype=float)
        weights = opt.dark_region_weights(samples, dark_weight)
    config = _optimizer_config(job, seed, 2 * count * count + 1, count * count)
    fit = opt.fit_superposition_2d(
        target,
        n_photons,
        config=config,
        points_phi=points_phi,
        points_chi=points_chi,
        phases_x=job.data.get("phases_x"),
        phases_y=job.data.get("phases_y"),
        weights=weights,
        workers=threads,
    )
    plain_objective = synth.objective_2d(
        fit.state, fit.exposure_time, target, points_phi, points_chi
    )

    gp = _eval_grid(points_phi)
    gc = _eval_grid(points_chi)
    rate = dep.superposition_2d_rate(fit.state, gp[:, None], gc[None, :])

    def rows():
        for i, phi in enumerate(gp.tolist()):
            for j, chi in enumerate(gc.tolist()):
                value = float(rate[i, j])
                yield [phi, chi, value, value * fit.exposure_time]

    csv_path = job.output_path("pattern_csv", out_dir)
    _write_csv(
        csv_path,
        ["phi_rad", "chi_rad", "delta_norm_intensity", "exposure_norm_intensity"],
        rows(),
    )
    trace_path = job.output_path("trace_csv", out_dir)
    _write_trace(trace_path, fit.result)

    manifest = _base_manifest(job, seed, threads)
    manifest["artifacts"]["pattern_csv"] = csv_path.name
    manifest["artifacts"]["trace_csv"] = trace_path.name
    manifest["derived"] = {
        "fitted_state": st.state_to_dict(fit.state),
        "exposure_time": fit.exposure_time,
        "best_objective": fit.result.best_objective,
        "objective_unweighted": plain_objective,
        "dark_weight": dark_weight,
        "evaluations": fit.result.evaluations,
        "generations": len(fit.result.history) - 1,
    }

    exit_code = EXIT_OK
    if oracle_flag:
        rng = np.random.default_rng(seed)
        deviation = _oracle_deviation_2d(
            fit.state,
            rng.uniform(0.0, 2.0 * math.pi, 8),
            rng.uniform(0.0, 2.0 * math.pi, 8),
        )
        ok = deviation <= ORACLE_TOLERANCE
        manifest["oracle_check"] = {
            "max_relative_deviation": deviation,
            "tolerance": ORACLE_TOLERANCE,
            "ok": ok,
        }
        if not ok:
            exit_code = EXIT_ORACLE_MISMATCH
    return manifest, exit_code


def _run_verify_oracle(job, seed, threads, oracle_flag, out_dir):
    block = job.data.get("oracle", {})
    max_1d = block.get("max_photons_1d", 8)
    max_2d = block.get("max_photons_2d", 6)
    draws = block.get("draws", 20)
    rng = np.random.default_rng(seed)

    worst_1d = 0.0
    for n in range(1, max_1d + 1):
        for m in range(n // 2 + 1):
            for mp in range(n // 2 + 1):
                for _ in range(draws):
                    tm, tmp, phi = rng.uniform(0.0, 2.0 * math.pi, 3)
                    bra = fock.build_proto_state(
                        st.ProtoState1D(n, m, tm), phi, normalize=False
                    )
                    ket = fock.build_proto_state(
                        st.ProtoState1D(n, mp, tmp), phi, normalize=False
                    )
                    oracle = fock.deposition_matrix_element(bra, ket, (0, 1), n)
                    closed = dep.matrix_element_1d(n, m, mp, tm, tmp, phi)
                    worst_1d = max(
                        worst_1d, abs(closed - oracle) / max(1.0, abs(oracle))
                    )

    worst_2d = 0.0
    for n in range(1, max_2d + 1):
        half = n // 2 + 1
        for _ in range(draws * half):
            m, k, mp, kp = (int(v) for v in rng.integers(0, half, 4))
            zs = rng.uniform(0.0, 2.0 * math.pi, 4)
            phi, chi = rng.uniform(0.0, 2.0 * math.pi, 2)
            bra = fock.build_proto_state(
                st.ProtoState2D(n, m, k, zs[0], zs[1]), phi, chi, normalize=False
            )
            ket = fock.build_proto_state(
                st.ProtoState2D(n, mp, kp, zs[2], zs[3]), phi, chi, normalize=False
            )
            oracle = fock.deposition_matrix_element(bra, ket, (0, 1, 2, 3), n)
            closed = dep.matrix_element_2d(
                n, m, k, mp, kp, zs[0], zs[1], zs[2], zs[3], phi, chi
            )
            worst_2d = max(worst_2d, abs(closed - oracle) / max(1.0, abs(oracle)))

    ok = worst_1d <= ORACLE_TOLERANCE and worst_2d <= ORACLE_TOLERANCE
    manifest = _base_manifest(job, seed, threads)
    manifest["oracle_check"] = {
        "max_relative_deviation_1d": worst_1d,
        "max_relative_deviation_2d": worst_2d,
        "max_photons_1d": max_1d,
        "max_photons_2d": max_2d,
        "draws": draws,
        "tolerance": ORACLE_TOLERANCE,
        "ok": ok,
    }
    return manifest, EXIT_OK if ok else EXIT_ORACLE_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
