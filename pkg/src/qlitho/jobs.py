"""Job-file schema for the command-line front end.

A job is a JSON document with a ``schema_version`` field, a ``command``, and
command-specific blocks; the full schema is documented in the README.  Paths
inside a job are resolved relative to the job file.  Validation collects
every violation instead of stopping at the first.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import states as st
from . import synth
from .errors import JobValidationError

SCHEMA_VERSION = 1

COMMANDS = (
    "eval-1d",
    "eval-2d",
    "fit-fourier",
    "fit-superposition-1d",
    "fit-superposition-2d",
    "classical",
    "verify-oracle",
)

STRATEGIES = ("rand1bin", "best1bin")

DEFAULT_OUTPUTS = {
    "pattern_csv": "pattern.csv",
    "manifest": "manifest.json",
    "trace_csv": "trace.csv",
}


@dataclass(frozen=True)
class JobSpec:
    command: str
    seed: int
    data: dict
    base_dir: Path

    def output_path(self, key: str, out_dir: Path) -> Path:
        name = self.data.get("output", {}).get(key, DEFAULT_OUTPUTS[key])
        return Path(out_dir) / name


def load_job(path) -> JobSpec:
    """Read and validate a job file; raises ``JobValidationError`` with the
    full violation list on any schema problem."""
    path = Path(path)
    if not path.is_file():
        raise JobValidationError(f"job file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise JobValidationError(f"job file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise JobValidationError("job file must contain a JSON object")
    base_dir = path.parent
    violations = validate_job(data, base_dir)
    if violations:
        raise JobValidationError(violations)
    return JobSpec(
        command=data["command"],
        seed=int(data.get("seed", 0)),
        data=data,
        base_dir=base_dir,
    )


def _check_state(data, base_dir, expect, out, prefix="state"):
    raw = data.get("state")
    if raw is None:
        out.append(f"{prefix}: required for this command")
        return None
    try:
        state = st.state_from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        out.append(f"{prefix}: cannot parse ({exc})")
        return None
    problems = st.validate(state)
    out.extend(f"{prefix}.{p}" for p in problems)
    family = raw.get("family")
    if family == "noon":
        family = "fixed-n-1d"
    if family not in expect:
        out.append(f"{prefix}.family: expected one of {expect}, got {family!r}")
        return None
    return state if not problems else None


def state_max_photons(state) -> int:
    if isinstance(state, st.SuperpositionFixedN):
        return state.n_photons
    if isinstance(state, st.SuperpositionFixedM):
        return max(t.n_photons for t in state.terms)
    return state.n_photons


def _check_grid_points(value, minimum, out, name):
    if not isinstance(value, int) or value < minimum:
        out.append(f"{name}: must be an integer >= {minimum}, got {value!r}")
        return False
    return True


def _check_target(data, base_dir, dims, out, prefix="target"):
    raw = data.get("target")
    if raw is None:
        out.append(f"{prefix}: required for this command")
        return None
    kind = raw.get("kind")
    try:
        if kind == "trench":
            if dims != 1:
                out.append(f"{prefix}: trench is a 1D target")
                return None
            return synth.trench_target(float(raw.get("height", 1.0)))
        if kind == "square":
            if dims != 2:
                out.append(f"{prefix}: square is a 2D target")
                return None
            return synth.square_target(float(raw.get("height", 1.0)))
        if kind == "csv":
            path = Path(raw.get("path", ""))
            if not path.is_absolute():
                path = base_dir / path
            if not path.is_file():
                out.append(f"{prefix}.path: file not found: {path}")
                return None
            target = synth.load_target_csv(path)
            expected = synth.TargetPattern1D if dims == 1 else synth.TargetPattern2D
            if not isinstance(target, expected):
                out.append(f"{prefix}.path: not a {dims}D sample file")
                return None
            return target
    except (ValueError, OSError) as exc:
        out.append(f"{prefix}: {exc}")
        return None
    out.append(f"{prefix}.kind: expected trench, square, or csv, got {kind!r}")
    return None


def _check_optimizer_block(data, out):
    block = data.get("optimizer", {})
    if not isinstance(block, dict):
        out.append("optimizer: must be an object")
        return
    pop = block.get("population_size")
    if pop is not None and (not isinstance(pop, int) or pop < 4):
        out.append(f"optimizer.population_size: must be an integer >= 4, got {pop!r}")
    gens = block.get("generations")
    if gens is not None and (not isinstance(gens, int) or gens < 1):
        out.append(f"optimizer.generations: must be an integer >= 1, got {gens!r}")
    mut = block.get("mutation_factor")
    if mut is not None and not 0.0 < float(mut) < 2.0:
        out.append(f"optimizer.mutation_factor: must lie in (0, 2), got {mut!r}")
    cross = block.get("crossover_rate")
    if cross is not None and not 0.0 <= float(cross) <= 1.0:
        out.append(f"optimizer.crossover_rate: must lie in [0, 1], got {cross!r}")
    strategy = block.get("strategy")
    if strategy is not None and strategy not in STRATEGIES:
        out.append(f"optimizer.strategy: expected one of {STRATEGIES}, got {strategy!r}")
    dark = block.get("dark_weight")
    if dark is not None and float(dark) < 1.0:
        out.append(f"optimizer.dark_weight: must be >= 1, got {dark!r}")


def _check_phase_list(data, key, count, out):
    phases = data.get(key)
    if phases is None:
        return
    if not isinstance(phases, list) or len(phases) != count:
        out.append(f"{key}: expected a list of {count} phases")
        return
    if not all(isinstance(p, (int, float)) and math.isfinite(p) for p in phases):
        out.append(f"{key}: phases must be finite numbers")


def validate_job(data: dict, base_dir: Path) -> list:
    """Return all schema violations of a job dict (empty list means valid)."""
    out = []
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        out.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    command = data.get("command")
    if command not in COMMANDS:
        out.append(f"command: expected one of {COMMANDS}, got {command!r}")
        return out
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0 or seed >= 2**64:
        out.append(f"seed: must be an unsigned 64-bit integer, got {seed!r}")
    output = data.get("output", {})
    if not isinstance(output, dict) or any(
        not isinstance(v, str) for v in output.values()
    ):
        out.append("output: must be an object mapping artifact names to file names")
    exposure = data.get("exposure_time")
    if exposure is not None and not (
        isinstance(exposure, (int, float)) and exposure > 0
    ):
        out.append(f"exposure_time: must be positive, got {exposure!r}")

    grid = data.get("grid", {})
    if not isinstance(grid, dict):
        out.append("grid: must be an object")
        grid = {}

    if command == "eval-1d":
        state = _check_state(data, base_dir, ("fixed-n-1d", "fixed-m"), out)
        if state is not None:
            floor = 4 * state_max_photons(state) + 1
            _check_grid_points(grid.get("points", 1024), floor, out, "grid.points")
    elif command == "eval-2d":
        state = _check_state(data, base_dir, ("fixed-n-2d",), out)
        if state is not None:
            floor = 4 * state_max_photons(state) + 1
            _check_grid_points(
                grid.get("points_phi", 256), floor, out, "grid.points_phi"
            )
            _check_grid_points(
                grid.get("points_chi", 256), floor, out, "grid.points_chi"
            )
    elif command == "classical":
        block = data.get("classical")
        if not isinstance(block, dict):
            out.append("classical: required block missing")
        else:
            wavelength = block.get("wavelength")
            if not (isinstance(wavelength, (int, float)) and wavelength > 0):
                out.append(f"classical.wavelength: must be positive, got {wavelength!r}")
            theta = block.get("theta", math.pi / 2)
            if not (isinstance(theta, (int, float)) and 0 < theta <= math.pi / 2):
                out.append(f"classical.theta: must lie in (0, pi/2], got {theta!r}")
            _check_grid_points(block.get("points", 512), 2, out, "classical.points")
            span = block.get("span")
            if span is not None and (
                not isinstance(span, list)
                or len(span) != 2
                or not span[0] < span[1]
            ):
                out.append("classical.span: expected [x_start, x_end] with start < end")
    elif command == "fit-fourier":
        _check_target(data, base_dir, 1, out)
        block = data.get("fourier", {})
        n_max = block.get("n_max")
        if not isinstance(n_max, int) or n_max < 0:
            out.append(f"fourier.n_max: must be an integer >= 0, got {n_max!r}")
        else:
            points = block.get("points", max(1024, 4 * n_max + 1))
            if not isinstance(points, int) or points <= 2 * n_max:
                out.append(
                    f"fourier.points: must be an integer > {2 * n_max}, got {points!r}"
                )
        epsilon = data.get("epsilon")
        if epsilon is not None and not (
            isinstance(epsilon, (int, float)) and epsilon > 0
        ):
            out.append(f"epsilon: must be positive, got {epsilon!r}")
    elif command == "fit-superposition-1d":
        photons = data.get("photons")
        if not isinstance(photons, int) or photons < 1:
            out.append(f"photons: must be an integer >= 1, got {photons!r}")
        else:
            _check_grid_points(
                grid.get("points", 1024), 4 * photons + 1, out, "grid.points"
            )
            _check_phase_list(data, "phases", photons // 2 + 1, out)
        _check_target(data, base_dir, 1, out)
        _check_optimizer_block(data, out)
    elif command == "fit-superposition-2d":
        photons = data.get("photons")
        if not isinstance(photons, int) or photons < 1:
            out.append(f"photons: must be an integer >= 1, got {photons!r}")
        else:
            floor = 4 * photons + 1
            _check_grid_points(grid.get("points_phi", 64), floor, out, "grid.points_phi")
            _check_grid_points(grid.get("points_chi", 64), floor, out, "grid.points_chi")
            _check_phase_list(data, "phases_x", photons // 2 + 1, out)
            _check_phase_list(data, "phases_y", photons // 2 + 1, out)
        _check_target(data, base_dir, 2, out)
        _check_optimizer_block(data, out)
    elif command == "verify-oracle":
        block = data.get("oracle", {})
        if not isinstance(block, dict):
            out.append("oracle: must be an object")
            block = {}
        for key, default, cap in (
            ("max_photons_1d", 8, 12),
            ("max_photons_2d", 6, 8),
        ):
            value = block.get(key, default)
            if not isinstance(value, int) or not 1 <= value <= cap:
                out.append(f"oracle.{key}: must be an integer in [1, {cap}], got {value!r}")
        draws = block.get("draws", 20)
        if not isinstance(draws, int) or draws < 1:
            out.append(f"oracle.draws: must be an integer >= 1, got {draws!r}")
    return out


def parse_state(job: JobSpec):
    return st.state_from_dict(job.data["state"])


def parse_target(job: JobSpec, dims: int):
    out = []
    target = _check_target(job.data, job.base_dir, dims, out)
    if out or target is None:
        raise JobValidationError(out or ["target: cannot parse"])
    return target
