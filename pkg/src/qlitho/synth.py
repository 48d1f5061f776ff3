"""Target patterns, Fourier-series synthesis, distance metrics, the classical
interference baseline, and the least-squares objectives the optimizer fits.

Quadrature convention: all integrals over a period use uniform nodes with
equal weights (the trapezoid rule with periodic endpoint identification).
Nodes sit at cell midpoints by default so the built-in step targets never
place a sample exactly on a jump, which would otherwise cost an order of
accuracy.  For smooth integrands the rule is spectrally accurate and its
value is insensitive to the grid origin.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericError
from .deposition import fixed_n_superposition_rate, superposition_2d_rate
from .states import SuperpositionFixedN, wrap_phase

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Periodic quadrature
# ---------------------------------------------------------------------------


def periodic_grid(points: int, offset: float = 0.5) -> np.ndarray:
    """Uniform nodes (i + offset) * 2*pi / points covering one period."""
    if points < 1:
        raise ValueError(f"points must be >= 1, got {points}")
    return (np.arange(points) + offset) * (TWO_PI / points)


def periodic_integral(values) -> float:
    """Integral over one period of values sampled on a uniform grid."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericError("non-finite values in quadrature")
    return float(values.sum() * (TWO_PI / values.shape[0]))


def count_periodic_maxima(values) -> int:
    """Number of strict local maxima of a periodically sampled curve."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise ValueError("need at least 3 samples to count maxima")
    return int(np.count_nonzero((v > np.roll(v, 1)) & (v > np.roll(v, -1))))


def periodic_integral_2d(values) -> float:
    """Integral over one period in each direction of a (Px, Py) sample grid."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("expected a 2D sample grid")
    if not np.all(np.isfinite(values)):
        raise NumericError("non-finite values in quadrature")
    cell = (TWO_PI / values.shape[0]) * (TWO_PI / values.shape[1])
    return float(values.sum() * cell)


# ---------------------------------------------------------------------------
# Classical two-beam baseline
# ---------------------------------------------------------------------------


def classical_intensity(x, wavelength: float, theta: float):
    """Two-plane-wave interference intensity cos^2(k x sin(theta)) along the
    substrate, normalized to 1 at x = 0; k = 2*pi/wavelength."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if not 0 < theta <= math.pi / 2:
        raise ValueError(f"theta must lie in (0, pi/2], got {theta}")
    k = TWO_PI / wavelength
    out = np.cos(k * np.asarray(x, dtype=float) * math.sin(theta)) ** 2
    return float(out) if np.ndim(x) == 0 else out


def rayleigh_resolution(wavelength: float, theta: float) -> float:
    """Minimal resolvable feature wavelength / (4 sin(theta)): the distance
    from an intensity maximum to the adjacent minimum."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    s = math.sin(theta)
    if s == 0.0:
        raise ValueError("theta = 0 leaves the fringe spacing undefined")
    if not 0 < theta <= math.pi / 2:
        raise ValueError(f"theta must lie in (0, pi/2], got {theta}")
    return wavelength / (4.0 * s)


def phi_from_position(x, wavelength: float):
    """Substrate phase for a displacement x: phi = k x / 2."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return (math.pi / wavelength) * np.asarray(x, dtype=float)


def position_from_phi(phi, wavelength: float):
    """Inverse of :func:`phi_from_position`."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return (wavelength / math.pi) * np.asarray(phi, dtype=float)


# ---------------------------------------------------------------------------
# Target patterns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TargetPattern1D:
    """Bounded target exposure profile on one period of the substrate phase."""

    evaluator: Callable
    descriptor: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TargetPattern2D:
    """Bounded target exposure profile on the phase torus (phi, chi)."""

    evaluator: Callable
    descriptor: dict = field(default_factory=dict)


def trench(phi, height: float):
    """Step profile: ``height`` on the half-open window [-pi/2, pi/2) mod
    2*pi, zero elsewhere.  The half-open convention pins the measure-zero
    boundary values; no integral can depend on it."""
    if height <= 0:
        raise ValueError(f"height must be positive, got {height}")
    wrapped = np.mod(np.asarray(phi, dtype=float) + math.pi, TWO_PI) - math.pi
    out = np.where((wrapped >= -math.pi / 2) & (wrapped < math.pi / 2), height, 0.0)
    return float(out) if np.ndim(phi) == 0 else out


def trench_target(height: float = 1.0) -> TargetPattern1D:
    return TargetPattern1D(
        evaluator=lambda phi: trench(phi, height),
        descriptor={"kind": "trench", "height": height},
    )


def square_region(phi, chi, height: float):
    """Sharp-edged square: ``height`` where both coordinates fall in the
    trench window, zero elsewhere."""
    if height <= 0:
        raise ValueError(f"height must be positive, got {height}")
    wp = np.mod(np.asarray(phi, dtype=float) + math.pi, TWO_PI) - math.pi
    wc = np.mod(np.asarray(chi, dtype=float) + math.pi, TWO_PI) - math.pi
    inside = (
        (wp >= -math.pi / 2)
        & (wp < math.pi / 2)
        & (wc >= -math.pi / 2)
        & (wc < math.pi / 2)
    )
    out = np.where(inside, height, 0.0)
    return float(out) if np.ndim(phi) == 0 and np.ndim(chi) == 0 else out


def square_target(height: float = 1.0) -> TargetPattern2D:
    return TargetPattern2D(
        evaluator=lambda phi, chi: square_region(phi, chi, height),
        descriptor={"kind": "square", "height": height},
    )


def from_samples_1d(phi_samples, values, descriptor: Optional[dict] = None) -> TargetPattern1D:
    """Target built from sampled values with periodic linear interpolation."""
    phi_samples = np.mod(np.asarray(phi_samples, dtype=float), TWO_PI)
    values = np.asarray(values, dtype=float)
    order = np.argsort(phi_samples)
    xs, ys = phi_samples[order], values[order]

    def evaluator(phi):
        return np.interp(np.asarray(phi, dtype=float), xs, ys, period=TWO_PI)

    return TargetPattern1D(evaluator, descriptor or {"kind": "samples-1d"})


def from_samples_2d(
    phi_samples, chi_samples, values, descriptor: Optional[dict] = None
) -> TargetPattern2D:
    """Target from a full product grid of samples, bilinear and periodic."""
    xs = np.asarray(phi_samples, dtype=float)
    ys = np.asarray(chi_samples, dtype=float)
    grid = np.asarray(values, dtype=float)
    if grid.shape != (xs.size, ys.size):
        raise ValueError(
            f"value grid shape {grid.shape} does not match "
            f"({xs.size}, {ys.size}) samples"
        )

    def interp_axis(coords, samples):
        # fractional index into a uniform-by-construction periodic axis
        idx = np.interp(
            np.mod(coords, TWO_PI), samples, np.arange(samples.size), period=TWO_PI
        )
        lo = np.floor(idx).astype(int) % samples.size
        hi = (lo + 1) % samples.size
        return lo, hi, idx - np.floor(idx)

    def evaluator(phi, chi):
        phi, chi = np.broadcast_arrays(
            np.asarray(phi, dtype=float), np.asarray(chi, dtype=float)
        )
        i0, i1, fx = interp_axis(phi, xs)
        j0, j1, fy = interp_axis(chi, ys)
        return (
            grid[i0, j0] * (1 - fx) * (1 - fy)
            + grid[i1, j0] * fx * (1 - fy)
            + grid[i0, j1] * (1 - fx) * fy
            + grid[i1, j1] * fx * fy
        )

    return TargetPattern2D(evaluator, descriptor or {"kind": "samples-2d"})


def load_target_csv(path):
    """Load a sampled target: columns ``phi,value`` (1D) or ``phi,chi,value``
    (2D on a full product grid).  A non-numeric first row is treated as a
    header."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                if rows:
                    raise
                continue  # header row
    if not rows:
        raise ValueError(f"no data rows in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged rows in {path}")
    data = np.asarray(rows, dtype=float)
    if width == 2:
        return from_samples_1d(data[:, 0], data[:, 1], {"kind": "csv", "path": str(path)})
    if width == 3:
        phis = np.unique(data[:, 0])
        chis = np.unique(data[:, 1])
        if phis.size * chis.size != data.shape[0]:
            raise ValueError(f"{path}: 2D samples must cover a full product grid")
        grid = np.full((phis.size, chis.size), np.nan)
        pi_idx = np.searchsorted(phis, data[:, 0])
        ci_idx = np.searchsorted(chis, data[:, 1])
        grid[pi_idx, ci_idx] = data[:, 2]
        if np.any(np.isnan(grid)):
            raise ValueError(f"{path}: duplicate or missing grid points")
        return from_samples_2d(phis, chis, grid, {"kind": "csv", "path": str(path)})
    raise ValueError(f"{path}: expected 2 or 3 columns, got {width}")


# ---------------------------------------------------------------------------
# Fourier analysis and the incoherent exposure program
# ---------------------------------------------------------------------------


def fourier_coefficients(target: TargetPattern1D, n_max: int, points: int = 1024):
    """Cosine/sine coefficients of the target up to harmonic ``n_max``, in
    the reconstruction convention

        F(phi) ~ a[0] + sum_{n>=1} a[n] cos(n phi) + b[n] sin(n phi).
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if points <= 2 * n_max:
        raise ValueError(
            f"points = {points} cannot resolve harmonics up to {n_max}"
        )
    grid = periodic_grid(points)
    f = np.asarray(target.evaluator(grid), dtype=float)
    if not np.all(np.isfinite(f)):
        raise NumericError("target evaluated to non-finite values")
    a = np.zeros(n_max + 1)
    b = np.zeros(n_max + 1)
    a[0] = f.mean()
    for n in range(1, n_max + 1):
        a[n] = 2.0 * (f * np.cos(n * grid)).mean()
        b[n] = 2.0 * (f * np.sin(n * grid)).mean()
    return a, b


def fourier_coefficients_2d(target: TargetPattern2D, n_max: int, points: int = 256):
    """2D coefficient matrices (cos*cos, cos*sin, sin*cos, sin*sin) of the
    target up to harmonic ``n_max`` on each axis, reconstruction convention."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if points <= 2 * n_max:
        raise ValueError(f"points = {points} cannot resolve harmonics up to {n_max}")
    g = periodic_grid(points)
    f = np.asarray(target.evaluator(g[:, None], g[None, :]), dtype=float)
    if not np.all(np.isfinite(f)):
        raise NumericError("target evaluated to non-finite values")
    shape = (n_max + 1, n_max + 1)
    out = [np.zeros(shape) for _ in range(4)]
    cos = [np.cos(p * g) for p in range(n_max + 1)]
    sin = [np.sin(p * g) for p in range(n_max + 1)]
    for p in range(n_max + 1):
        wp = 1.0 if p == 0 else 2.0
        for q in range(n_max + 1):
            wq = 1.0 if q == 0 else 2.0
            w = wp * wq
            out[0][p, q] = w * (f * np.outer(cos[p], cos[q])).mean()
            out[1][p, q] = w * (f * np.outer(cos[p], sin[q])).mean()
            out[2][p, q] = w * (f * np.outer(sin[p], cos[q])).mean()
            out[3][p, q] = w * (f * np.outer(sin[p], sin[q])).mean()
    return tuple(out)


@dataclass(frozen=True)
class FourierProgram:
    """Incoherent exposure recipe: per-harmonic fringe weights and phases.

    Each term (n, c_n, theta_n) contributes c_n (1 + cos(n phi + theta_n))
    to the deposition rate; weights are non-negative by construction, which
    is what makes the constant background unavoidable.
    """

    terms: tuple
    exposure_time: float

    def __post_init__(self):
        object.__setattr__(
            self,
            "terms",
            tuple((int(n), float(c), wrap_phase(th)) for n, c, th in self.terms),
        )
        if self.exposure_time <= 0:
            raise ValueError(
                f"exposure_time must be positive, got {self.exposure_time}"
            )
        harmonics = [n for n, _, _ in self.terms]
        if any(n < 0 for n in harmonics):
            raise ValueError("harmonics must be non-negative")
        if len(set(harmonics)) != len(harmonics):
            raise ValueError("harmonics must be distinct")
        if any(c < 0 for _, c, _ in self.terms):
            raise ValueError("fringe weights must be non-negative")


# Coefficients smaller than this (relative to the largest) are treated as
# exact zeros so symmetric targets get phases that are exact multiples of pi.
COEFFICIENT_SNAP = 1e-12


def to_fourier_program(a, b, exposure_time: float) -> FourierProgram:
    """Convert cosine/sine coefficients into fringe weights and phases with

        c_n cos(n phi + theta_n) = a_n cos(n phi) + b_n sin(n phi)

    holding identically, i.e. c_n = hypot(a_n, b_n) and theta_n =
    atan2(-b_n, a_n); a negative cosine coefficient becomes a pi phase shift.
    Only harmonics n >= 1 are programmable fringes; the target's constant
    component is not emitted as a term because the method's uniform
    background already delivers (at least) a constant.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("coefficient arrays must be 1D and equally long")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("coefficients must be finite")
    scale = max(np.abs(a[1:]).max(initial=0.0), np.abs(b[1:]).max(initial=0.0))
    snap = COEFFICIENT_SNAP * scale
    terms = []
    for n in range(1, a.shape[0]):
        an = 0.0 if abs(a[n]) <= snap else a[n]
        bn = 0.0 if abs(b[n]) <= snap else b[n]
        c = math.hypot(an, bn)
        if c == 0.0:
            continue
        terms.append((n, c, wrap_phase(math.atan2(-bn, an))))
    return FourierProgram(tuple(terms), exposure_time)


def program_exposure(program: FourierProgram, phi):
    """Exposure pattern t * sum_n c_n (1 + cos(n phi + theta_n)): the
    constant part is the penalty background, the rest a true Fourier series."""
    phi_arr = np.asarray(phi, dtype=float)
    out = np.zeros_like(phi_arr)
    for n, c, theta in program.terms:
        out = out + c * (1.0 + np.cos(n * phi_arr + theta))
    out = program.exposure_time * out
    return float(out) if np.ndim(phi) == 0 else out


def penalty_rate(program: FourierProgram) -> float:
    """The unavoidable uniform background rate: the sum of fringe weights."""
    return float(sum(c for _, c, _ in program.terms))


# ---------------------------------------------------------------------------
# Distance and approximation criteria
# ---------------------------------------------------------------------------


def _truncated_series(a, b, grid):
    out = np.full_like(grid, a[0])
    for n in range(1, len(a)):
        out = out + a[n] * np.cos(n * grid) + b[n] * np.sin(n * grid)
    return out


def truncation_distance(target: TargetPattern1D, n_max: int, points: int = 1024) -> float:
    """Squared L2 distance between the target and its Fourier truncation at
    ``n_max``; zero (up to quadrature) for band-limited targets."""
    a, b = fourier_coefficients(target, n_max, points)
    grid = periodic_grid(points)
    f = np.asarray(target.evaluator(grid), dtype=float)
    return periodic_integral((f - _truncated_series(a, b, grid)) ** 2)


@dataclass(frozen=True)
class ApproximationReport:
    ok: bool
    residual: float
    truncation_distance: float
    epsilon: float
    degenerate: bool
    note: str = ""


def approximation_ok(
    target: TargetPattern1D,
    achieved,
    epsilon: float,
    n_max: int,
    points: int = 1024,
) -> ApproximationReport:
    """Check the approximation criterion: the achieved pattern is accepted
    when its squared L2 residual is at most epsilon times the target's own
    truncation distance at harmonic ``n_max``.

    ``achieved`` is a callable of phi or an array sampled on the same grid.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    grid = periodic_grid(points)
    f = np.asarray(target.evaluator(grid), dtype=float)
    p = np.asarray(achieved(grid) if callable(achieved) else achieved, dtype=float)
    if p.shape != grid.shape:
        raise ValueError("achieved pattern does not match the quadrature grid")
    residual = periodic_integral((f - p) ** 2)
    d_n = truncation_distance(target, n_max, points)
    floor = 1e-14 * max(1.0, periodic_integral(f**2))
    degenerate = d_n <= floor < residual
    note = "band-limited target, criterion degenerate" if degenerate else ""
    return ApproximationReport(
        ok=bool(residual <= epsilon * d_n),
        residual=residual,
        truncation_distance=d_n,
        epsilon=epsilon,
        degenerate=degenerate,
        note=note,
    )


# ---------------------------------------------------------------------------
# Fit objectives
# ---------------------------------------------------------------------------


def objective_1d(
    state: SuperpositionFixedN,
    exposure_time: float,
    target: TargetPattern1D,
    points: int = 1024,
) -> float:
    """Squared L2 mismatch between the target and the state's exposure,
    integrated over one period on a uniform grid."""
    min_points = 4 * state.n_photons + 1
    if points < min_points:
        raise ValueError(
            f"points = {points} below the Nyquist floor {min_points} for "
            f"{state.n_photons} photons"
        )
    grid = periodic_grid(points)
    f = np.asarray(target.evaluator(grid), dtype=float)
    rate = fixed_n_superposition_rate(state, grid)
    return periodic_integral((f - exposure_time * rate) ** 2)


def objective_2d(
    state: SuperpositionFixedN,
    exposure_time: float,
    target: TargetPattern2D,
    points_phi: int = 256,
    points_chi: int = 256,
) -> float:
    """2D analogue of :func:`objective_1d` on a product grid."""
    min_points = 4 * state.n_photons + 1
    if points_phi < min_points or points_chi < min_points:
        raise ValueError(
            f"grid {points_phi} x {points_chi} below the Nyquist floor "
            f"{min_points} for {state.n_photons} photons"
        )
    gp = periodic_grid(points_phi)
    gc = periodic_grid(points_chi)
    f = np.asarray(target.evaluator(gp[:, None], gc[None, :]), dtype=float)
    rate = superposition_2d_rate(state, gp[:, None], gc[None, :])
    return periodic_integral_2d((f - exposure_time * rate) ** 2)
