"""Value model for the entangled-state families used by the rate kernels.

Two elementary families describe how a fixed photon budget is split across
counter-propagating beams:

- ``ProtoState1D``: two beams carrying ``n_photons`` photons split
  ``(n - m, m)`` between them, plus the branch with the split reversed,
  carrying a relative phase.
- ``ProtoState2D``: four beams arranged as an x pair and a y pair; each
  branch puts all photons in one pair, again with reversed-split partners
  and per-axis relative phases.

Superpositions come in two flavours: fixed total photon number (branches
interfere coherently) and fixed minority count across different photon
numbers (branches do not interfere).  All types are immutable values; the
``validate`` function reports every violated invariant instead of raising.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

TWO_PI = 2.0 * math.pi


def wrap_phase(x: float) -> float:
    """Reduce an angle into [0, 2*pi)."""
    x = float(x) % TWO_PI
    # x % TWO_PI can return TWO_PI itself for inputs just below zero
    return 0.0 if x >= TWO_PI else x


@dataclass(frozen=True)
class ProtoState1D:
    """Two-beam entangled state |n-m, m> + e^{i phase} (reversed split)."""

    n_photons: int
    minority: int
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phase", wrap_phase(self.phase))


@dataclass(frozen=True)
class ProtoState2D:
    """Four-beam state: x-pair branches with split index ``minority_x`` and
    y-pair branches with split index ``minority_y``."""

    n_photons: int
    minority_x: int
    minority_y: int
    phase_x: float = 0.0
    phase_y: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phase_x", wrap_phase(self.phase_x))
        object.__setattr__(self, "phase_y", wrap_phase(self.phase_y))


ProtoState = Union[ProtoState1D, ProtoState2D]


@dataclass(frozen=True)
class SuperpositionFixedN:
    """Complex-weighted combination of proto states sharing one photon number.

    ``terms`` is a sequence of ``(proto, amplitude)`` pairs.  All protos must
    be the same dimensionality (all 1D or all 2D) and carry ``n_photons``.
    """

    n_photons: int
    terms: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((p, complex(a)) for p, a in self.terms)
        )

    @property
    def is_2d(self) -> bool:
        return bool(self.terms) and isinstance(self.terms[0][0], ProtoState2D)


@dataclass(frozen=True)
class FixedMTerm:
    """One branch of a fixed-minority superposition."""

    n_photons: int
    amplitude: complex
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "phase", wrap_phase(self.phase))


@dataclass(frozen=True)
class SuperpositionFixedM:
    """Combination of proto states with distinct photon numbers and a common
    minority index.  Branches with different photon numbers never interfere."""

    minority: int
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


State = Union[ProtoState1D, ProtoState2D, SuperpositionFixedN, SuperpositionFixedM]

NORM_TOLERANCE = 1e-10


def noon_state(n_photons: int) -> SuperpositionFixedN:
    """The maximally path-entangled state as a one-term superposition."""
    return SuperpositionFixedN(n_photons, ((ProtoState1D(n_photons, 0, 0.0), 1.0),))


def _validate_proto_1d(p: ProtoState1D, prefix: str = "") -> list:
    out = []
    if p.n_photons < 1:
        out.append(f"{prefix}n_photons: must be >= 1, got {p.n_photons}")
    if not 0 <= p.minority <= p.n_photons // 2:
        out.append(
            f"{prefix}minority: must lie in [0, n_photons // 2] = "
            f"[0, {p.n_photons // 2}], got {p.minority}"
        )
    if not math.isfinite(p.phase):
        out.append(f"{prefix}phase: must be finite")
    return out


def _validate_proto_2d(p: ProtoState2D, prefix: str = "") -> list:
    out = []
    if p.n_photons < 1:
        out.append(f"{prefix}n_photons: must be >= 1, got {p.n_photons}")
    half = p.n_photons // 2
    if not 0 <= p.minority_x <= half:
        out.append(
            f"{prefix}minority_x: must lie in [0, {half}], got {p.minority_x}"
        )
    if not 0 <= p.minority_y <= half:
        out.append(
            f"{prefix}minority_y: must lie in [0, {half}], got {p.minority_y}"
        )
    for name in ("phase_x", "phase_y"):
        if not math.isfinite(getattr(p, name)):
            out.append(f"{prefix}{name}: must be finite")
    return out


def _validate_fixed_n(s: SuperpositionFixedN) -> list:
    out = []
    if not s.terms:
        return ["terms: must not be empty"]
    kinds = {type(p) for p, _ in s.terms}
    if len(kinds) > 1:
        out.append("terms: mixed 1D and 2D proto states")
        return out
    seen = set()
    total = 0.0
    for i, (p, a) in enumerate(s.terms):
        prefix = f"terms[{i}]."
        if isinstance(p, ProtoState1D):
            out.extend(_validate_proto_1d(p, prefix))
            key = p.minority
        elif isinstance(p, ProtoState2D):
            out.extend(_validate_proto_2d(p, prefix))
            key = (p.minority_x, p.minority_y)
        else:
            out.append(f"{prefix}state: unsupported type {type(p).__name__}")
            continue
        if p.n_photons != s.n_photons:
            out.append(
                f"{prefix}n_photons: term has {p.n_photons}, superposition "
                f"declares {s.n_photons}"
            )
        if key in seen:
            out.append(f"{prefix}: duplicate distribution index {key}")
        seen.add(key)
        total += abs(a) ** 2
    if abs(total - 1.0) > NORM_TOLERANCE:
        out.append(
            f"terms: squared amplitudes must sum to 1 within {NORM_TOLERANCE:g}, "
            f"got {total!r}"
        )
    return out


def _validate_fixed_m(s: SuperpositionFixedM) -> list:
    out = []
    if s.minority < 0:
        out.append(f"minority: must be >= 0, got {s.minority}")
    if not s.terms:
        return out + ["terms: must not be empty"]
    seen = set()
    total = 0.0
    for i, t in enumerate(s.terms):
        prefix = f"terms[{i}]."
        if t.n_photons < 1:
            out.append(f"{prefix}n_photons: must be >= 1, got {t.n_photons}")
        elif s.minority > t.n_photons // 2:
            out.append(
                f"{prefix}n_photons: minority {s.minority} exceeds "
                f"n_photons // 2 = {t.n_photons // 2}"
            )
        if t.n_photons in seen:
            out.append(f"{prefix}n_photons: duplicate photon number {t.n_photons}")
        seen.add(t.n_photons)
        total += abs(t.amplitude) ** 2
    if abs(total - 1.0) > NORM_TOLERANCE:
        out.append(
            f"terms: squared amplitudes must sum to 1 within {NORM_TOLERANCE:g}, "
            f"got {total!r}"
        )
    return out


def validate(state: State) -> list:
    """Return every violated invariant of ``state`` (empty list means valid).

    Violations carry the offending field path; the state is never mutated.
    """
    if isinstance(state, ProtoState1D):
        return _validate_proto_1d(state)
    if isinstance(state, ProtoState2D):
        return _validate_proto_2d(state)
    if isinstance(state, SuperpositionFixedN):
        return _validate_fixed_n(state)
    if isinstance(state, SuperpositionFixedM):
        return _validate_fixed_m(state)
    raise TypeError(f"not a state type: {type(state).__name__}")


def require_valid(state: State) -> None:
    """Raise ``StateValidationError`` if ``state`` violates any invariant."""
    from .errors import StateValidationError

    violations = validate(state)
    if violations:
        raise StateValidationError(violations)


def derived_cross_weights(amplitude, amplitude_prime):
    """Polar form (r, xi) of conj(amplitude) * amplitude_prime.

    ``r`` is non-negative and ``xi`` lies in [0, 2*pi); for equal arguments
    the product is real non-negative, so xi is exactly 0.
    """
    product = complex(amplitude).conjugate() * complex(amplitude_prime)
    r = abs(product)
    xi = wrap_phase(cmath.phase(product)) if r > 0.0 else 0.0
    return r, xi


# ---------------------------------------------------------------------------
# Serialization: plain dicts with complex numbers stored as [re, im] pairs
# and phases as radians, suitable for embedding in JSON job files.
# ---------------------------------------------------------------------------


def _amp_to_pair(a: complex) -> list:
    return [float(a.real), float(a.imag)]


def _amp_from_pair(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def state_to_dict(state: State) -> dict:
    """Serialize any state value to a plain-JSON-compatible dict."""
    if isinstance(state, ProtoState1D):
        return {
            "family": "proto-1d",
            "n_photons": state.n_photons,
            "minority": state.minority,
            "phase": state.phase,
        }
    if isinstance(state, ProtoState2D):
        return {
            "family": "proto-2d",
            "n_photons": state.n_photons,
            "minority_x": state.minority_x,
            "minority_y": state.minority_y,
            "phase_x": state.phase_x,
            "phase_y": state.phase_y,
        }
    if isinstance(state, SuperpositionFixedN):
        terms = []
        for p, a in state.terms:
            entry = state_to_dict(p)
            entry.pop("family")
            entry.pop("n_photons")
            entry["amplitude"] = _amp_to_pair(a)
            terms.append(entry)
        family = "fixed-n-2d" if state.is_2d else "fixed-n-1d"
        return {"family": family, "n_photons": state.n_photons, "terms": terms}
    if isinstance(state, SuperpositionFixedM):
        return {
            "family": "fixed-m",
            "minority": state.minority,
            "terms": [
                {
                    "n_photons": t.n_photons,
                    "amplitude": _amp_to_pair(t.amplitude),
                    "phase": t.phase,
                }
                for t in state.terms
            ],
        }
    raise TypeError(f"not a state type: {type(state).__name__}")


def state_from_dict(data: dict) -> State:
    """Parse a state dict produced by :func:`state_to_dict`.

    Also accepts the shorthand ``{"family": "noon", "n_photons": N}``.
    """
    family = data.get("family")
    if family == "noon":
        return noon_state(int(data["n_photons"]))
    if family == "proto-1d":
        return ProtoState1D(
            int(data["n_photons"]), int(data["minority"]), float(data.get("phase", 0.0))
        )
    if family == "proto-2d":
        return ProtoState2D(
            int(data["n_photons"]),
            int(data["minority_x"]),
            int(data["minority_y"]),
            float(data.get("phase_x", 0.0)),
            float(data.get("phase_y", 0.0)),
        )
    if family == "fixed-n-1d":
        n = int(data["n_photons"])
        terms = tuple(
            (
                ProtoState1D(n, int(t["minority"]), float(t.get("phase", 0.0))),
                _amp_from_pair(t["amplitude"]),
            )
            for t in data["terms"]
        )
        return SuperpositionFixedN(n, terms)
    if family == "fixed-n-2d":
        n = int(data["n_photons"])
        terms = tuple(
            (
                ProtoState2D(
                    n,
                    int(t["minority_x"]),
                    int(t["minority_y"]),
                    float(t.get("phase_x", 0.0)),
                    float(t.get("phase_y", 0.0)),
                ),
                _amp_from_pair(t["amplitude"]),
            )
            for t in data["terms"]
        )
        return SuperpositionFixedN(n, terms)
    if family == "fixed-m":
        terms = tuple(
            FixedMTerm(
                int(t["n_photons"]),
                _amp_from_pair(t["amplitude"]),
                float(t.get("phase", 0.0)),
            )
            for t in data["terms"]
        )
        return SuperpositionFixedM(int(data["minority"]), terms)
    raise ValueError(f"unknown state family: {family!r}")
