"""Brute-force second-quantization engine.

States live in a sparse map from occupation tuples to complex amplitudes.
Deposition rates are evaluated directly from ladder-operator algebra, with
the fixed convention

    rate = <(e+)^N e^N> / N!,   e = (sum of mode operators) / sqrt(mode count)

so that closed-form kernels elsewhere in the package can be checked for
exact equality, not just proportionality.  Everything here is a pure
function of its inputs; ``FockVector`` instances are immutable.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Optional

from .errors import CutoffExceededError, StateValidationError
from .states import ProtoState1D, ProtoState2D, SuperpositionFixedM, SuperpositionFixedN
from .states import require_valid

# Amplitudes below this are dropped from the sparse map; far below any
# tolerance used in tests, so pruning is unobservable.
PRUNE_TOLERANCE = 1e-15


class FockVector:
    """Sparse multimode Fock-space vector.

    ``amplitudes`` maps occupation tuples (one non-negative integer per
    mode, each at most ``cutoff``) to complex amplitudes.
    """

    __slots__ = ("mode_count", "cutoff", "_amps")

    def __init__(self, mode_count: int, cutoff: int, amplitudes: Mapping):
        if mode_count < 1:
            raise ValueError(f"mode_count must be >= 1, got {mode_count}")
        if cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {cutoff}")
        amps = {}
        for occ, amp in amplitudes.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != mode_count:
                raise ValueError(
                    f"occupation {occ} has {len(occ)} modes, expected {mode_count}"
                )
            if any(n < 0 for n in occ):
                raise ValueError(f"negative occupation in {occ}")
            if any(n > cutoff for n in occ):
                raise ValueError(f"occupation {occ} exceeds cutoff {cutoff}")
            amp = complex(amp)
            if abs(amp) <= PRUNE_TOLERANCE:
                continue
            amps[occ] = amps.get(occ, 0.0) + amp
        self.mode_count = mode_count
        self.cutoff = cutoff
        self._amps = amps

    # -- plain vector algebra -------------------------------------------------

    def items(self):
        return self._amps.items()

    def amplitude(self, occupations) -> complex:
        return self._amps.get(tuple(occupations), 0.0 + 0.0j)

    def __len__(self):
        return len(self._amps)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._amps.values()))

    def inner(self, other: "FockVector") -> complex:
        """<self|other> (conjugate-linear in self)."""
        if other.mode_count != self.mode_count:
            raise ValueError("mode counts differ")
        return complex(
            sum(
                self._amps[occ].conjugate() * amp
                for occ, amp in other._amps.items()
                if occ in self._amps
            )
        )

    def normalized(self) -> "FockVector":
        n = self.norm()
        if n <= PRUNE_TOLERANCE:
            raise StateValidationError(f"cannot normalize: norm is {n!r}")
        return self * (1.0 / n)

    def __add__(self, other: "FockVector") -> "FockVector":
        if not isinstance(other, FockVector):
            return NotImplemented
        if other.mode_count != self.mode_count:
            raise ValueError("mode counts differ")
        amps = dict(self._amps)
        for occ, amp in other._amps.items():
            amps[occ] = amps.get(occ, 0.0) + amp
        return FockVector(self.mode_count, max(self.cutoff, other.cutoff), amps)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "FockVector":
        scalar = complex(scalar)
        return FockVector(
            self.mode_count,
            self.cutoff,
            {occ: amp * scalar for occ, amp in self._amps.items()},
        )

    __rmul__ = __mul__

    def isclose(self, other: "FockVector", tol: float = 1e-12) -> bool:
        keys = set(self._amps) | set(other._amps)
        return all(
            abs(self.amplitude(k) - other.amplitude(k)) <= tol for k in keys
        )

    def __repr__(self):
        body = " + ".join(
            f"({amp:.6g})|{','.join(map(str, occ))}>"
            for occ, amp in sorted(self._amps.items())
        )
        return f"FockVector({body or '0'})"


def vacuum(mode_count: int, cutoff: int) -> FockVector:
    return FockVector(mode_count, cutoff, {(0,) * mode_count: 1.0})


def basis_state(occupations: Iterable[int], cutoff: Optional[int] = None) -> FockVector:
    """Single-ket vector |occupations>; cutoff defaults to the total photon
    number so later ladder operations fail loudly instead of truncating."""
    occ = tuple(int(n) for n in occupations)
    if cutoff is None:
        cutoff = sum(occ)
    return FockVector(len(occ), cutoff, {occ: 1.0})


def zero_vector(mode_count: int, cutoff: int) -> FockVector:
    return FockVector(mode_count, cutoff, {})


# -- ladder operators ---------------------------------------------------------


def _check_mode(state: FockVector, mode: int) -> None:
    if not 0 <= mode < state.mode_count:
        raise ValueError(
            f"mode {mode} out of range for {state.mode_count}-mode vector"
        )


def annihilate(state: FockVector, mode: int) -> FockVector:
    """Lower the occupation of ``mode``: |..,n,..> -> sqrt(n) |..,n-1,..>."""
    _check_mode(state, mode)
    amps = {}
    for occ, amp in state.items():
        n = occ[mode]
        if n == 0:
            continue
        lowered = occ[:mode] + (n - 1,) + occ[mode + 1 :]
        amps[lowered] = amps.get(lowered, 0.0) + math.sqrt(n) * amp
    return FockVector(state.mode_count, state.cutoff, amps)


def create(state: FockVector, mode: int) -> FockVector:
    """Raise the occupation of ``mode``: |..,n,..> -> sqrt(n+1) |..,n+1,..>.

    Raising past the cutoff is an error naming the offending ket, never a
    silent truncation.
    """
    _check_mode(state, mode)
    amps = {}
    for occ, amp in state.items():
        n = occ[mode]
        if n + 1 > state.cutoff:
            raise CutoffExceededError(occ, mode, state.cutoff)
        raised = occ[:mode] + (n + 1,) + occ[mode + 1 :]
        amps[raised] = amps.get(raised, 0.0) + math.sqrt(n + 1) * amp
    return FockVector(state.mode_count, state.cutoff, amps)


def superposed_mode_annihilate(state: FockVector, modes) -> FockVector:
    """Apply the balanced superposed-mode operator (sum of annihilators over
    ``modes``) / sqrt(len(modes)) once."""
    modes = sorted(set(int(m) for m in modes))
    if not modes:
        raise ValueError("modes must be a non-empty set")
    for m in modes:
        _check_mode(state, m)
    scale = 1.0 / math.sqrt(len(modes))
    out = zero_vector(state.mode_count, state.cutoff)
    for m in modes:
        out = out + annihilate(state, m)
    return out * scale


# -- deposition-rate functionals ----------------------------------------------


def _e_power(state: FockVector, modes, order: int) -> FockVector:
    for _ in range(order):
        state = superposed_mode_annihilate(state, modes)
    return state


def deposition_expectation(state: FockVector, modes, order: int) -> float:
    """<(e+)^order e^order> / order! on a unit-norm state.

    Equals the squared norm of e^order |state| divided by order!, hence
    always real and non-negative.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    n = state.norm()
    if abs(n - 1.0) > 1e-12:
        raise StateValidationError(
            f"deposition_expectation requires a unit-norm state, got norm {n!r}"
        )
    lowered = _e_power(state, modes, order)
    return lowered.norm() ** 2 / math.factorial(order)


def deposition_matrix_element(bra: FockVector, ket: FockVector, modes, order: int) -> complex:
    """Bilinear form <bra|(e+)^order e^order|ket> / order! for arbitrary
    (not necessarily normalized) vectors."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    eb = _e_power(bra, modes, order)
    ek = _e_power(ket, modes, order)
    return eb.inner(ek) / math.factorial(order)


# -- proto-state builders -------------------------------------------------------


def build_proto_state(
    proto, phi: float, chi: Optional[float] = None, normalize: bool = True
) -> FockVector:
    """Assemble the two-branch (1D) or four-branch (2D) ket at substrate
    phases ``phi`` (and ``chi`` in 2D).

    With ``normalize=True`` (default) the result has unit norm; when the two
    branches coincide (n_photons == 2 * minority) their amplitudes are summed
    before normalizing.  ``normalize=False`` keeps the raw 1/sqrt(2) (1D) or
    1/2 (2D) branch weights, which is the convention the closed-form kernels
    are written in.
    """
    require_valid(proto)
    if isinstance(proto, ProtoState1D):
        n, m, theta = proto.n_photons, proto.minority, proto.phase
        w = 1.0 / math.sqrt(2.0)
        amps = {}
        for occ, amp in (
            ((n - m, m), w * _phase(m * phi)),
            ((m, n - m), w * _phase((n - m) * phi + theta)),
        ):
            amps[occ] = amps.get(occ, 0.0) + amp
        vec = FockVector(2, n, amps)
    elif isinstance(proto, ProtoState2D):
        if chi is None:
            raise ValueError("2D proto states need both phi and chi")
        n, m, k = proto.n_photons, proto.minority_x, proto.minority_y
        zx, zy = proto.phase_x, proto.phase_y
        amps = {}
        for occ, amp in (
            ((n - m, m, 0, 0), 0.5 * _phase(m * phi)),
            ((m, n - m, 0, 0), 0.5 * _phase((n - m) * phi + zx)),
            ((0, 0, n - k, k), 0.5 * _phase(k * chi)),
            ((0, 0, k, n - k), 0.5 * _phase((n - k) * chi + zy)),
        ):
            amps[occ] = amps.get(occ, 0.0) + amp
        vec = FockVector(4, n, amps)
    else:
        raise TypeError(f"not a proto state: {type(proto).__name__}")
    if normalize:
        norm = vec.norm()
        if norm <= 1e-12:
            raise StateValidationError(
                "degenerate branches cancel exactly; state cannot be normalized"
            )
        vec = vec * (1.0 / norm)
    return vec


def _phase(angle: float) -> complex:
    return complex(math.cos(angle), math.sin(angle))


def superposition_ket(state, phi: float, chi: Optional[float] = None) -> FockVector:
    """Assemble the full superposed ket using the raw branch-weight
    convention (each proto enters with its 1/sqrt(2) or 1/2 prefactor, no
    per-branch renormalization), matching the closed-form kernels."""
    require_valid(state)
    if isinstance(state, SuperpositionFixedN):
        parts = [
            amp * build_proto_state(p, phi, chi, normalize=False)
            for p, amp in state.terms
        ]
    elif isinstance(state, SuperpositionFixedM):
        cutoff = max(t.n_photons for t in state.terms)
        parts = []
        for t in state.terms:
            proto = ProtoState1D(t.n_photons, state.minority, t.phase)
            raw = build_proto_state(proto, phi, normalize=False)
            parts.append(
                t.amplitude
                * FockVector(2, cutoff, dict(raw.items()))
            )
    else:
        raise TypeError(f"not a superposition: {type(state).__name__}")
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out
