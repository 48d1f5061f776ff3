"""Closed-form deposition-rate kernels for all state families.

Every kernel carries its exact normalization prefactor (1/2^N for the
two-beam geometry, the matching 1/4^N-style factors for four beams), chosen
so the values equal the Fock-space oracle's ``<(e+)^N e^N>/N!`` exactly.

The workhorse is the per-branch coherent amplitude

    B_m(x) = sqrt(C(n, m)) * (exp(i m x) + exp(i ((n - m) x + phase)))

in terms of which the two-beam matrix element is conj(B_m) B_m' / 2^(n+1)
and a fixed-photon-number superposition deposits |sum_m a_m B_m|^2 / 2^(n+1),
which is manifestly real and non-negative.  All kernels accept scalars or
numpy arrays for the substrate phases and broadcast accordingly.
"""

from __future__ import annotations

import math

import numpy as np

from .states import (
    ProtoState1D,
    ProtoState2D,
    SuperpositionFixedM,
    SuperpositionFixedN,
    require_valid,
)

__all__ = [
    "noon_rate",
    "matrix_element_1d",
    "diagonal_rate_1d",
    "fixed_n_superposition_rate",
    "fixed_m_superposition_rate",
    "fixed_m_rate_by_order",
    "matrix_element_2d",
    "diagonal_rate_2d",
    "superposition_2d_rate",
]


def _check_index(n_photons: int, value: int, name: str) -> None:
    if n_photons < 1:
        raise ValueError(f"n_photons must be >= 1, got {n_photons}")
    if not 0 <= value <= n_photons // 2:
        raise ValueError(
            f"{name} must lie in [0, n_photons // 2] = [0, {n_photons // 2}], "
            f"got {value}"
        )


def _maybe_scalar(out, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return out[()].item()
    return out


def branch_amplitude(n_photons: int, minority: int, phase: float, x):
    """Coherent amplitude contributed by one proto-state branch pair."""
    x = np.asarray(x, dtype=float)
    root = math.sqrt(math.comb(n_photons, minority))
    return root * (
        np.exp(1j * minority * x) + np.exp(1j * ((n_photons - minority) * x + phase))
    )


def noon_rate(n_photons: int, phi):
    """Deposition rate of the maximally path-entangled state:
    (1 + cos(n * phi)) / 2^n, with period 2*pi/n."""
    if n_photons < 1:
        raise ValueError(f"n_photons must be >= 1, got {n_photons}")
    phi_arr = np.asarray(phi, dtype=float)
    out = (1.0 + np.cos(n_photons * phi_arr)) / 2.0**n_photons
    return _maybe_scalar(out, phi)


def matrix_element_1d(
    n_photons: int,
    minority: int,
    minority_prime: int,
    phase: float,
    phase_prime: float,
    phi,
):
    """Cross element between two two-beam proto states at the same photon
    number: conj(B_m) * B_m' / 2^(n+1).  Complex in general; for equal
    indices and phases it is real and equals :func:`diagonal_rate_1d`."""
    _check_index(n_photons, minority, "minority")
    _check_index(n_photons, minority_prime, "minority_prime")
    bra = branch_amplitude(n_photons, minority, phase, phi)
    ket = branch_amplitude(n_photons, minority_prime, phase_prime, phi)
    out = np.conj(bra) * ket / 2.0 ** (n_photons + 1)
    return _maybe_scalar(out, phi)


def diagonal_rate_1d(n_photons: int, minority: int, phase: float, phi):
    """Single-proto-state rate C(n, m) (1 + cos((n - 2m) phi + phase)) / 2^n.

    For n == 2m the cosine argument is constant, so the pattern is flat."""
    _check_index(n_photons, minority, "minority")
    phi_arr = np.asarray(phi, dtype=float)
    out = (
        math.comb(n_photons, minority)
        * (1.0 + np.cos((n_photons - 2 * minority) * phi_arr + phase))
        / 2.0**n_photons
    )
    return _maybe_scalar(out, phi)


def _fixed_n_terms_1d(state: SuperpositionFixedN):
    require_valid(state)
    if state.is_2d:
        raise ValueError("expected a 1D fixed-photon-number superposition")
    return state.terms


def fixed_n_superposition_rate(state: SuperpositionFixedN, phi):
    """Rate of a fixed-photon-number superposition of two-beam states.

    Equals the double sum of amplitudes against :func:`matrix_element_1d`,
    evaluated here as |sum_m a_m B_m|^2 / 2^(n+1) so the result is exactly
    real and non-negative.
    """
    terms = _fixed_n_terms_1d(state)
    total = 0.0j
    for proto, amp in terms:
        total = total + amp * branch_amplitude(
            proto.n_photons, proto.minority, proto.phase, phi
        )
    total = np.asarray(total)
    out = (total.real**2 + total.imag**2) / 2.0 ** (state.n_photons + 1)
    return _maybe_scalar(out, phi)


def fixed_m_rate_by_order(state: SuperpositionFixedM, phi) -> dict:
    """Per-moment-order breakdown of a fixed-minority superposition's
    exposure: order n contributes |a_n|^2 times its own diagonal rate.

    Branches with different photon numbers do not interfere, so the substrate
    response at each order is independent; the mapping keys are the orders.
    """
    require_valid(state)
    return {
        t.n_photons: abs(t.amplitude) ** 2
        * diagonal_rate_1d(t.n_photons, state.minority, t.phase, phi)
        for t in state.terms
    }


def fixed_m_superposition_rate(state: SuperpositionFixedM, phi):
    """Total deposition over all moment orders present in the superposition
    (a substrate responsive to every order up to the largest photon number)."""
    per_order = fixed_m_rate_by_order(state, phi)
    out = sum(per_order.values())
    return out


def matrix_element_2d(
    n_photons: int,
    minority_x: int,
    minority_y: int,
    minority_x_prime: int,
    minority_y_prime: int,
    phase_x: float,
    phase_y: float,
    phase_x_prime: float,
    phase_y_prime: float,
    phi,
    chi,
):
    """Cross element between two four-beam proto states:
    conj(B_m(phi) + B_k(chi)) * (B_m'(phi) + B_k'(chi)) / 4^(n+1).

    Derived from exact operator algebra with the balanced four-mode
    operator; agrees with the Fock oracle by construction.
    """
    _check_index(n_photons, minority_x, "minority_x")
    _check_index(n_photons, minority_y, "minority_y")
    _check_index(n_photons, minority_x_prime, "minority_x_prime")
    _check_index(n_photons, minority_y_prime, "minority_y_prime")
    bra = branch_amplitude(n_photons, minority_x, phase_x, phi) + branch_amplitude(
        n_photons, minority_y, phase_y, chi
    )
    ket = branch_amplitude(
        n_photons, minority_x_prime, phase_x_prime, phi
    ) + branch_amplitude(n_photons, minority_y_prime, phase_y_prime, chi)
    out = np.conj(bra) * ket / 4.0 ** (n_photons + 1)
    return _maybe_scalar(out, phi, chi)


def diagonal_rate_2d(
    n_photons: int,
    minority_x: int,
    minority_y: int,
    phase_x: float,
    phase_y: float,
    phi,
    chi,
):
    """Single four-beam proto-state rate in its explicit three-term form:
    an x fringe, a y fringe, and their interference cross term.

    Identical to the m' == m, k' == k case of :func:`matrix_element_2d`.
    """
    _check_index(n_photons, minority_x, "minority_x")
    _check_index(n_photons, minority_y, "minority_y")
    phi_arr = np.asarray(phi, dtype=float)
    chi_arr = np.asarray(chi, dtype=float)
    cm = math.comb(n_photons, minority_x)
    ck = math.comb(n_photons, minority_y)
    u = (n_photons - 2 * minority_x) * phi_arr + phase_x
    w = (n_photons - 2 * minority_y) * chi_arr + phase_y
    cross = (
        4.0
        * math.sqrt(cm * ck)
        * np.cos((n_photons * (phi_arr - chi_arr) + (phase_x - phase_y)) / 2.0)
        * np.cos(u / 2.0)
        * np.cos(w / 2.0)
    )
    out = (cm * (1.0 + np.cos(u)) + ck * (1.0 + np.cos(w)) + cross) / (
        2.0 * 4.0**n_photons
    )
    return _maybe_scalar(out, phi, chi)


def superposition_2d_rate(state: SuperpositionFixedN, phi, chi):
    """Rate of a fixed-photon-number superposition of four-beam states:
    |sum_mk a_mk (B_m(phi) + B_k(chi))|^2 / 4^(n+1), real and non-negative.

    Destructive interference between branches can drive this to exact zeros
    (dark spots), unlike any incoherent combination.
    """
    require_valid(state)
    if not state.is_2d:
        raise ValueError("expected a 2D fixed-photon-number superposition")
    n = state.n_photons
    total = 0.0j
    for proto, amp in state.terms:
        total = total + amp * (
            branch_amplitude(n, proto.minority_x, proto.phase_x, phi)
            + branch_amplitude(n, proto.minority_y, proto.phase_y, chi)
        )
    total = np.asarray(total)
    out = (total.real**2 + total.imag**2) / 4.0 ** (n + 1)
    return _maybe_scalar(out, phi, chi)
