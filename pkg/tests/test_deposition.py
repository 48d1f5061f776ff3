import math

import numpy as np
import pytest

from qlitho import (
    FixedMTerm,
    ProtoState1D,
    ProtoState2D,
    StateValidationError,
    SuperpositionFixedM,
    SuperpositionFixedN,
    build_proto_state,
    deposition_matrix_element,
    diagonal_rate_1d,
    diagonal_rate_2d,
    fixed_m_rate_by_order,
    fixed_m_superposition_rate,
    fixed_n_superposition_rate,
    matrix_element_1d,
    matrix_element_2d,
    noon_rate,
    superposition_2d_rate,
    superposition_ket,
)

INV_SQRT2 = 1.0 / math.sqrt(2.0)
MODES_1D = (0, 1)
MODES_2D = (0, 1, 2, 3)


def random_fixed_n_1d(rng, n):
    count = n // 2 + 1
    raw = rng.normal(size=2 * count)
    amps = raw[0::2] + 1j * raw[1::2]
    amps /= math.sqrt(float((abs(amps) ** 2).sum()))
    thetas = rng.uniform(0, 2 * math.pi, count)
    return SuperpositionFixedN(
        n, tuple((ProtoState1D(n, m, thetas[m]), amps[m]) for m in range(count))
    )


def random_fixed_n_2d(rng, n):
    count = n // 2 + 1
    raw = rng.normal(size=2 * count * count)
    amps = (raw[0::2] + 1j * raw[1::2]).reshape(count, count)
    amps /= math.sqrt(float((abs(amps) ** 2).sum()))
    zx = rng.uniform(0, 2 * math.pi, count)
    zy = rng.uniform(0, 2 * math.pi, count)
    return SuperpositionFixedN(
        n,
        tuple(
            (ProtoState2D(n, m, k, zx[m], zy[k]), amps[m, k])
            for m in range(count)
            for k in range(count)
        ),
    )


# -- two-beam kernels ----------------------------------------------------------


def test_noon_examples():
    assert noon_rate(1, 0.0) == pytest.approx(1.0)
    assert noon_rate(4, math.pi / 4) == pytest.approx(0.0, abs=1e-15)
    assert noon_rate(2, math.pi / 2) == pytest.approx(0.0, abs=1e-15)


def test_noon_rejects_bad_order():
    with pytest.raises(ValueError):
        noon_rate(0, 0.0)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_noon_period_is_exactly_fraction_of_full_turn(n):
    phi = np.linspace(0.1, 6.0, 47)
    period = 2 * math.pi / n
    assert noon_rate(n, phi + period) == pytest.approx(noon_rate(n, phi))
    if n > 1:
        # no smaller period: shifting by the next-smaller candidate breaks it
        assert not np.allclose(noon_rate(n, phi + period / 2), noon_rate(n, phi))


def test_matrix_element_reduces_to_noon():
    phi = np.linspace(0, 2 * math.pi, 17)
    element = matrix_element_1d(5, 0, 0, 0.0, 0.0, phi)
    assert element.imag == pytest.approx(np.zeros_like(phi))
    assert element.real == pytest.approx(noon_rate(5, phi))


def test_matrix_element_special_phase_quadrants():
    # with phases (0, pi) the element is -i times a cos * sin profile
    rng = np.random.default_rng(3)
    for n, m, mp in ((4, 0, 1), (7, 2, 3), (5, 1, 1)):
        phi = rng.uniform(0, 2 * math.pi, 9)
        got = matrix_element_1d(n, m, mp, 0.0, math.pi, phi)
        scale = math.sqrt(math.comb(n, m) * math.comb(n, mp)) / 2 ** (n - 1)
        expected = (
            -1j
            * scale
            * np.cos((n - 2 * m) * phi / 2)
            * np.sin((n - 2 * mp) * phi / 2)
        )
        assert got == pytest.approx(expected)


def test_matrix_element_equal_phases_factorizes():
    n, m, mp, theta = 6, 1, 2, 1.1
    phi = np.linspace(0, 2 * math.pi, 13)
    got = matrix_element_1d(n, m, mp, theta, theta, phi)
    scale = math.sqrt(math.comb(n, m) * math.comb(n, mp)) / 2 ** (n - 1)
    expected = (
        scale
        * np.cos(((n - 2 * m) * phi + theta) / 2)
        * np.cos(((n - 2 * mp) * phi + theta) / 2)
    )
    assert got == pytest.approx(expected)


def test_matrix_element_hermiticity():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        m, mp = (int(v) for v in rng.integers(0, n // 2 + 1, 2))
        tm, tmp, phi = rng.uniform(0, 2 * math.pi, 3)
        forward = matrix_element_1d(n, m, mp, tm, tmp, phi)
        backward = matrix_element_1d(n, mp, m, tmp, tm, phi)
        assert forward == pytest.approx(backward.conjugate())


def test_matrix_element_matches_oracle():
    rng = np.random.default_rng(17)
    for n in range(1, 9):
        for m in range(n // 2 + 1):
            for mp in range(n // 2 + 1):
                tm, tmp, phi = rng.uniform(0, 2 * math.pi, 3)
                bra = build_proto_state(ProtoState1D(n, m, tm), phi, normalize=False)
                ket = build_proto_state(ProtoState1D(n, mp, tmp), phi, normalize=False)
                oracle = deposition_matrix_element(bra, ket, MODES_1D, n)
                closed = matrix_element_1d(n, m, mp, tm, tmp, phi)
                assert abs(closed - oracle) <= 1e-12


def test_diagonal_rate_examples():
    phi = np.linspace(0, 2 * math.pi, 11)
    assert diagonal_rate_1d(2, 1, 0.0, phi) == pytest.approx(np.ones_like(phi))
    assert diagonal_rate_1d(3, 0, math.pi, phi) == pytest.approx(
        (1 - np.cos(3 * phi)) / 8
    )
    assert diagonal_rate_1d(3, 1, 0.0, phi) == pytest.approx(3 * (1 + np.cos(phi)) / 8)


def test_diagonal_rate_sine_shapes_via_phase():
    phi = np.linspace(0, 2 * math.pi, 11)
    assert diagonal_rate_1d(3, 0, 3 * math.pi / 2, phi) == pytest.approx(
        (1 + np.sin(3 * phi)) / 8
    )
    assert diagonal_rate_1d(3, 0, math.pi / 2, phi) == pytest.approx(
        (1 - np.sin(3 * phi)) / 8
    )


def test_diagonal_translation_property():
    n, m, theta, delta = 7, 2, 0.9, 0.6
    phi = np.linspace(0, 2 * math.pi, 23)
    shifted = diagonal_rate_1d(n, m, theta + delta, phi)
    reference = diagonal_rate_1d(n, m, theta, phi + delta / (n - 2 * m))
    assert shifted == pytest.approx(reference)


def test_index_out_of_range_is_usage_error():
    with pytest.raises(ValueError):
        diagonal_rate_1d(4, 3, 0.0, 0.0)
    with pytest.raises(ValueError):
        matrix_element_1d(4, 0, 3, 0.0, 0.0, 0.0)


# -- fixed photon number superpositions -----------------------------------------


def test_single_term_reproduces_diagonal():
    state = SuperpositionFixedN(5, ((ProtoState1D(5, 2, 0.7), 1.0),))
    phi = np.linspace(0, 2 * math.pi, 19)
    assert fixed_n_superposition_rate(state, phi) == pytest.approx(
        diagonal_rate_1d(5, 2, 0.7, phi)
    )


def test_figure_two_zeros():
    state = SuperpositionFixedN(
        20, ((ProtoState1D(20, 9), INV_SQRT2), (ProtoState1D(20, 5), INV_SQRT2))
    )
    assert fixed_n_superposition_rate(state, math.pi / 2) <= 1e-12
    assert fixed_n_superposition_rate(state, 3 * math.pi / 2) <= 1e-12


def test_two_term_rate_has_exact_cross_coefficient():
    """The interference term of a two-branch state carries coefficient 4
    against the C(1+cos) diagonals; verified against the oracle-backed rate."""
    rng = np.random.default_rng(23)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        m, mp = sorted(rng.choice(n // 2 + 1, size=2, replace=False))
        tm, tmp, phi = rng.uniform(0, 2 * math.pi, 3)
        raw = rng.normal(size=4)
        a, b = raw[0] + 1j * raw[1], raw[2] + 1j * raw[3]
        norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        a, b = a / norm, b / norm
        state = SuperpositionFixedN(
            n, ((ProtoState1D(n, int(m), tm), a), (ProtoState1D(n, int(mp), tmp), b))
        )
        product = a.conjugate() * b
        r, xi = abs(product), math.atan2(product.imag, product.real)
        cm, cmp_ = math.comb(n, int(m)), math.comb(n, int(mp))
        expected = (
            abs(a) ** 2 * cm * (1 + math.cos((n - 2 * m) * phi + tm))
            + abs(b) ** 2 * cmp_ * (1 + math.cos((n - 2 * mp) * phi + tmp))
            + 4
            * r
            * math.sqrt(cm * cmp_)
            * math.cos(tmp / 2 - tm / 2 + xi)
            * math.cos(((n - 2 * m) * phi + tm) / 2)
            * math.cos(((n - 2 * mp) * phi + tmp) / 2)
        ) / 2**n
        assert fixed_n_superposition_rate(state, phi) == pytest.approx(expected)


def test_superposition_rate_matches_bilinear_sum_and_oracle():
    rng = np.random.default_rng(31)
    for n in range(1, 9):
        state = random_fixed_n_1d(rng, n)
        phi = float(rng.uniform(0, 2 * math.pi))
        rate = fixed_n_superposition_rate(state, phi)
        bilinear = 0.0j
        for proto_a, amp_a in state.terms:
            for proto_b, amp_b in state.terms:
                bilinear += (
                    amp_a.conjugate()
                    * amp_b
                    * matrix_element_1d(
                        n,
                        proto_a.minority,
                        proto_b.minority,
                        proto_a.phase,
                        proto_b.phase,
                        phi,
                    )
                )
        assert bilinear.imag == pytest.approx(0.0, abs=1e-12)
        assert rate == pytest.approx(bilinear.real)
        ket = superposition_ket(state, phi)
        oracle = deposition_matrix_element(ket, ket, MODES_1D, n).real
        assert abs(rate - oracle) <= 1e-10 * max(1.0, abs(oracle))


def test_invalid_superposition_rejected():
    state = SuperpositionFixedN(4, ((ProtoState1D(4, 0), 0.5),))
    with pytest.raises(StateValidationError):
        fixed_n_superposition_rate(state, 0.0)


# -- fixed minority superpositions ----------------------------------------------


def test_fixed_m_single_term_reproduces_diagonal():
    state = SuperpositionFixedM(0, (FixedMTerm(4, 1.0, 0.3),))
    phi = np.linspace(0, 2 * math.pi, 9)
    assert fixed_m_superposition_rate(state, phi) == pytest.approx(
        diagonal_rate_1d(4, 0, 0.3, phi)
    )


def test_fixed_m_two_term_example():
    state = SuperpositionFixedM(
        0, (FixedMTerm(1, INV_SQRT2), FixedMTerm(3, INV_SQRT2))
    )
    assert fixed_m_superposition_rate(state, 0.0) == pytest.approx(5 / 8)
    by_order = fixed_m_rate_by_order(state, 0.0)
    assert by_order[1] == pytest.approx(0.5)
    assert by_order[3] == pytest.approx(1 / 8)


def test_cross_photon_number_elements_vanish():
    """Branches with different photon numbers never interfere: the bilinear
    element between them vanishes at every moment order."""
    rng = np.random.default_rng(41)
    for _ in range(12):
        n = int(rng.integers(1, 7))
        np_ = int(rng.integers(1, 7))
        if n == np_:
            np_ += 1
        order = int(rng.integers(1, max(n, np_) + 1))
        bra = build_proto_state(
            ProtoState1D(n, int(rng.integers(0, n // 2 + 1))), 0.4, normalize=False
        )
        ket_raw = build_proto_state(
            ProtoState1D(np_, int(rng.integers(0, np_ // 2 + 1))), 0.4,
            normalize=False,
        )
        cutoff = max(n, np_)
        from qlitho.fock import FockVector

        bra = FockVector(2, cutoff, dict(bra.items()))
        ket = FockVector(2, cutoff, dict(ket_raw.items()))
        assert abs(deposition_matrix_element(bra, ket, MODES_1D, order)) == 0.0


def test_fixed_m_total_matches_per_order_oracle():
    rng = np.random.default_rng(43)
    amps = rng.normal(size=3) + 1j * rng.normal(size=3)
    amps /= math.sqrt(float((abs(amps) ** 2).sum()))
    thetas = rng.uniform(0, 2 * math.pi, 3)
    state = SuperpositionFixedM(
        0,
        tuple(FixedMTerm(n, amps[i], thetas[i]) for i, n in enumerate((2, 4, 5))),
    )
    phi = 1.234
    oracle_total = 0.0
    for term in state.terms:
        raw = build_proto_state(
            ProtoState1D(term.n_photons, 0, term.phase), phi, normalize=False
        )
        element = deposition_matrix_element(raw, raw, MODES_1D, term.n_photons)
        oracle_total += abs(term.amplitude) ** 2 * element.real
    assert fixed_m_superposition_rate(state, phi) == pytest.approx(oracle_total)


# -- four-beam kernels -----------------------------------------------------------


def test_matrix_element_2d_diagonal_equals_three_term_form():
    rng = np.random.default_rng(47)
    for _ in range(15):
        n = int(rng.integers(1, 7))
        m, k = (int(v) for v in rng.integers(0, n // 2 + 1, 2))
        zx, zy, phi, chi = rng.uniform(0, 2 * math.pi, 4)
        element = matrix_element_2d(n, m, k, m, k, zx, zy, zx, zy, phi, chi)
        assert element.imag == pytest.approx(0.0, abs=1e-14)
        assert element.real == pytest.approx(
            diagonal_rate_2d(n, m, k, zx, zy, phi, chi)
        )


def test_matrix_element_2d_peak_example():
    assert matrix_element_2d(2, 0, 0, 0, 0, 0, 0, 0, 0, 0.0, 0.0) == pytest.approx(
        0.25
    )
    state = build_proto_state(ProtoState2D(2, 0, 0), 0.0, 0.0)
    from qlitho import deposition_expectation

    assert deposition_expectation(state, MODES_2D, 2) == pytest.approx(0.25)


def test_matrix_element_2d_matches_oracle():
    rng = np.random.default_rng(53)
    for n in range(1, 7):
        half = n // 2 + 1
        for _ in range(12):
            m, k, mp, kp = (int(v) for v in rng.integers(0, half, 4))
            zs = rng.uniform(0, 2 * math.pi, 4)
            phi, chi = rng.uniform(0, 2 * math.pi, 2)
            bra = build_proto_state(
                ProtoState2D(n, m, k, zs[0], zs[1]), phi, chi, normalize=False
            )
            ket = build_proto_state(
                ProtoState2D(n, mp, kp, zs[2], zs[3]), phi, chi, normalize=False
            )
            oracle = deposition_matrix_element(bra, ket, MODES_2D, n)
            closed = matrix_element_2d(
                n, m, k, mp, kp, zs[0], zs[1], zs[2], zs[3], phi, chi
            )
            assert abs(closed - oracle) <= 1e-12


def test_diagonal_2d_translation_with_matched_phases():
    n, m, delta = 5, 1, 0.8
    phi = np.linspace(0, 2 * math.pi, 9)
    chi = np.linspace(0, 2 * math.pi, 9) * 0.5
    shift = delta / (n - 2 * m)
    shifted = diagonal_rate_2d(n, m, m, delta, delta, phi, chi)
    reference = diagonal_rate_2d(n, m, m, 0.0, 0.0, phi + shift, chi + shift)
    assert shifted == pytest.approx(reference)


def test_superposition_2d_single_term_reproduces_diagonal():
    state = SuperpositionFixedN(4, ((ProtoState2D(4, 1, 0, 0.2, 0.9), 1.0),))
    phi = np.linspace(0, 2 * math.pi, 7)
    chi = np.linspace(0, 2 * math.pi, 7)
    assert superposition_2d_rate(state, phi, chi) == pytest.approx(
        diagonal_rate_2d(4, 1, 0, 0.2, 0.9, phi, chi)
    )


def test_superposition_2d_matches_oracle():
    rng = np.random.default_rng(59)
    for n in range(1, 7):
        state = random_fixed_n_2d(rng, n)
        phi, chi = (float(v) for v in rng.uniform(0, 2 * math.pi, 2))
        rate = superposition_2d_rate(state, phi, chi)
        ket = superposition_ket(state, phi, chi)
        oracle = deposition_matrix_element(ket, ket, MODES_2D, n).real
        assert abs(rate - oracle) <= 1e-10 * max(1.0, abs(oracle))


def test_superposition_2d_hand_picked_dark_spot():
    # alpha2 = -alpha1 cos(phi0)/sqrt(2) puts an exact zero at (phi0, phi0)
    phi0 = math.pi / 3
    a1 = 2 * math.sqrt(2) / 3
    a2 = -1 / 3
    state = SuperpositionFixedN(
        2, ((ProtoState2D(2, 0, 0), a1), (ProtoState2D(2, 1, 1), a2))
    )
    assert superposition_2d_rate(state, phi0, phi0) <= 1e-15
    ket = superposition_ket(state, phi0, phi0)
    oracle = deposition_matrix_element(ket, ket, MODES_2D, 2).real
    assert abs(oracle) <= 1e-15
    # and it is not trivially dark everywhere
    assert superposition_2d_rate(state, 0.0, 0.0) > 0.01


def test_rates_real_and_non_negative_at_random_draws():
    rng = np.random.default_rng(61)
    for _ in range(250):
        n = int(rng.integers(1, 7))
        phi = float(rng.uniform(0, 2 * math.pi))
        state = random_fixed_n_1d(rng, n)
        assert fixed_n_superposition_rate(state, phi) >= -1e-12
        state2 = random_fixed_n_2d(rng, n)
        chi = float(rng.uniform(0, 2 * math.pi))
        assert superposition_2d_rate(state2, phi, chi) >= -1e-12


def test_rate_periodicity_in_phi():
    rng = np.random.default_rng(67)
    state = random_fixed_n_1d(rng, 6)
    phi = np.linspace(0, 2 * math.pi, 13)
    assert fixed_n_superposition_rate(state, phi + 2 * math.pi) == pytest.approx(
        fixed_n_superposition_rate(state, phi)
    )
