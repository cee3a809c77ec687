import math

import numpy as np
import pytest

from atomic import dressed
from atomic.dressed import (
    DRESSED_U,
    DressedBasisMatrix,
    compare_frequencies,
    dressed_generator,
    dressed_rhs_eq9,
    eq9_deviations,
    from_dressed,
    oscillation_frequency,
    special_case_eigenvalues_eq12,
    special_case_entropy_eq12,
    special_case_numeric,
    special_case_params,
    special_case_rhs_eq10,
    special_case_trajectory_eq11,
    summarize_special_case,
    to_dressed,
)
from atomic.dynamics import SystemParams, generator
from atomic.errors import InvalidParameter
from atomic.state import von_neumann_entropy
from cli.selftest import random_density_matrix

DRIVEN = SystemParams(omega_r=0.3, omega_l=0.1, delta_r=0.4, delta_l=-0.2, kc=0.5, phi=math.pi / 2)


def test_transform_is_real_orthogonal_and_self_inverse():
    np.testing.assert_allclose(DRESSED_U @ DRESSED_U, np.eye(3), atol=1e-15)
    np.testing.assert_array_equal(DRESSED_U, DRESSED_U.T)


def test_dressed_round_trip(rng):
    for _ in range(50):
        rho = random_density_matrix(rng)
        np.testing.assert_allclose(from_dressed(to_dressed(rho)).elements, rho, atol=1e-14)


def test_dressed_entropy_invariant(rng):
    for _ in range(50):
        rho = random_density_matrix(rng)
        assert von_neumann_entropy(to_dressed(rho).elements) == pytest.approx(von_neumann_entropy(rho), abs=1e-12)


def test_dressed_populations():
    rho = np.diag([0.5, 0.25, 0.25]).astype(complex)
    rho[1, 2] = rho[2, 1] = 0.25
    m = to_dressed(rho)
    assert m.rho11 == pytest.approx(0.5)
    assert m.rho_psipsi == pytest.approx(0.5)
    assert m.rho_phiphi == pytest.approx(0.0, abs=1e-15)


def test_dressed_generator_is_conjugated_bare_generator(rng):
    rho = random_density_matrix(rng)
    expected = DRESSED_U @ generator(DRIVEN, rho) @ DRESSED_U
    np.testing.assert_allclose(dressed_generator(DRIVEN, to_dressed(rho)).elements, expected, atol=1e-14)


def test_published_dressed_equations_are_trace_preserving(rng):
    m = to_dressed(random_density_matrix(rng))
    d = dressed_rhs_eq9(DRIVEN, m).elements
    assert abs(np.trace(d)) <= 1e-14


def test_published_dressed_equations_itemized():
    found = eq9_deviations(DRIVEN)
    outputs = {d.output for d in found}
    assert found
    assert outputs & {"re_1_psi", "im_1_psi"}
    assert not outputs & {"re_psi_phi", "im_psi_phi"}
    assert all(d.magnitude > 1e-12 for d in found)


def test_two_photon_detuning_missing_from_published_equations():
    found = eq9_deviations(DRIVEN.replace(delta_small=0.3))
    assert {d.output for d in found} & {"re_psi_phi", "im_psi_phi"}


def test_special_case_closed_forms_at_origin():
    m = special_case_trajectory_eq11(0.1, 0.0)
    assert m.rho11 == 1.0
    assert m.rho_psipsi == 0.0
    assert special_case_eigenvalues_eq12(0.1, 0.0) == pytest.approx((1.0, 0.0))
    entropy, unphysical = special_case_entropy_eq12(0.1, 0.0)
    assert entropy == pytest.approx(0.0, abs=1e-12)
    assert not unphysical


def test_special_case_published_eigenvalue_turns_negative():
    quarter = math.pi / 2 * math.sqrt(2.0) / (4.0 * 0.1)
    lam_plus, lam_minus = special_case_eigenvalues_eq12(0.1, quarter)
    assert lam_minus == pytest.approx((1 - 2 ** 0.25) / 2)
    assert lam_plus == pytest.approx((1 + 2 ** 0.25) / 2)
    entropy, unphysical = special_case_entropy_eq12(0.1, quarter)
    assert math.isnan(entropy)
    assert unphysical


def test_special_case_reduced_equations():
    m = DressedBasisMatrix(np.diag([1.0, 0.0, 0.0]))
    d = special_case_rhs_eq10(0.1, m)
    assert d[0, 1] == pytest.approx(-0.2j)
    assert d[1, 1] == 0.0
    assert np.trace(d.elements) == 0.0


def test_special_case_numeric_is_undamped_rabi_oscillation():
    run = special_case_numeric(0.1, t_end=50.0, dt=1e-3, stride=100)
    np.testing.assert_allclose(run.rho11, np.cos(math.sqrt(2.0) * 0.1 * run.times) ** 2, atol=1e-8)
    assert np.max(np.abs(run.rho_phiphi)) <= 1e-8
    assert run.sample(0).rho11 == pytest.approx(1.0)


def test_special_case_numeric_default_horizon():
    run = special_case_numeric(0.5, dt=1e-3, stride=1000)
    assert run.times[-1] == pytest.approx(40.0)


def test_special_case_numeric_rejects_zero_field():
    with pytest.raises(InvalidParameter):
        special_case_numeric(0.0)


def test_special_case_summary_matches_closed_form_frequency():
    run = special_case_numeric(0.1, t_end=200.0)
    summary = summarize_special_case(run)
    assert summary.frequency.matches()["closed_form"]
    assert not summary.frequency.matches()["reduced_equations"]
    assert summary.peak_to_peak > 0.9
    assert summary.last_cycle_amplitude >= 0.99 * summary.first_cycle_amplitude
    assert summary.max_abs_rho_1psi == pytest.approx(0.5, abs=1e-3)
    assert summary.min_eigenvalue >= -1e-6
    assert summary.max_trace_error <= 1e-15


def test_oscillation_frequency_of_cosine():
    t = np.linspace(0.0, 100.0, 10001)
    assert oscillation_frequency(t, np.cos(0.7 * t)) == pytest.approx(0.7, rel=1e-4)
    assert oscillation_frequency(t, t) is None


def test_frequency_comparison_without_measurement():
    comparison = compare_frequencies(0.1, None)
    assert comparison.closed_form == pytest.approx(0.4 / math.sqrt(2.0))
    assert comparison.closed_form_relative_error is None
    assert comparison.matches() == {"closed_form": False, "reduced_equations": False}


def test_special_case_params():
    p = special_case_params(0.2)
    assert (p.kc, p.phi, p.omega_r, p.omega_l) == (1.0, math.pi, 0.2, 0.2)
    assert dressed.Mode("paper") is dressed.Mode.PAPER
