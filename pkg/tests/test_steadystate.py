import math

import numpy as np
import pytest

from atomic.dressed import special_case_params
from atomic.dynamics import SystemParams, evolve, rhs_array
from atomic.errors import DegenerateDenominator, DegenerateLiouvillian
from atomic.state import LN3, populations, von_neumann_entropy
from atomic.steadystate import (
    ORACLE_ELEMENTS,
    analytic_steady_eq3,
    build_liouvillian,
    oracle_deviations,
    oracle_params,
    solve_steady,
)
from cli.selftest import random_params


def test_liouvillian_reproduces_rhs(rng):
    for _ in range(10):
        p = random_params(rng)
        L = build_liouvillian(p)
        x = rng.uniform(-1.0, 1.0, size=8)
        np.testing.assert_allclose(L.apply(x), rhs_array(p, x), atol=1e-13)


def test_default_steady_state_is_physical():
    report = solve_steady(SystemParams())
    assert not report.degenerate
    assert report.residual <= 1e-10
    assert abs(report.matrix.trace - 1.0) <= 1e-15
    assert 0.0 <= report.entropy <= LN3
    assert report.params == SystemParams()


def test_steady_state_matches_long_evolution():
    p = SystemParams(omega_r=0.3, omega_l=0.2, delta_r=0.5, delta_l=-0.5, phi=0.4, kc=0.5)
    steady = solve_steady(p).state.as_array()
    late = evolve(p, t_end=500.0, dt=1e-2, stride=50000).final.as_array()
    np.testing.assert_allclose(late, steady, atol=1e-6)


@pytest.mark.slow
def test_random_steady_states_match_long_evolution(rng):
    for _ in range(50):
        p = random_params(rng)
        report = solve_steady(p)
        assert not report.degenerate
        late = evolve(p, t_end=500.0, dt=1e-2, stride=50000).final.as_array()
        np.testing.assert_allclose(late, report.state.as_array(), atol=1e-6)


def test_zero_interference_population_closed_form():
    rho = solve_steady(oracle_params(0.1, 0.0, 0.0)).matrix
    assert populations(rho)[1] == pytest.approx(0.01 * 1.01 / (0.01 + 1.02 ** 2), abs=1e-10)


@pytest.mark.parametrize("kc, phi", [
    (0.0, 0.0),
    (0.0, math.pi / 2),
    (0.5, 0.0),
    (0.9, math.pi),
])
def test_analytic_oracle_agrees_where_exact(kc, phi):
    analytic = analytic_steady_eq3(0.1, phi, kc).elements
    numeric = solve_steady(oracle_params(0.1, phi, kc)).matrix.elements
    np.testing.assert_allclose(analytic, numeric, atol=1e-9)


def test_analytic_oracle_deviates_with_interference_and_phase():
    analytic = analytic_steady_eq3(0.1, math.pi / 2, 0.5).elements
    numeric = solve_steady(oracle_params(0.1, math.pi / 2, 0.5)).matrix.elements
    i, j = ORACLE_ELEMENTS["rho13"]
    assert abs(analytic[i, j] - numeric[i, j]) > 1e-6


def test_analytic_oracle_denominator_vanishes_at_full_interference():
    with pytest.raises(DegenerateDenominator):
        analytic_steady_eq3(0.1, 0.0, 1.0)


def test_analytic_oracle_limit_at_full_interference_is_not_pure():
    rho = analytic_steady_eq3(0.1, 0.0, 1.0 - 1e-6)
    assert populations(rho)[1] == pytest.approx(0.01 / (4 * 1.01), rel=1e-4)
    assert 1e-4 < von_neumann_entropy(rho.elements) < 1e-3


def test_analytic_oracle_is_unit_trace():
    rho = analytic_steady_eq3(0.2, math.pi / 6, 0.3)
    assert rho.trace == pytest.approx(1.0)


def test_oracle_deviation_grid():
    comparison = oracle_deviations(omegas=(0.1,), kcs=(0.0, 0.5), phis=(0.0, math.pi / 2, math.pi))
    assert comparison.points == 6
    assert comparison.deviating_points == [(0.1, 0.5, math.pi / 2)]
    assert comparison.max_error_agreeing <= 1e-6
    assert "rho13" in {d.element for d in comparison.deviations}
    assert all(d.magnitude > 1e-6 for d in comparison.deviations)


def test_disentanglement_near_full_interference():
    report = solve_steady(SystemParams(omega_r=0.1, omega_l=0.1, kc=0.99, phi=0.0))
    assert report.entropy < 0.02
    assert populations(report.matrix)[0] > 0.99


@pytest.mark.parametrize("omega0", [0.01, 0.1, 0.5, 1.0])
def test_degenerate_special_case_flagged(omega0):
    report = solve_steady(special_case_params(omega0), strict=False)
    assert report.degenerate
    assert report.state is None
    assert report.entropy is None
    assert report.smallest_singular_values[0] < 1e-8 * report.largest_singular_value


def test_degenerate_special_case_raises():
    with pytest.raises(DegenerateLiouvillian) as info:
        solve_steady(special_case_params(0.1))
    assert len(info.value.smallest_singular_values) == 2
