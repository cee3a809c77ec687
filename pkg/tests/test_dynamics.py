import math

import numpy as np
import pytest

from config.settings import config
from atomic import dynamics
from atomic.dynamics import (
    SystemParams,
    convergence_order_check,
    evolve,
    generator,
    one_step_map,
    perturbed_rhs,
    rhs,
    rhs_array,
    rk4_step,
    to_si_time,
)
from atomic.errors import InvalidParameter, StepTooLarge
from atomic.state import LN3, BlochVector, bloch_to_matrix, min_eigenvalues
from cli.selftest import random_params

GENERIC = SystemParams(omega_r=0.5, omega_l=0.3, delta_r=1.0, delta_l=-0.5, delta_small=0.2, phi=0.7, kc=0.5)


def test_default_params():
    p = SystemParams()
    assert (p.gamma21, p.gamma31, p.omega_r, p.omega_l, p.phi, p.kc) == (1.0, 1.0, 0.1, 0.1, 0.0, 0.0)
    assert p.eta == 0.0


@pytest.mark.parametrize("changes", [
    {"kc": 1.5},
    {"kc": -0.1},
    {"gamma21": 0.0},
    {"omega_r": -0.1},
    {"phi": float("nan")},
    {"delta_r": float("inf")},
])
def test_invalid_params_rejected(changes):
    with pytest.raises(InvalidParameter):
        SystemParams(**changes)


def test_phi_reduced_modulo_two_pi():
    assert SystemParams(phi=2 * math.pi + 0.5).phi == pytest.approx(0.5)
    assert SystemParams(phi=-0.5).phi == pytest.approx(2 * math.pi - 0.5)


def test_eta_uses_geometric_mean_of_rates():
    assert SystemParams(gamma21=1.0, gamma31=4.0, kc=0.5).eta == pytest.approx(1.0)


def test_ground_state_without_fields_is_stationary():
    d = rhs(SystemParams(omega_r=0.0, omega_l=0.0), BlochVector())
    np.testing.assert_array_equal(d.as_array(), np.zeros(8))


def test_generator_trace_preserving_and_hermitian(rng):
    for _ in range(20):
        p = random_params(rng)
        x = rng.uniform(-0.3, 0.3, size=8)
        d = generator(p, bloch_to_matrix(x))
        assert abs(np.trace(d)) <= 1e-15
        np.testing.assert_array_equal(d, d.conj().T)


def test_rhs_matches_generator_components():
    x = np.array([0.2, 0.1, 0.05, -0.02, 0.03, 0.01, -0.01, 0.04])
    d = generator(GENERIC, bloch_to_matrix(x))
    np.testing.assert_array_equal(rhs_array(GENERIC, x), [
        d[1, 1].real, d[2, 2].real, d[0, 1].real, d[0, 1].imag,
        d[0, 2].real, d[0, 2].imag, d[2, 1].real, d[2, 1].imag,
    ])


def test_excited_populations_decay_at_twice_the_rate():
    p = SystemParams(omega_r=0.0, omega_l=0.0, gamma21=1.0, gamma31=0.5)
    d = rhs(p, BlochVector(p22=0.4, p33=0.6))
    assert d.p22 == pytest.approx(-0.8)
    assert d.p33 == pytest.approx(-0.6)


def test_sgc_term_couples_excited_coherence():
    p = SystemParams(omega_r=0.0, omega_l=0.0, kc=1.0, phi=0.0)
    d = rhs(p, BlochVector(p22=0.5, p33=0.5))
    # rho32' = -eta (rho22 + rho33)
    assert d.re32 == pytest.approx(-1.0)
    assert d.im32 == pytest.approx(0.0)


def test_rk4_step_on_exponential():
    x = rk4_step(lambda y: -y, np.array([1.0]), 0.1)
    assert x[0] == pytest.approx(math.exp(-0.1), abs=1e-7)


def test_one_step_map_equals_rk4_step():
    M, c = one_step_map(GENERIC, 0.01)
    x = np.array([0.2, 0.1, 0.05, -0.02, 0.03, 0.01, -0.01, 0.04])
    expected = rk4_step(lambda y: rhs_array(GENERIC, y), x, 0.01)
    np.testing.assert_allclose(M @ x + c, expected, atol=1e-15)


def test_evolve_sampling_grid():
    traj = evolve(GENERIC, t_end=1.0, dt=0.01, stride=30)
    np.testing.assert_allclose(traj.times, [0.0, 0.3, 0.6, 0.9, 1.0])
    assert traj.states.shape == (5, 8)
    assert traj.populations.shape == (5, 3)
    assert traj.entropy[0] == 0.0


def test_evolve_single_step():
    traj = evolve(GENERIC, t_end=0.01, dt=0.01, stride=100)
    np.testing.assert_allclose(traj.times, [0.0, 0.01])


@pytest.mark.parametrize("kwargs", [
    {"t_end": 0.0},
    {"dt": -1e-3},
    {"dt": 2.0, "t_end": 1.0},
    {"stride": 0},
])
def test_evolve_rejects_bad_numerics(kwargs):
    with pytest.raises(InvalidParameter):
        evolve(GENERIC, **kwargs)


def test_free_decay_matches_exponential():
    traj = evolve(SystemParams(omega_r=0.0, omega_l=0.0), BlochVector(p22=1.0), t_end=5.0, dt=1e-3, stride=10)
    np.testing.assert_allclose(traj.populations[:, 1], np.exp(-2.0 * traj.times), atol=1e-8)
    assert traj.entropy[-1] < traj.entropy.max()


def test_trace_preserved_along_trajectory():
    traj = evolve(GENERIC, t_end=10.0, dt=1e-3, stride=100)
    traces = np.trace(traj.matrices(), axis1=-2, axis2=-1)
    assert np.max(np.abs(traces - 1.0)) <= 1e-15


def test_phase_irrelevant_without_interference():
    base = SystemParams(omega_r=0.3, omega_l=0.2, delta_r=1.0, delta_l=0.5, kc=0.0)
    a = evolve(base.replace(phi=0.0), t_end=5.0, dt=1e-3, stride=50)
    b = evolve(base.replace(phi=math.pi / 3), t_end=5.0, dt=1e-3, stride=50)
    assert np.array_equal(a.states, b.states)


def test_symmetric_drive_keeps_excited_populations_equal():
    p = SystemParams(omega_r=0.2, omega_l=0.2, kc=0.5, phi=0.0)
    traj = evolve(p, t_end=10.0, dt=1e-3, stride=100)
    np.testing.assert_allclose(traj.populations[:, 1], traj.populations[:, 2], atol=1e-14)


def test_step_too_large_raised():
    p = SystemParams(omega_r=50.0, omega_l=50.0, delta_r=100.0, delta_l=100.0)
    with pytest.raises(StepTooLarge):
        evolve(p, t_end=5.0, dt=0.5, stride=1)


def test_coarse_step_logs_warning(caplog, monkeypatch):
    monkeypatch.setattr(config.numerics, "step_error_warn", 0.0)
    with caplog.at_level("WARNING", logger="atomic.dynamics"):
        evolve(GENERIC, t_end=1.0, dt=0.01, stride=10)
    assert any("step-doubling" in r.message for r in caplog.records)


def test_convergence_order_is_four():
    report = convergence_order_check(GENERIC)
    assert not report.exact
    assert 3.7 <= report.order <= 4.3


def test_convergence_order_exact_without_fields():
    report = convergence_order_check(SystemParams(omega_r=0.0, omega_l=0.0))
    assert report.exact
    assert report.order is None


@pytest.mark.slow
def test_trajectories_stay_physical(rng):
    for _ in range(100):
        traj = evolve(random_params(rng), t_end=50.0, dt=1e-3, stride=100)
        rho = traj.matrices()
        assert traj.times[-1] == pytest.approx(50.0)
        assert np.max(np.abs(np.trace(rho, axis1=1, axis2=2) - 1.0)) <= 1e-15
        np.testing.assert_array_equal(rho, np.conj(np.swapaxes(rho, 1, 2)))
        assert np.min(min_eigenvalues(rho)) >= -1e-6
        assert np.min(traj.entropy) >= 0.0
        assert np.max(traj.entropy) <= LN3 + 1e-12


def test_rhs_is_affine(rng):
    for _ in range(100):
        p = random_params(rng)
        v1, v2 = rng.uniform(-1.0, 1.0, size=(2, 8))
        zero = np.zeros(8)
        residual = rhs_array(p, v1 + v2) - rhs_array(p, v1) - rhs_array(p, v2) + rhs_array(p, zero)
        assert np.max(np.abs(residual)) <= 1e-14


def test_perturbed_rhs_flips_only_inside_context():
    p = SystemParams(kc=0.8, phi=0.3)
    x = np.array([0.1, 0.1, 0.02, 0.01, 0.05, -0.03, 0.0, 0.0])
    normal = rhs_array(p, x)
    with perturbed_rhs():
        flipped = rhs_array(p, x)
    np.testing.assert_array_equal(rhs_array(p, x), normal)
    assert not np.array_equal(flipped[2:4], normal[2:4])
    np.testing.assert_array_equal(flipped[4:], normal[4:])


def test_si_time_conversion():
    assert to_si_time(1.0) == pytest.approx(1.0 / (2 * math.pi * 9.79e6))
    assert dynamics.OMEGA32_GAMMA == 0.2
