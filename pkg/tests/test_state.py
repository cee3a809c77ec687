import math

import numpy as np
import pytest

from atomic.errors import NonHermitianInput, PositivityViolation
from atomic.state import (
    LN3,
    BlochVector,
    DensityMatrix,
    bloch_to_matrix,
    coherence_magnitudes,
    eigenvalues_hermitian3,
    entropies,
    from_bloch,
    ground_state,
    populations,
    to_bloch,
    von_neumann_entropy,
)
from cli.selftest import charpoly_eigenvalues, random_density_matrix


def test_ground_state_is_pure():
    rho = from_bloch(ground_state())
    np.testing.assert_array_equal(rho.elements, np.diag([1.0, 0.0, 0.0]))
    assert von_neumann_entropy(rho) == 0.0


def test_from_bloch_fills_closure_and_conjugates():
    v = BlochVector(p22=0.2, p33=0.3, re12=0.1, im12=-0.05, re13=0.02, im13=0.03, re32=-0.04, im32=0.01)
    rho = from_bloch(v).elements
    assert rho[0, 0] == pytest.approx(0.5)
    assert rho[2, 1] == complex(-0.04, 0.01)
    assert rho[1, 2] == complex(-0.04, -0.01)
    np.testing.assert_array_equal(rho, rho.conj().T)
    assert abs(np.trace(rho) - 1.0) <= 1e-15


def test_bloch_round_trip_is_bit_exact(rng):
    for _ in range(200):
        x = rng.uniform(-0.5, 0.5, size=8)
        back = to_bloch(from_bloch(BlochVector.from_array(x))).as_array()
        assert np.array_equal(back, x)


def test_bloch_round_trip_keeps_signed_zero():
    v = BlochVector(re12=-0.0, im32=-0.0)
    back = to_bloch(from_bloch(v))
    assert math.copysign(1.0, back.re12) == -1.0
    assert math.copysign(1.0, back.im32) == -1.0


def test_bloch_to_matrix_vectorizes():
    stack = np.zeros((4, 8))
    stack[:, 0] = [0.0, 0.1, 0.2, 0.3]
    rho = bloch_to_matrix(stack)
    assert rho.shape == (4, 3, 3)
    np.testing.assert_allclose(rho[:, 0, 0].real, [1.0, 0.9, 0.8, 0.7])


def test_density_matrix_is_read_only():
    rho = DensityMatrix(np.eye(3) / 3)
    with pytest.raises(ValueError):
        rho.elements[0, 0] = 1.0


def test_density_matrix_shape_checked():
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2))


def test_eigenvalues_descending_and_match_characteristic_polynomial(rng):
    for _ in range(200):
        rho = random_density_matrix(rng)
        values = eigenvalues_hermitian3(rho)
        assert values[0] >= values[1] >= values[2]
        np.testing.assert_allclose(values, charpoly_eigenvalues(rho), atol=1e-9)


def test_eigenvalues_of_degenerate_spectrum():
    np.testing.assert_allclose(eigenvalues_hermitian3(np.eye(3) / 3), [1 / 3] * 3, atol=1e-15)


def test_non_hermitian_input_rejected():
    m = np.eye(3, dtype=complex) / 3
    m[0, 1] = 1e-3
    with pytest.raises(NonHermitianInput):
        eigenvalues_hermitian3(m)


@pytest.mark.parametrize("rho, expected", [
    (np.diag([1.0, 0.0, 0.0]), 0.0),
    (np.eye(3) / 3, math.log(3.0)),
    (np.diag([0.5, 0.5, 0.0]), math.log(2.0)),
])
def test_entropy_reference_values(rho, expected):
    assert von_neumann_entropy(rho) == pytest.approx(expected, abs=1e-12)


def test_entropy_pure_state_is_zero():
    psi = np.array([1.0, 1.0j, -1.0]) / math.sqrt(3)
    assert von_neumann_entropy(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-12)


def test_entropy_clamps_roundoff_negatives():
    rho = np.diag([0.6, 0.4 + 5e-10, -5e-10])
    assert von_neumann_entropy(rho) == pytest.approx(-(0.6 * math.log(0.6) + 0.4 * math.log(0.4)), abs=1e-8)


def test_entropy_rejects_negative_eigenvalue():
    with pytest.raises(PositivityViolation) as info:
        von_neumann_entropy(np.diag([0.7, 0.4, -0.1]))
    assert info.value.min_eigenvalue == pytest.approx(-0.1)


def test_entropy_bounded_by_ln3(rng):
    for _ in range(200):
        s = von_neumann_entropy(random_density_matrix(rng))
        assert 0.0 <= s <= LN3 + 1e-12


def test_entropy_unitary_invariance(rng):
    rho = random_density_matrix(rng)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    assert von_neumann_entropy(q @ rho @ q.conj().T) == pytest.approx(von_neumann_entropy(rho), abs=1e-12)


def test_entropies_of_stack_match_scalar(rng):
    stack = np.array([random_density_matrix(rng) for _ in range(5)])
    np.testing.assert_allclose(entropies(stack), [von_neumann_entropy(r) for r in stack], atol=1e-13)


def test_populations_and_coherences():
    rho = from_bloch(BlochVector(p22=0.25, p33=0.25, re12=0.3, im13=-0.4, re32=0.1))
    assert populations(rho) == pytest.approx((0.5, 0.25, 0.25))
    assert coherence_magnitudes(rho) == pytest.approx((0.3, 0.4, 0.1))
