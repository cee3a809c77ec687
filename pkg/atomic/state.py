"""
Atomic State and Entanglement Measures
Density-matrix representation, Hermitian eigen-decomposition and von Neumann entropy
"""
import logging
from dataclasses import dataclass, fields
from typing import Tuple, Union

import numpy as np
from scipy.special import entr

from config.settings import config
from .errors import NonHermitianInput, PositivityViolation

logger = logging.getLogger(__name__)

LN3 = float(np.log(3.0))

BLOCH_FIELDS = ("p22", "p33", "re12", "im12", "re13", "im13", "re32", "im32")


@dataclass(frozen=True)
class BlochVector:
    """
    The eight independent real variables of the equations of motion.
    rho11 is implied by the closure relation and rho23 = conj(rho32).
    """
    p22: float = 0.0
    p33: float = 0.0
    re12: float = 0.0
    im12: float = 0.0
    re13: float = 0.0
    im13: float = 0.0
    re32: float = 0.0
    im32: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)

    @classmethod
    def from_array(cls, values) -> "BlochVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (8,):
            raise ValueError(f"expected 8 components, got shape {values.shape}")
        return cls(*(float(x) for x in values))

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in BLOCH_FIELDS}


@dataclass(frozen=True)
class DensityMatrix:
    """3x3 complex atomic density matrix indexed by levels 1, 2, 3"""
    elements: np.ndarray

    def __post_init__(self):
        arr = np.array(self.elements, dtype=complex)
        if arr.shape != (3, 3):
            raise ValueError(f"density matrix must be 3x3, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    def __getitem__(self, index):
        return self.elements[index]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.elements))


MatrixLike = Union[DensityMatrix, np.ndarray]


def _as_array(rho: MatrixLike) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.elements
    return np.asarray(rho, dtype=complex)


# ============================================================================
# BLOCH VECTOR <-> MATRIX
# ============================================================================

def ground_state() -> BlochVector:
    """rho = |1><1|"""
    return BlochVector()


def _complex(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    # component-wise assignment keeps signed zeros intact
    out = np.empty(np.shape(re), dtype=complex)
    out.real = re
    out.imag = im
    return out


def bloch_to_matrix(x: np.ndarray) -> np.ndarray:
    """
    Pack 8-component arrays into density matrices

    Args:
        x: array of shape (..., 8)

    Returns:
        Complex array of shape (..., 3, 3), Hermitian and unit-trace by construction
    """
    x = np.asarray(x, dtype=float)
    rho = np.zeros(x.shape[:-1] + (3, 3), dtype=complex)
    p22, p33 = x[..., 0], x[..., 1]
    r12 = _complex(x[..., 2], x[..., 3])
    r13 = _complex(x[..., 4], x[..., 5])
    r32 = _complex(x[..., 6], x[..., 7])

    rho[..., 0, 0] = 1.0 - p22 - p33
    rho[..., 1, 1] = p22
    rho[..., 2, 2] = p33
    rho[..., 0, 1] = r12
    rho[..., 1, 0] = np.conj(r12)
    rho[..., 0, 2] = r13
    rho[..., 2, 0] = np.conj(r13)
    rho[..., 2, 1] = r32
    rho[..., 1, 2] = np.conj(r32)
    return rho


def matrix_to_bloch(rho: np.ndarray) -> np.ndarray:
    """Extract the 8 independent components from (..., 3, 3) matrices"""
    rho = np.asarray(rho, dtype=complex)
    return np.stack([
        rho[..., 1, 1].real,
        rho[..., 2, 2].real,
        rho[..., 0, 1].real,
        rho[..., 0, 1].imag,
        rho[..., 0, 2].real,
        rho[..., 0, 2].imag,
        rho[..., 2, 1].real,
        rho[..., 2, 1].imag,
    ], axis=-1)


def from_bloch(v: BlochVector) -> DensityMatrix:
    """Build the density matrix with rho11 = 1 - p22 - p33 and rho23 = conj(rho32)"""
    return DensityMatrix(bloch_to_matrix(v.as_array()))


def to_bloch(rho: MatrixLike) -> BlochVector:
    """Back-extract the 8 components (exact inverse of from_bloch)"""
    return BlochVector.from_array(matrix_to_bloch(_as_array(rho)))


# ============================================================================
# SPECTRUM AND ENTROPY
# ============================================================================

def _check_hermitian(arr: np.ndarray) -> None:
    tolerance = config.numerics.hermitian_tolerance
    deviation = float(np.max(np.abs(arr - np.conj(np.swapaxes(arr, -1, -2))))) if arr.size else 0.0
    if deviation > tolerance:
        raise NonHermitianInput(deviation, tolerance)


def eigenvalues_hermitian3(rho: MatrixLike) -> Tuple[float, float, float]:
    """
    Spectrum of a 3x3 Hermitian matrix

    Args:
        rho: density matrix or 3x3 array, Hermitian within 1e-10 entrywise

    Returns:
        The three real eigenvalues in descending order
    """
    arr = _as_array(rho)
    _check_hermitian(arr)
    values = np.linalg.eigvalsh(arr)[::-1]
    return tuple(float(x) for x in values)


def _entropy_from_spectrum(values: np.ndarray, where: str = "") -> np.ndarray:
    window = config.numerics.clamp_window
    lowest = float(np.min(values)) if values.size else 0.0
    if lowest < -window:
        raise PositivityViolation(lowest, where)
    clamped = np.where(values < 0.0, 0.0, values)
    s = entr(clamped).sum(axis=-1)
    return np.maximum(s, 0.0)


def von_neumann_entropy(rho: MatrixLike) -> float:
    """
    Degree of entanglement S = -sum(lambda ln lambda) in nats

    Eigenvalues in [-1e-9, 0) are treated as roundoff and clamped to zero,
    0 ln 0 = 0.

    Raises:
        PositivityViolation: an eigenvalue lies below the clamp window
    """
    values = np.array(eigenvalues_hermitian3(rho))
    return float(_entropy_from_spectrum(values))


def entropies(stack: np.ndarray) -> np.ndarray:
    """Entropy of every matrix in a (N, 3, 3) stack"""
    stack = np.asarray(stack, dtype=complex)
    if stack.shape[0] == 0:
        return np.zeros(0)
    _check_hermitian(stack)
    values = np.linalg.eigvalsh(stack)
    return _entropy_from_spectrum(values, where="trajectory sample")


def min_eigenvalues(stack: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of every matrix in a (N, 3, 3) stack"""
    stack = np.asarray(stack, dtype=complex)
    if stack.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(stack)[..., 0]


def populations(rho: MatrixLike) -> Tuple[float, float, float]:
    """(rho11, rho22, rho33)"""
    arr = _as_array(rho)
    return tuple(float(x) for x in np.diagonal(arr).real)


def coherence_magnitudes(rho: MatrixLike) -> Tuple[float, float, float]:
    """(|rho12|, |rho13|, |rho23|)"""
    arr = _as_array(rho)
    return (float(abs(arr[0, 1])), float(abs(arr[0, 2])), float(abs(arr[1, 2])))
