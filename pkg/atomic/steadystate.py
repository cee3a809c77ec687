"""
Steady-State Solutions
Liouvillian null-space solve, the weak-field analytic oracle and degeneracy detection
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svdvals

from config.settings import config
from .dynamics import SystemParams, rhs_array
from .errors import DegenerateDenominator, DegenerateLiouvillian, PositivityViolation
from .state import (
    BlochVector,
    DensityMatrix,
    bloch_to_matrix,
    from_bloch,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-12

# Weak-field grid on which the analytic oracle is compared against the numeric solve
ORACLE_OMEGAS = (0.05, 0.1, 0.2)
ORACLE_KCS = (0.0, 0.3, 0.5, 0.9)
ORACLE_PHIS = (0.0, math.pi / 6, math.pi / 2, math.pi, 4 * math.pi / 3)


@dataclass(frozen=True)
class Liouvillian:
    """Affine generator d(v)/dt = A v + b on the eight Bloch components"""
    A: np.ndarray
    b: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.b


@dataclass(frozen=True)
class SteadyStateReport:
    """Outcome of a steady-state solve"""
    state: Optional[BlochVector]
    residual: Optional[float]
    degenerate: bool
    smallest_singular_values: Tuple[float, float]
    largest_singular_value: float
    params: Optional[SystemParams] = None

    @property
    def matrix(self) -> Optional[DensityMatrix]:
        return from_bloch(self.state) if self.state is not None else None

    @property
    def entropy(self) -> Optional[float]:
        return von_neumann_entropy(self.matrix) if self.state is not None else None


def build_liouvillian(p: SystemParams) -> Liouvillian:
    """
    Vectorize the equations of motion by probing rhs on the unit vectors

    Args:
        p: system parameters

    Returns:
        Liouvillian with rhs(p, v) = A v + b
    """
    b = rhs_array(p, np.zeros(8))
    A = np.empty((8, 8))
    for k in range(8):
        e = np.zeros(8)
        e[k] = 1.0
        A[:, k] = rhs_array(p, e) - b
    return Liouvillian(A=A, b=b)


def solve_steady(p: SystemParams, strict: bool = True) -> SteadyStateReport:
    """
    Stationary state from A v = -b

    A singular-value pre-check flags the non-stationary regime: smallest
    singular value below degeneracy_ratio times the largest.

    Args:
        p: system parameters
        strict: raise on degeneracy instead of returning a flagged report

    Returns:
        SteadyStateReport

    Raises:
        DegenerateLiouvillian: A is (near-)singular and strict is set
        PositivityViolation: the solved state is not positive semidefinite
    """
    numerics = config.numerics
    L = build_liouvillian(p)
    sv = svdvals(L.A)
    largest = float(sv[0])
    smallest = (float(sv[-1]), float(sv[-2]))

    if smallest[0] < numerics.degeneracy_ratio * largest:
        logger.info(f"degenerate Liouvillian: sigma_min={smallest[0]:.3e}, sigma_max={largest:.3e}")
        if strict:
            raise DegenerateLiouvillian(smallest, largest)
        return SteadyStateReport(
            state=None, residual=None, degenerate=True,
            smallest_singular_values=smallest, largest_singular_value=largest, params=p,
        )

    x = np.linalg.solve(L.A, -L.b)
    residual = float(np.max(np.abs(rhs_array(p, x))))
    if residual > numerics.residual_tolerance:
        logger.warning(f"steady-state residual {residual:.3e} above {numerics.residual_tolerance:.0e}")

    lowest = float(np.linalg.eigvalsh(bloch_to_matrix(x))[0])
    if lowest < numerics.positivity_floor:
        raise PositivityViolation(lowest, "steady state")

    logger.debug(f"steady state solved: residual={residual:.2e}, cond~{largest / smallest[0]:.2e}")
    return SteadyStateReport(
        state=BlochVector.from_array(x), residual=residual, degenerate=False,
        smallest_singular_values=smallest, largest_singular_value=largest, params=p,
    )


# ============================================================================
# WEAK-FIELD ANALYTIC ORACLE
# ============================================================================

def analytic_steady_eq3(omega0: float, phi: float, kc: float) -> DensityMatrix:
    """
    Weak-field analytic steady state for gamma21 = gamma31 = 1, zero detunings
    and equal Rabi frequencies Omega_R = Omega_L = omega0.

    Evaluated term by term as published, e^{+-i phi} factors included.

    Raises:
        DegenerateDenominator: |shared denominator| < 1e-12
    """
    w2 = omega0 ** 2
    k2 = kc ** 2
    cos_phi = math.cos(phi)
    e_plus = cmath.exp(1j * phi)
    e_minus = cmath.exp(-1j * phi)

    denominator = (kc * w2 * (7 + 4 * w2 + k2) * cos_phi
                   - k2 * (k2 - 2 + 3 * w2) - w2 - (1 + 2 * w2) ** 2)
    if abs(denominator) < DENOMINATOR_FLOOR:
        raise DegenerateDenominator(denominator)
    denominator_12 = (2 * kc * w2 * (7 + 4 * w2 + k2) * cos_phi
                      - 2 * k2 * (k2 - 2 + 3 * w2) - 2 * w2 - 2 * (1 + 2 * w2) ** 2)

    rho22 = w2 * (kc * (2 + w2) * cos_phi - w2 - (1 + k2)) / denominator
    rho12 = (-1j * omega0 * (kc * (2 * w2 * kc * cos_phi - (w2 + 2 * (k2 - 1))) * e_minus
                             + kc * w2 * e_plus + 2 * ((k2 - 1) - w2))) / denominator_12
    rho23 = w2 * (w2 * kc * cos_phi - kc * e_plus * (kc * e_plus - 2) - (1 + w2)) / denominator

    rho = np.zeros((3, 3), dtype=complex)
    rho[1, 1] = rho22
    rho[2, 2] = rho22
    rho[0, 0] = 1.0 - 2.0 * rho22
    rho[0, 1] = rho[0, 2] = rho12
    rho[1, 0] = rho[2, 0] = np.conj(rho12)
    rho[1, 2] = rho23
    rho[2, 1] = np.conj(rho23)
    return DensityMatrix(rho)


def oracle_params(omega0: float, phi: float, kc: float) -> SystemParams:
    """Parameter point on which the analytic oracle is defined"""
    return SystemParams(
        gamma21=1.0, gamma31=1.0, omega_r=omega0, omega_l=omega0,
        delta_r=0.0, delta_l=0.0, delta_small=0.0, phi=phi, kc=kc,
    )


ORACLE_ELEMENTS = {
    "rho11": (0, 0), "rho22": (1, 1), "rho33": (2, 2),
    "rho12": (0, 1), "rho13": (0, 2), "rho23": (1, 2),
}


@dataclass
class OracleDeviation:
    """One matrix element on which analytic and numeric steady states disagree"""
    omega0: float
    kc: float
    phi: float
    element: str
    analytic: complex
    numeric: complex
    magnitude: float

    def to_dict(self) -> Dict:
        return {
            "omega0": self.omega0,
            "kc": self.kc,
            "phi": self.phi,
            "element": self.element,
            "analytic": self.analytic,
            "numeric": self.numeric,
            "magnitude": self.magnitude,
        }


@dataclass
class OracleComparison:
    """Analytic-vs-numeric comparison over a parameter grid"""
    points: int = 0
    deviations: List[OracleDeviation] = field(default_factory=list)
    max_error_agreeing: float = 0.0

    @property
    def deviating_points(self) -> List[Tuple[float, float, float]]:
        seen = []
        for d in self.deviations:
            key = (d.omega0, d.kc, d.phi)
            if key not in seen:
                seen.append(key)
        return seen


def oracle_deviations(
    omegas: Sequence[float] = ORACLE_OMEGAS,
    kcs: Sequence[float] = ORACLE_KCS,
    phis: Sequence[float] = ORACLE_PHIS,
    tolerance: float = 1e-6,
) -> OracleComparison:
    """
    Compare the analytic oracle against solve_steady on a grid and itemize
    every element that differs by more than `tolerance`
    """
    comparison = OracleComparison()
    for omega0 in omegas:
        for kc in kcs:
            for phi in phis:
                analytic = analytic_steady_eq3(omega0, phi, kc).elements
                numeric = solve_steady(oracle_params(omega0, phi, kc)).matrix.elements
                comparison.points += 1

                point_deviations = []
                for name, (i, j) in ORACLE_ELEMENTS.items():
                    magnitude = float(abs(analytic[i, j] - numeric[i, j]))
                    if magnitude > tolerance:
                        point_deviations.append(OracleDeviation(
                            omega0=omega0, kc=kc, phi=phi, element=name,
                            analytic=complex(analytic[i, j]), numeric=complex(numeric[i, j]),
                            magnitude=magnitude,
                        ))
                if point_deviations:
                    comparison.deviations.extend(point_deviations)
                else:
                    error = float(np.max(np.abs(analytic - numeric)))
                    comparison.max_error_agreeing = max(comparison.max_error_agreeing, error)

    logger.info(
        f"analytic oracle: {comparison.points} points, "
        f"{len(comparison.deviating_points)} deviating, max agreeing error {comparison.max_error_agreeing:.2e}"
    )
    return comparison
