"""
Dressed-Basis Analysis
Symmetric/antisymmetric excited-state basis, the published dressed equations and the
non-stationary special case (published closed forms next to numeric ground truth)
"""
import logging
import math
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import entr

from .dynamics import SystemParams, Trajectory, evolve, generator
from .errors import InvalidParameter
from .state import DensityMatrix, MatrixLike, min_eigenvalues

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# |1>, |psi> = (|2> + |3>)/sqrt2, |phi> = (|2> - |3>)/sqrt2; real, symmetric, its own inverse
DRESSED_U = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 1.0 / SQRT2, 1.0 / SQRT2],
    [0.0, 1.0 / SQRT2, -1.0 / SQRT2],
])

DRESSED_LABELS = ("1", "psi", "phi")

# Real coordinates of a Hermitian 3x3 matrix, used to itemize coefficient mismatches
HERMITIAN_COORDS = (
    ("11", 0, 0, "re"),
    ("psi_psi", 1, 1, "re"),
    ("phi_phi", 2, 2, "re"),
    ("re_1_psi", 0, 1, "re"),
    ("im_1_psi", 0, 1, "im"),
    ("re_1_phi", 0, 2, "re"),
    ("im_1_phi", 0, 2, "im"),
    ("re_psi_phi", 1, 2, "re"),
    ("im_psi_phi", 1, 2, "im"),
)


class Mode(str, Enum):
    """Output mode tags; numeric and published-formula rows are never mixed"""
    NUMERIC = "numeric"
    PAPER = "paper"


@dataclass(frozen=True)
class DressedBasisMatrix:
    """3x3 matrix in the {|1>, |psi>, |phi>} basis"""
    elements: np.ndarray

    def __post_init__(self):
        arr = np.array(self.elements, dtype=complex)
        if arr.shape != (3, 3):
            raise ValueError(f"dressed matrix must be 3x3, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    def __getitem__(self, index):
        return self.elements[index]

    @property
    def rho11(self) -> float:
        return float(self.elements[0, 0].real)

    @property
    def rho_psipsi(self) -> float:
        return float(self.elements[1, 1].real)

    @property
    def rho_phiphi(self) -> float:
        return float(self.elements[2, 2].real)

    @property
    def rho_1psi(self) -> complex:
        return complex(self.elements[0, 1])


def _elements(m) -> np.ndarray:
    if isinstance(m, (DensityMatrix, DressedBasisMatrix)):
        return m.elements
    return np.asarray(m, dtype=complex)


def to_dressed(rho: MatrixLike) -> DressedBasisMatrix:
    """U rho U^dagger"""
    return DressedBasisMatrix(DRESSED_U @ _elements(rho) @ DRESSED_U)


def from_dressed(m: DressedBasisMatrix) -> DensityMatrix:
    """Inverse of to_dressed"""
    return DensityMatrix(DRESSED_U @ _elements(m) @ DRESSED_U)


def to_dressed_stack(stack: np.ndarray) -> np.ndarray:
    """to_dressed over a (N, 3, 3) stack"""
    return DRESSED_U @ np.asarray(stack, dtype=complex) @ DRESSED_U


# ============================================================================
# PUBLISHED DRESSED EQUATIONS
# ============================================================================

def dressed_rhs_eq9(p: SystemParams, m: DressedBasisMatrix) -> DressedBasisMatrix:
    """
    Dressed-basis equations of motion exactly as published.

    The published form carries no delta_small term; rho11' = -(rho_phiphi' + rho_psipsi')
    and the lower triangle follows by conjugation.
    """
    e = _elements(m)
    m11, mpp, mff = e[0, 0], e[1, 1], e[2, 2]
    m1p, m1f, mpf = e[0, 1], e[0, 2], e[1, 2]
    mp1, mf1, mfp = e[1, 0], e[2, 0], e[2, 1]

    g_sum = p.gamma21 + p.gamma31
    g_diff = p.gamma21 - p.gamma31
    d_diff = p.delta_r - p.delta_l
    d_sum = p.delta_r + p.delta_l
    eta = p.eta
    s = eta * math.sin(p.phi) if eta else 0.0
    c = eta * math.cos(p.phi) if eta else 0.0
    w_plus = p.omega_r + p.omega_l
    w_minus = p.omega_r - p.omega_l

    d_pp = (-(g_sum + 2 * c) * mpp
            - ((g_sum + 1j * d_diff) / 2 + 1j * s) * mpf
            + (-(g_sum - 1j * d_diff) / 2 + 1j * s) * mfp
            + 1j * w_plus / SQRT2 * (m1p - mp1))
    d_ff = ((-g_sum + 2 * c) * mff
            - ((g_sum - 1j * d_diff) / 2 + 1j * s) * mfp
            + (-(g_sum + 1j * d_diff) / 2 + 1j * s) * mpf
            + 1j * w_minus / SQRT2 * (m1f - mf1))
    d_pf = ((-(g_diff + 1j * d_diff) / 2 + 1j * s) * mpp
            + (-(g_diff - 1j * d_diff) / 2 + 1j * s) * mff
            - g_sum * mpf
            + 1j * w_plus / SQRT2 * m1f
            - 1j * w_minus / SQRT2 * mp1)
    d_1p = (-((g_sum + 1j * d_sum) / 2 + c) * m1p
            - ((g_diff + 1j * d_diff) / 2 + 1j * s) * m1f
            + 1j * w_plus * (mpp - m11)
            + 1j * w_minus * mfp)
    d_1f = (-((g_diff + 1j * d_diff) / 2 + 1j * s) * m1f
            + (-(g_sum + 1j * d_sum) / 2 + c) * m1p
            + 1j * w_minus * (mff - m11)
            + 1j * w_plus * mpf)

    d = np.empty((3, 3), dtype=complex)
    d[1, 1] = d_pp
    d[2, 2] = d_ff
    d[0, 0] = -(d_ff + d_pp)
    d[0, 1], d[1, 0] = d_1p, np.conj(d_1p)
    d[0, 2], d[2, 0] = d_1f, np.conj(d_1f)
    d[1, 2], d[2, 1] = d_pf, np.conj(d_pf)
    return DressedBasisMatrix(d)


def dressed_generator(p: SystemParams, m: DressedBasisMatrix) -> DressedBasisMatrix:
    """Bare-basis equations of motion conjugated into the dressed basis"""
    bare = DRESSED_U @ _elements(m) @ DRESSED_U
    return DressedBasisMatrix(DRESSED_U @ generator(p, bare) @ DRESSED_U)


@dataclass
class Eq9Deviation:
    """A coefficient of the published dressed equations that differs from the conjugated bare equations"""
    output: str
    input: str
    published: float
    derived: float

    @property
    def magnitude(self) -> float:
        return abs(self.published - self.derived)

    def to_dict(self) -> Dict:
        return {**asdict(self), "magnitude": self.magnitude}


def _hermitian_basis_element(i: int, j: int, part: str) -> np.ndarray:
    m = np.zeros((3, 3), dtype=complex)
    if i == j:
        m[i, i] = 1.0
    elif part == "re":
        m[i, j] = m[j, i] = 1.0
    else:
        m[i, j] = 1j
        m[j, i] = -1j
    return m


def _coordinates(m: np.ndarray) -> np.ndarray:
    return np.array([m[i, j].real if part == "re" else m[i, j].imag for _, i, j, part in HERMITIAN_COORDS])


def coefficient_matrix(p: SystemParams, published: bool = True) -> np.ndarray:
    """
    Real 9x9 matrix of a dressed-basis map in the Hermitian coordinates;
    column k is the response to the k-th basis element
    """
    apply = dressed_rhs_eq9 if published else dressed_generator
    columns = []
    for _, i, j, part in HERMITIAN_COORDS:
        basis = DressedBasisMatrix(_hermitian_basis_element(i, j, part))
        columns.append(_coordinates(apply(p, basis).elements))
    return np.column_stack(columns)


def eq9_deviations(p: SystemParams, tolerance: float = 1e-12) -> List[Eq9Deviation]:
    """Itemize every (output, input) coefficient where the published equations disagree"""
    published = coefficient_matrix(p, published=True)
    derived = coefficient_matrix(p, published=False)
    names = [name for name, _, _, _ in HERMITIAN_COORDS]
    found = []
    for row, out_name in enumerate(names):
        for col, in_name in enumerate(names):
            if abs(published[row, col] - derived[row, col]) > tolerance:
                found.append(Eq9Deviation(
                    output=out_name, input=in_name,
                    published=float(published[row, col]), derived=float(derived[row, col]),
                ))
    logger.debug(f"dressed equations: {len(found)} deviating coefficients at {p}")
    return found


# ============================================================================
# NON-STATIONARY SPECIAL CASE: K_c = 1, phi = pi, equal fields
# ============================================================================

def special_case_params(omega0: float) -> SystemParams:
    return SystemParams(
        gamma21=1.0, gamma31=1.0, omega_r=omega0, omega_l=omega0,
        delta_r=0.0, delta_l=0.0, delta_small=0.0, phi=math.pi, kc=1.0,
    )


def special_case_rhs_eq10(omega0: float, m: DressedBasisMatrix) -> DressedBasisMatrix:
    """Reduced dressed equations of the special case, as published"""
    e = _elements(m)
    d_pp = 2j * omega0 / SQRT2 * (e[0, 1] - e[1, 0])
    d_1p = 2j * omega0 * (e[1, 1] - e[0, 0])

    d = np.zeros((3, 3), dtype=complex)
    d[1, 1] = d_pp
    d[0, 0] = -d_pp
    d[0, 1], d[1, 0] = d_1p, np.conj(d_1p)
    return DressedBasisMatrix(d)


def _phase(omega0: float, t: float) -> float:
    return 4.0 * omega0 * t / SQRT2


def special_case_trajectory_eq11(omega0: float, t: float) -> DressedBasisMatrix:
    """
    Published closed-form solution of the special case at time t.

    No positivity guarantee: |rho_1psi| reaches sqrt2/2 at a quarter period.
    """
    a = _phase(omega0, t)
    m = np.zeros((3, 3), dtype=complex)
    m[0, 0] = 0.5 * (1.0 + math.cos(a))
    m[1, 1] = 0.5 * (1.0 - math.cos(a))
    m[0, 1] = -1j * SQRT2 / 2.0 * math.sin(a)
    m[1, 0] = np.conj(m[0, 1])
    return DressedBasisMatrix(m)


def special_case_eigenvalues_eq12(omega0: float, t: float) -> Tuple[float, float]:
    """Published eigenvalues (lambda+, lambda-) of the special case"""
    a = _phase(omega0, t)
    root = math.sqrt(math.cos(a) ** 2 + SQRT2 * math.sin(a) ** 2)
    return (1.0 + root) / 2.0, (1.0 - root) / 2.0


def special_case_entropy_eq12(omega0: float, t: float, window: float = 1e-9) -> Tuple[float, bool]:
    """
    Entropy implied by the published eigenvalues

    Returns:
        (entropy, unphysical); entropy is NaN when lambda- < 0 or lambda+ > 1
    """
    lam_plus, lam_minus = special_case_eigenvalues_eq12(omega0, t)
    if lam_minus < -window or lam_plus > 1.0 + window:
        return float("nan"), True
    values = np.clip([lam_plus, lam_minus], 0.0, 1.0)
    return float(entr(values).sum()), False


@dataclass(frozen=True)
class DressedTrajectory:
    """Numeric special-case run with every sample transformed to the dressed basis"""
    trajectory: Trajectory
    dressed: np.ndarray  # (N, 3, 3)
    omega0: float

    @property
    def times(self) -> np.ndarray:
        return self.trajectory.times

    @property
    def rho11(self) -> np.ndarray:
        return self.dressed[:, 0, 0].real

    @property
    def rho_psipsi(self) -> np.ndarray:
        return self.dressed[:, 1, 1].real

    @property
    def rho_phiphi(self) -> np.ndarray:
        return self.dressed[:, 2, 2].real

    @property
    def rho_1psi(self) -> np.ndarray:
        return self.dressed[:, 0, 1]

    def sample(self, index: int) -> DressedBasisMatrix:
        return DressedBasisMatrix(self.dressed[index])


def special_case_numeric(
    omega0: float,
    t_end: Optional[float] = None,
    dt: Optional[float] = None,
    stride: Optional[int] = None,
) -> DressedTrajectory:
    """
    Numeric evolution of the special case from the ground state, sampled in
    the dressed basis. t_end defaults to 20 / omega0.
    """
    if omega0 <= 0:
        raise InvalidParameter(f"omega0 must be positive, got {omega0}")
    t_end = 20.0 / omega0 if t_end is None else t_end
    trajectory = evolve(special_case_params(omega0), t_end=t_end, dt=dt, stride=stride)
    return DressedTrajectory(
        trajectory=trajectory,
        dressed=to_dressed_stack(trajectory.matrices()),
        omega0=omega0,
    )


# ============================================================================
# OSCILLATION ANALYSIS
# ============================================================================

def oscillation_frequency(times: np.ndarray, signal: np.ndarray) -> Optional[float]:
    """
    Angular frequency from zero crossings of the signal about its mid-range

    Crossing times are linearly interpolated; None with fewer than two crossings.
    """
    times = np.asarray(times, dtype=float)
    signal = np.asarray(signal, dtype=float)
    centered = signal - 0.5 * (signal.max() + signal.min())
    sign = np.signbit(centered)
    idx = np.nonzero(sign[:-1] != sign[1:])[0]
    if len(idx) < 2:
        return None
    y0, y1 = centered[idx], centered[idx + 1]
    t0, t1 = times[idx], times[idx + 1]
    crossings = t0 - y0 * (t1 - t0) / (y1 - y0)
    half_period = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
    return math.pi / half_period


@dataclass(frozen=True)
class FrequencyComparison:
    """Measured special-case frequency tabulated against the published closed forms"""
    omega0: float
    measured: Optional[float]
    closed_form: float  # 4 omega0 / sqrt2
    reduced_equations: float  # 4 omega0 / 2^(1/4), implied by the published reduced couplings

    @property
    def closed_form_relative_error(self) -> Optional[float]:
        if self.measured is None:
            return None
        return abs(self.measured - self.closed_form) / self.closed_form

    @property
    def reduced_equations_relative_error(self) -> Optional[float]:
        if self.measured is None:
            return None
        return abs(self.measured - self.reduced_equations) / self.reduced_equations

    def matches(self, tolerance: float = 1e-3) -> Dict[str, bool]:
        a = self.closed_form_relative_error
        b = self.reduced_equations_relative_error
        return {
            "closed_form": a is not None and a <= tolerance,
            "reduced_equations": b is not None and b <= tolerance,
        }


def compare_frequencies(omega0: float, measured: Optional[float]) -> FrequencyComparison:
    return FrequencyComparison(
        omega0=omega0,
        measured=measured,
        closed_form=4.0 * omega0 / SQRT2,
        reduced_equations=4.0 * omega0 / 2.0 ** 0.25,
    )


@dataclass(frozen=True)
class SpecialCaseSummary:
    """Oscillation and physicality figures of a numeric special-case run"""
    frequency: FrequencyComparison
    peak_to_peak: float
    first_cycle_amplitude: float
    last_cycle_amplitude: float
    max_rho_phiphi: float
    max_abs_rho_1psi: float
    min_eigenvalue: float
    max_entropy: float
    max_trace_error: float


def summarize_special_case(run: DressedTrajectory) -> SpecialCaseSummary:
    """Frequency, cycle amplitudes and positivity figures of rho11(t)"""
    times, signal = run.times, run.rho11
    measured = oscillation_frequency(times, signal)
    comparison = compare_frequencies(run.omega0, measured)

    if measured is not None:
        period = 2.0 * math.pi / measured
        first = signal[times <= times[0] + period]
        last = signal[times >= times[-1] - period]
        first_amp = float(first.max() - first.min())
        last_amp = float(last.max() - last.min())
    else:
        first_amp = last_amp = float(signal.max() - signal.min())

    stack = run.trajectory.matrices()
    traces = np.trace(stack, axis1=-2, axis2=-1)
    summary = SpecialCaseSummary(
        frequency=comparison,
        peak_to_peak=float(signal.max() - signal.min()),
        first_cycle_amplitude=first_amp,
        last_cycle_amplitude=last_amp,
        max_rho_phiphi=float(np.max(np.abs(run.rho_phiphi))),
        max_abs_rho_1psi=float(np.max(np.abs(run.rho_1psi))),
        min_eigenvalue=float(np.min(min_eigenvalues(stack))),
        max_entropy=float(np.max(run.trajectory.entropy)),
        max_trace_error=float(np.max(np.abs(traces - 1.0))),
    )
    logger.info(
        f"special case omega0={run.omega0:g}: measured {measured}, "
        f"closed form {comparison.closed_form:.6g}, reduced equations {comparison.reduced_equations:.6g}"
    )
    return summary
