"""
Density-Matrix Equations of Motion
Driven V-type atom with spontaneously generated coherence: RHS, RK4 integration, trajectories
"""
import logging
import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, asdict, replace
from typing import Callable, Dict, Iterator, Optional, Tuple

import numpy as np

from config.settings import config
from .errors import InvalidParameter, StepTooLarge
from .state import (
    BlochVector,
    DensityMatrix,
    MatrixLike,
    bloch_to_matrix,
    entropies,
    ground_state,
    matrix_to_bloch,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Sodium D-line numbers; the core works in units of gamma = 1
GAMMA_SI = 2.0 * math.pi * 9.79e6  # rad/s
OMEGA32_GAMMA = 0.2  # excited doublet splitting, enters no equation

PARAM_FIELDS = (
    "gamma21", "gamma31", "omega_r", "omega_l",
    "delta_r", "delta_l", "delta_small", "phi", "kc",
)

# Sign applied to the SGC cross-term of the rho12 line; flipped only by perturbed_rhs()
_rho12_sgc_sign: ContextVar[float] = ContextVar("rho12_sgc_sign", default=1.0)


@dataclass(frozen=True)
class SystemParams:
    """
    Physical parameters in units of gamma.

    Rabi frequencies are real; phi = phi_R - phi_L is reduced to [0, 2pi).
    """
    gamma21: float = 1.0
    gamma31: float = 1.0
    omega_r: float = 0.1
    omega_l: float = 0.1
    delta_r: float = 0.0
    delta_l: float = 0.0
    delta_small: float = 0.0
    phi: float = 0.0
    kc: float = 0.0

    def __post_init__(self):
        for name in PARAM_FIELDS:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParameter(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

        if self.gamma21 <= 0 or self.gamma31 <= 0:
            raise InvalidParameter(f"decay rates must be positive (gamma21={self.gamma21}, gamma31={self.gamma31})")
        if not 0.0 <= self.kc <= 1.0:
            raise InvalidParameter(f"kc must lie in [0, 1], got {self.kc}")
        if self.omega_r < 0 or self.omega_l < 0:
            raise InvalidParameter(f"Rabi frequencies must be non-negative (omega_r={self.omega_r}, omega_l={self.omega_l})")

        phi = self.phi % TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @property
    def eta(self) -> float:
        """Interference strength K_c sqrt(gamma21 gamma31)"""
        return self.kc * math.sqrt(self.gamma21 * self.gamma31)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped Bloch vectors plus per-sample entropy and populations"""
    times: np.ndarray  # (N,), units of 1/gamma
    states: np.ndarray  # (N, 8)
    entropy: np.ndarray  # (N,), nats
    populations: np.ndarray  # (N, 3): rho11, rho22, rho33
    params: SystemParams
    dt: float

    def __len__(self) -> int:
        return len(self.times)

    def state(self, index: int) -> BlochVector:
        return BlochVector.from_array(self.states[index])

    @property
    def final(self) -> BlochVector:
        return self.state(-1)

    def matrices(self) -> np.ndarray:
        return bloch_to_matrix(self.states)


# ============================================================================
# RIGHT-HAND SIDE
# ============================================================================

def _sgc_factors(p: SystemParams) -> Tuple[complex, complex]:
    """(eta e^{-i phi}, eta e^{+i phi}); exact zeros when interference is off"""
    eta = p.eta
    if eta == 0.0:
        return 0j, 0j
    return eta * complex(math.cos(p.phi), -math.sin(p.phi)), eta * complex(math.cos(p.phi), math.sin(p.phi))


def generator(p: SystemParams, rho: MatrixLike) -> np.ndarray:
    """
    Time derivative of the full 3x3 density matrix.

    The lower triangle is filled by Hermiticity and rho11' = -(rho22' + rho33').

    Args:
        p: system parameters
        rho: density matrix

    Returns:
        3x3 complex derivative
    """
    r = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    em, ep = _sgc_factors(p)
    sign12 = _rho12_sgc_sign.get()

    r11, r22, r33 = r[0, 0], r[1, 1], r[2, 2]
    r12, r13, r32 = r[0, 1], r[0, 2], r[2, 1]
    r21, r31, r23 = r[1, 0], r[2, 0], r[1, 2]
    wr, wl = p.omega_r, p.omega_l

    cross = em * r23 + ep * r32
    d22 = -2.0 * p.gamma21 * r22 + 1j * wr * (r12 - r21) - cross
    d33 = -2.0 * p.gamma31 * r33 + 1j * wl * (r13 - r31) - cross
    d12 = (-(p.gamma21 + 1j * p.delta_r) * r12 + 1j * wr * (r22 - r11)
           + 1j * wl * r32 - sign12 * em * r13)
    d13 = (-(p.gamma31 - 1j * (p.delta_small - p.delta_l)) * r13 + 1j * wl * (r33 - r11)
           + 1j * wr * r23 - ep * r12)
    d32 = (-(p.gamma21 + p.gamma31 + 1j * (p.delta_r - p.delta_l + p.delta_small)) * r32
           + 1j * wl * r12 - 1j * wr * r31 - em * (r22 + r33))

    d = np.empty((3, 3), dtype=complex)
    d[1, 1] = d22.real
    d[2, 2] = d33.real
    d[0, 0] = -(d[1, 1] + d[2, 2])
    d[0, 1], d[1, 0] = d12, np.conj(d12)
    d[0, 2], d[2, 0] = d13, np.conj(d13)
    d[2, 1], d[1, 2] = d32, np.conj(d32)
    return d


def rhs_array(p: SystemParams, x: np.ndarray) -> np.ndarray:
    """rhs() on a raw 8-component array"""
    return matrix_to_bloch(generator(p, bloch_to_matrix(x)))


def rhs(p: SystemParams, v: BlochVector) -> BlochVector:
    """
    Derivative of the eight independent components

    rho11 is eliminated through the closure relation and rho23 = conj(rho32).
    """
    return BlochVector.from_array(rhs_array(p, v.as_array()))


@contextmanager
def perturbed_rhs(sign_flip: bool = True) -> Iterator[None]:
    """Flip the sign of the SGC cross-term in the rho12 line (negative-control hook)"""
    token = _rho12_sgc_sign.set(-1.0 if sign_flip else 1.0)
    try:
        yield
    finally:
        _rho12_sgc_sign.reset(token)


# ============================================================================
# INTEGRATION
# ============================================================================

def rk4_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta step for an autonomous field"""
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def one_step_map(p: SystemParams, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tabulate one RK4 step as the affine map x -> M x + c.

    The field is affine in x, so the step is too; M and c follow from stepping
    the origin and the unit vectors.
    """
    f = lambda x: rhs_array(p, x)
    origin = np.zeros(8)
    c = rk4_step(f, origin, dt)
    M = np.empty((8, 8))
    for k in range(8):
        e = np.zeros(8)
        e[k] = 1.0
        M[:, k] = rk4_step(f, e, dt) - c
    return M, c


def step_doubling_error(p: SystemParams, x: np.ndarray, dt: float) -> float:
    """max |one step of dt - two steps of dt/2|"""
    f = lambda y: rhs_array(p, y)
    full = rk4_step(f, x, dt)
    half = rk4_step(f, rk4_step(f, x, 0.5 * dt), 0.5 * dt)
    return float(np.max(np.abs(full - half)))


def _check_populations(x: np.ndarray, step: int, dt: float) -> None:
    guard = config.numerics.population_guard
    p22, p33 = x[0], x[1]
    p11 = 1.0 - p22 - p33
    lo, hi = -guard, 1.0 + guard
    if not (lo <= p11 <= hi and lo <= p22 <= hi and lo <= p33 <= hi):
        raise StepTooLarge(step * dt, (p11, p22, p33), dt)


def _integrate(
    p: SystemParams,
    x0: np.ndarray,
    n_steps: int,
    dt: float,
    sample_steps: np.ndarray,
) -> np.ndarray:
    M, c = one_step_map(p, dt)
    out = np.empty((len(sample_steps), 8))
    x = np.array(x0, dtype=float)
    slot = 0
    if sample_steps[0] == 0:
        out[0] = x
        slot = 1
    for step in range(1, n_steps + 1):
        x = M @ x + c
        _check_populations(x, step, dt)
        if slot < len(sample_steps) and sample_steps[slot] == step:
            out[slot] = x
            slot += 1
    return out


def evolve(
    p: SystemParams,
    v0: Optional[BlochVector] = None,
    t_end: Optional[float] = None,
    dt: Optional[float] = None,
    stride: Optional[int] = None,
) -> Trajectory:
    """
    Integrate the equations of motion with fixed-step RK4

    Args:
        p: system parameters
        v0: initial state, ground state by default
        t_end: final time in units of 1/gamma
        dt: step size
        stride: record every `stride` steps (the final step is always recorded)

    Returns:
        Trajectory with entropy and populations per sample

    Raises:
        StepTooLarge: a population left [-0.01, 1.01]
        PositivityViolation: a sampled state is not positive semidefinite
    """
    numerics = config.numerics
    v0 = v0 if v0 is not None else ground_state()
    t_end = numerics.t_end if t_end is None else float(t_end)
    dt = numerics.dt if dt is None else float(dt)
    stride = numerics.stride if stride is None else int(stride)

    if not (math.isfinite(t_end) and t_end > 0):
        raise InvalidParameter(f"t_end must be positive, got {t_end}")
    if not (math.isfinite(dt) and dt > 0):
        raise InvalidParameter(f"dt must be positive, got {dt}")
    if dt > t_end:
        raise InvalidParameter(f"dt={dt} exceeds t_end={t_end}")
    if stride < 1:
        raise InvalidParameter(f"stride must be >= 1, got {stride}")

    n_steps = max(1, int(round(t_end / dt)))
    sample_steps = np.arange(0, n_steps + 1, stride)
    if sample_steps[-1] != n_steps:
        sample_steps = np.append(sample_steps, n_steps)

    x0 = v0.as_array()
    probe = step_doubling_error(p, x0, dt)
    if probe > numerics.step_error_warn:
        logger.warning(f"step-doubling error {probe:.2e} at t=0 exceeds {numerics.step_error_warn:.0e}; consider a smaller dt")
    else:
        logger.debug(f"step-doubling error {probe:.2e} at t=0")

    states = _integrate(p, x0, n_steps, dt, sample_steps)
    matrices = bloch_to_matrix(states)
    logger.debug(f"evolved {n_steps} steps of dt={dt:g}, {len(sample_steps)} samples")

    return Trajectory(
        times=sample_steps * dt,
        states=states,
        entropy=entropies(matrices),
        populations=np.real(np.diagonal(matrices, axis1=-2, axis2=-1)).copy(),
        params=p,
        dt=dt,
    )


# ============================================================================
# INTEGRATOR SELF-CHECK
# ============================================================================

@dataclass(frozen=True)
class ConvergenceReport:
    """Measured RK4 order from runs at dt, dt/2 and dt/4"""
    order: Optional[float]
    exact: bool
    differences: Tuple[float, float]
    dt: float
    t_end: float

    def to_dict(self) -> Dict:
        return asdict(self)


def _final_state(p: SystemParams, x0: np.ndarray, dt: float, n_steps: int) -> np.ndarray:
    M, c = one_step_map(p, dt)
    x = np.array(x0, dtype=float)
    for _ in range(n_steps):
        x = M @ x + c
    return x


def convergence_order_check(
    p: SystemParams,
    v0: Optional[BlochVector] = None,
    dt: float = 0.02,
    t_end: float = 5.0,
) -> ConvergenceReport:
    """
    Richardson-style order estimate of the integrator

    The difference between dt and dt/2 solutions shrinks by 2^order when the
    step is halved again.

    Returns:
        ConvergenceReport; exact=True when the differences sit at roundoff
    """
    x0 = (v0 if v0 is not None else ground_state()).as_array()
    n = max(1, int(round(t_end / dt)))
    coarse = _final_state(p, x0, dt, n)
    mid = _final_state(p, x0, dt / 2.0, 2 * n)
    fine = _final_state(p, x0, dt / 4.0, 4 * n)

    d1 = float(np.max(np.abs(coarse - mid)))
    d2 = float(np.max(np.abs(mid - fine)))
    if d1 < 1e-14:
        logger.debug("convergence check: differences at roundoff, integration is exact")
        return ConvergenceReport(order=None, exact=True, differences=(d1, d2), dt=dt, t_end=n * dt)

    order = math.log2(d1 / d2) if d2 > 0 else math.inf
    logger.debug(f"convergence check: d1={d1:.3e} d2={d2:.3e} order={order:.3f}")
    return ConvergenceReport(order=order, exact=False, differences=(d1, d2), dt=dt, t_end=n * dt)


def to_si_time(t_gamma: float) -> float:
    """Convert a time in units of 1/gamma to seconds"""
    return float(t_gamma) / GAMMA_SI
