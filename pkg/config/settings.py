"""
Global Configuration Settings
Numerical, sweep and output configuration for the V-type SGC entanglement simulator
"""
from dataclasses import dataclass
from enum import Enum
import os
from dotenv import load_dotenv

load_dotenv()

VERSION = "1.0.0"


class Command(str, Enum):
    """CLI commands"""
    EVOLVE = "evolve"
    STEADY = "steady"
    SWEEP = "sweep"
    PRESET = "preset"
    SELFTEST = "selftest"


class OutputFormat(str, Enum):
    """Supported output formats"""
    CSV = "csv"


@dataclass
class NumericsConfig:
    """Integrator, solver and positivity tolerances (time in units of 1/gamma)"""
    # Integration
    dt: float = float(os.getenv("VEE_SGC_DT", "1e-3"))
    stride: int = int(os.getenv("VEE_SGC_STRIDE", "100"))
    t_end: float = 50.0
    steady_t_end: float = 500.0  # evolve() cross-check horizon

    # Liouvillian
    degeneracy_ratio: float = 1e-8  # smallest / largest singular value
    residual_tolerance: float = 1e-10

    # Positivity
    clamp_window: float = 1e-9  # eigenvalues in [-clamp_window, 0) become 0
    positivity_floor: float = -1e-8
    hermitian_tolerance: float = 1e-10

    # Step guards
    population_guard: float = 0.01  # populations must stay in [-guard, 1 + guard]
    step_error_warn: float = 1e-6  # step-doubling probe threshold


@dataclass
class SweepConfig:
    """Parameter-grid evaluation"""
    workers: int = int(os.getenv("VEE_SGC_WORKERS", "1"))
    resolution: int = 201
    resolution_2d: int = 61
    omega_l_anchor: float = 0.1  # fixed Omega_L for omega_ratio axes


@dataclass
class OutputConfig:
    """Column-oriented output"""
    program: str = "vee-sgc"
    float_format: str = "%.17g"
    format: OutputFormat = OutputFormat.CSV


@dataclass
class SystemConfig:
    """Master system configuration"""
    numerics: NumericsConfig = None
    sweep: SweepConfig = None
    output: OutputConfig = None

    def __post_init__(self):
        if self.numerics is None:
            self.numerics = NumericsConfig()
        if self.sweep is None:
            self.sweep = SweepConfig()
        if self.output is None:
            self.output = OutputConfig()


# Global configuration instance
config = SystemConfig()


def update_workers(workers: int) -> None:
    """Update sweep worker pool width"""
    global config
    config.sweep.workers = max(1, int(workers))


def update_tolerances(degeneracy_ratio: float, clamp_window: float) -> None:
    """Update the Liouvillian degeneracy ratio and entropy clamp window"""
    global config
    config.numerics.degeneracy_ratio = float(degeneracy_ratio)
    config.numerics.clamp_window = float(clamp_window)
