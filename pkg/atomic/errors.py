"""
Simulator Errors
Exception hierarchy shared by the physics core, the sweep engine and the CLI
"""
from typing import Optional, Tuple


class VeeSgcError(Exception):
    """Base class for all simulator errors"""
    exit_code: int = 1


# ============================================================================
# PHYSICS ERRORS (exit code 1)
# ============================================================================

class PhysicsError(VeeSgcError):
    """A numerical or physical condition prevented a result"""
    exit_code = 1


class PositivityViolation(PhysicsError):
    """An eigenvalue of a simulated density matrix fell below the clamp window"""

    def __init__(self, min_eigenvalue: float, where: str = ""):
        self.min_eigenvalue = float(min_eigenvalue)
        self.where = where
        suffix = f" ({where})" if where else ""
        super().__init__(f"density matrix eigenvalue {self.min_eigenvalue:.3e} below clamp window{suffix}")


class StepTooLarge(PhysicsError):
    """A population left [-0.01, 1.01] during integration"""

    def __init__(self, time: float, populations: Tuple[float, float, float], dt: float):
        self.time = float(time)
        self.populations = tuple(float(p) for p in populations)
        self.dt = float(dt)
        super().__init__(
            f"population {self.populations} out of range at t={self.time:g} with dt={self.dt:g}; reduce dt"
        )


class DegenerateLiouvillian(PhysicsError):
    """The reduced generator is singular: no unique stationary state exists"""

    def __init__(self, smallest_singular_values: Tuple[float, float], largest: float):
        self.smallest_singular_values = tuple(float(s) for s in smallest_singular_values)
        self.largest = float(largest)
        super().__init__(
            "no stationary solution: smallest singular values "
            f"{self.smallest_singular_values[0]:.3e}, {self.smallest_singular_values[1]:.3e} "
            f"(largest {self.largest:.3e})"
        )


class DegenerateDenominator(PhysicsError):
    """The shared denominator of the analytic steady state vanishes"""

    def __init__(self, denominator: complex):
        self.denominator = denominator
        super().__init__(f"analytic steady-state denominator vanishes (|D| = {abs(denominator):.3e})")


# ============================================================================
# USAGE ERRORS (exit code 2)
# ============================================================================

class UsageError(VeeSgcError):
    """Invalid input supplied by the caller"""
    exit_code = 2


class InvalidParameter(UsageError):
    """A physical parameter is outside its domain"""


class NonHermitianInput(UsageError):
    """Matrix handed to the Hermitian eigen-solver is not Hermitian"""

    def __init__(self, deviation: float, tolerance: float):
        self.deviation = float(deviation)
        self.tolerance = float(tolerance)
        super().__init__(f"matrix is not Hermitian: max |A - A^H| = {self.deviation:.3e} > {self.tolerance:.1e}")


class UnknownPreset(UsageError):
    """Requested figure preset does not exist"""

    def __init__(self, name: str, known: Tuple[str, ...] = ()):
        self.name = name
        hint = f"; known presets: {', '.join(known)}" if known else ""
        super().__init__(f"unknown preset '{name}'{hint}")


class ParseError(UsageError):
    """Configuration text or flag could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None, flag: Optional[str] = None):
        self.line = line
        self.flag = flag
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif flag is not None:
            where = f"{flag}: "
        super().__init__(f"{where}{message}")


class UnknownKey(ParseError):
    """Configuration key is not recognised"""

    def __init__(self, key: str, line: Optional[int] = None, flag: Optional[str] = None):
        self.key = key
        super().__init__(f"unknown key '{key}'", line=line, flag=flag)


class NonFiniteValue(ParseError):
    """Configuration value is NaN or infinite"""

    def __init__(self, key: str, line: Optional[int] = None, flag: Optional[str] = None):
        self.key = key
        super().__init__(f"value for '{key}' must be finite", line=line, flag=flag)


class OutputError(UsageError):
    """Result could not be written"""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"cannot write {path}: {reason}")
