"""
Parameter Sweep Engine
Deterministic grid evaluation of steady-state and transient observables
"""
import hashlib
import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import VERSION, config
from atomic.dynamics import PARAM_FIELDS, SystemParams, Trajectory, evolve
from atomic.errors import InvalidParameter, ParseError, VeeSgcError
from atomic.state import coherence_magnitudes, populations, von_neumann_entropy
from atomic.steadystate import solve_steady

logger = logging.getLogger(__name__)

DERIVED_AXES = ("omega_ratio", "delta")
AXIS_NAMES = PARAM_FIELDS + DERIVED_AXES


class Observable(str, Enum):
    """Per-point quantities a sweep can record"""
    ENTROPY = "entropy"
    POPULATIONS = "populations"
    COHERENCES = "coherences"


class SweepMode(str, Enum):
    """Steady-state solve or transient evolution per grid point"""
    STEADY = "steady"
    TRANSIENT = "transient"


OBSERVABLE_COLUMNS = {
    Observable.ENTROPY: ("entropy_nats",),
    Observable.POPULATIONS: ("rho11", "rho22", "rho33"),
    Observable.COHERENCES: ("abs_rho12", "abs_rho13", "abs_rho23"),
}


@dataclass(frozen=True)
class Axis:
    """A named parameter range: a linear grid or caption-listed points"""
    name: str
    values: Tuple[float, ...]
    spacing: str = "points"  # "linspace" or "points"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise InvalidParameter(f"unknown axis '{self.name}'; expected one of {', '.join(AXIS_NAMES)}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise InvalidParameter(f"axis '{self.name}' has no points")
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameter(f"axis '{self.name}' contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def linspace(cls, name: str, lo: float, hi: float, n: int) -> "Axis":
        if int(n) < 2:
            raise InvalidParameter(f"linear axis '{name}' needs at least 2 points, got {n}")
        return cls(name, tuple(np.linspace(float(lo), float(hi), int(n)).tolist()), "linspace")

    @classmethod
    def points(cls, name: str, values: Sequence[float]) -> "Axis":
        return cls(name, tuple(values), "points")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """
        Parse `name:linspace:lo:hi:n` or `name:points:v1,v2,...`
        """
        parts = text.strip().split(":")
        try:
            if len(parts) == 5 and parts[1] == "linspace":
                return cls.linspace(parts[0], float(parts[2]), float(parts[3]), int(parts[4]))
            if len(parts) == 3 and parts[1] == "points":
                return cls.points(parts[0], [float(v) for v in parts[2].split(",") if v.strip()])
        except ValueError as e:
            raise ParseError(f"bad axis '{text}': {e}")
        raise ParseError(f"bad axis '{text}': expected name:linspace:lo:hi:n or name:points:v1,v2,...")

    def describe(self) -> str:
        if self.spacing == "linspace":
            return f"{self.name}:linspace:{self.values[0]!r}:{self.values[-1]!r}:{len(self.values)}"
        return f"{self.name}:points:" + ",".join(repr(v) for v in self.values)

    def __len__(self) -> int:
        return len(self.values)


def parse_axes(text: str) -> Tuple[Axis, ...]:
    """Semicolon-separated axis descriptors"""
    return tuple(Axis.parse(part) for part in text.split(";") if part.strip())


def describe_axes(axes: Sequence[Axis]) -> str:
    return ";".join(axis.describe() for axis in axes)


@dataclass(frozen=True)
class SweepSpec:
    """Base parameters, 1 or 2 axes, observables and evaluation mode"""
    base: SystemParams
    axes: Tuple[Axis, ...]
    observables: Tuple[Observable, ...] = (Observable.ENTROPY,)
    mode: SweepMode = SweepMode.STEADY
    t_end: Optional[float] = None
    dt: Optional[float] = None
    stride: Optional[int] = None
    omega_l_anchor: float = field(default_factory=lambda: config.sweep.omega_l_anchor)
    label: str = ""

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 2:
            raise InvalidParameter(f"a sweep takes 1 or 2 axes, got {len(axes)}")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise InvalidParameter(f"duplicate sweep axes: {names}")
        observables = tuple(Observable(o) for o in self.observables)
        if not observables:
            raise InvalidParameter("a sweep needs at least one observable")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "observables", observables)
        object.__setattr__(self, "mode", SweepMode(self.mode))

    @property
    def size(self) -> int:
        return int(np.prod([len(a) for a in self.axes]))

    def grid(self) -> List[Tuple[float, ...]]:
        """Grid coordinates, row-major over the axes"""
        return list(itertools.product(*(a.values for a in self.axes)))

    def params_at(self, coords: Sequence[float]) -> SystemParams:
        changes: Dict[str, float] = {}
        for axis, value in zip(self.axes, coords):
            if axis.name == "omega_ratio":
                changes["omega_l"] = self.omega_l_anchor
                changes["omega_r"] = value * self.omega_l_anchor
            elif axis.name == "delta":
                changes["delta_r"] = value
                changes["delta_l"] = value
            else:
                changes[axis.name] = value
        return self.base.replace(**changes)

    def columns(self) -> Tuple[str, ...]:
        return tuple(c for o in self.observables for c in OBSERVABLE_COLUMNS[o])

    def to_dict(self) -> Dict:
        return {
            "base": self.base.to_dict(),
            "axes": [{"name": a.name, "spacing": a.spacing, "values": list(a.values)} for a in self.axes],
            "observables": [o.value for o in self.observables],
            "mode": self.mode.value,
            "t_end": self.t_end,
            "dt": self.dt,
            "stride": self.stride,
            "omega_l_anchor": self.omega_l_anchor,
        }


def spec_hash(spec: SweepSpec) -> str:
    """SHA-256 of the canonical JSON encoding of a spec"""
    canonical = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def specs_hash(specs: Sequence[SweepSpec]) -> str:
    """Hash of an ordered list of specs; equals spec_hash for a single spec"""
    if len(specs) == 1:
        return spec_hash(specs[0])
    joined = ",".join(spec_hash(s) for s in specs)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


@dataclass
class SweepPoint:
    """One grid point: observable values, or a degenerate/error flag"""
    index: int
    coords: Tuple[float, ...]
    values: Dict[str, float] = field(default_factory=dict)
    degenerate: bool = False
    error: Optional[str] = None
    trajectory: Optional[Trajectory] = None

    @property
    def ok(self) -> bool:
        return not self.degenerate and self.error is None


@dataclass
class SweepResult:
    """Ordered per-point records plus provenance"""
    spec: SweepSpec
    points: List[SweepPoint]
    version: str = VERSION
    timestamp: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def values(self, column: str) -> np.ndarray:
        """Column of a steady sweep as an array; NaN at flagged points"""
        return np.array([p.values.get(column, np.nan) for p in self.points], dtype=float)

    def provenance(self) -> Dict[str, str]:
        return {
            "spec_hash": spec_hash(self.spec),
            "axes": describe_axes(self.spec.axes),
            "observables": ",".join(o.value for o in self.spec.observables),
            "sweep_mode": self.spec.mode.value,
            "omega_l_anchor": repr(self.spec.omega_l_anchor),
        }


# ============================================================================
# EVALUATION
# ============================================================================

def _observables(spec: SweepSpec, rho) -> Dict[str, float]:
    values: Dict[str, float] = {}
    if Observable.ENTROPY in spec.observables:
        values["entropy_nats"] = von_neumann_entropy(rho)
    if Observable.POPULATIONS in spec.observables:
        values.update(zip(OBSERVABLE_COLUMNS[Observable.POPULATIONS], populations(rho)))
    if Observable.COHERENCES in spec.observables:
        values.update(zip(OBSERVABLE_COLUMNS[Observable.COHERENCES], coherence_magnitudes(rho)))
    return values


def evaluate_point(spec: SweepSpec, index: int, coords: Tuple[float, ...]) -> SweepPoint:
    """Evaluate one grid point; errors are recorded, never raised"""
    point = SweepPoint(index=index, coords=tuple(coords))
    try:
        params = spec.params_at(coords)
        if spec.mode == SweepMode.STEADY:
            report = solve_steady(params, strict=False)
            if report.degenerate:
                point.degenerate = True
                logger.warning(f"degenerate steady state at {dict(zip([a.name for a in spec.axes], coords))}")
            else:
                point.values = _observables(spec, report.matrix)
        else:
            point.trajectory = evolve(params, t_end=spec.t_end, dt=spec.dt, stride=spec.stride)
    except (VeeSgcError, np.linalg.LinAlgError, ValueError) as e:
        point.error = f"{type(e).__name__}: {e}"
        logger.warning(f"sweep point {index} failed: {point.error}")
    return point


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    """
    Evaluate every grid point of a spec

    Points are evaluated independently and written into their own slot, so
    the result is identical for any worker count.

    Args:
        spec: sweep specification
        workers: worker threads (config default when None)

    Returns:
        SweepResult with one record per grid point, row-major
    """
    workers = config.sweep.workers if workers is None else max(1, int(workers))
    grid = spec.grid()
    slots: List[Optional[SweepPoint]] = [None] * len(grid)
    logger.info(f"sweep {spec.label or spec_hash(spec)[:12]}: {len(grid)} points, {workers} worker(s)")

    if workers == 1:
        for idx, coords in enumerate(grid):
            slots[idx] = evaluate_point(spec, idx, coords)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(evaluate_point, spec, idx, coords): idx for idx, coords in enumerate(grid)}
            for future in as_completed(futures):
                slots[futures[future]] = future.result()

    flagged = sum(1 for p in slots if not p.ok)
    if flagged:
        logger.info(f"sweep finished with {flagged} flagged point(s)")
    return SweepResult(
        spec=spec,
        points=slots,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
