"""
Run Configuration
Flat key=value configuration files and command-line flags merged into a validated RunConfig
"""
import io
import logging
import math
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Tuple

from dotenv.parser import parse_stream
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config.settings import Command, OutputFormat, config
from atomic.dynamics import PARAM_FIELDS, SystemParams, TWO_PI
from atomic.dressed import Mode
from atomic.errors import NonFiniteValue, ParseError, UnknownKey
from sweep.engine import SweepMode, SweepSpec

logger = logging.getLogger(__name__)


class Basis(str, Enum):
    """Basis of evolve output"""
    BARE = "bare"
    DRESSED = "dressed"


class Suite(str, Enum):
    """selftest suites"""
    ALL = "all"
    STATE = "state"
    DYNAMICS = "dynamics"
    STEADY = "steady"
    DRESSED = "dressed"
    SPECIAL = "special"
    SWEEP = "sweep"


# Keys that describe where output goes rather than what it contains
NON_PROVENANCE_KEYS = ("out", "workers")


class RunConfig(BaseModel):
    """
    Validated run configuration.

    Defaults mirror the shared figure captions: gamma21 = gamma31 = 1,
    Omega_R = Omega_L = 0.1, zero detunings, phi = 0, K_c = 0.
    """
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    command: Command = Command.EVOLVE

    # Physics
    gamma21: float = Field(1.0, gt=0)
    gamma31: float = Field(1.0, gt=0)
    omega_r: float = Field(0.1, ge=0)
    omega_l: float = Field(0.1, ge=0)
    delta_r: float = 0.0
    delta_l: float = 0.0
    delta_small: float = 0.0
    phi: float = 0.0
    kc: float = Field(0.0, ge=0, le=1)

    # Numerics
    dt: float = Field(default_factory=lambda: config.numerics.dt, gt=0)
    t_end: float = Field(default_factory=lambda: config.numerics.t_end, gt=0)
    stride: int = Field(default_factory=lambda: config.numerics.stride, ge=1)
    degeneracy_ratio: float = Field(default_factory=lambda: config.numerics.degeneracy_ratio, gt=0)
    clamp_window: float = Field(default_factory=lambda: config.numerics.clamp_window, ge=0)

    # Output
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    workers: int = Field(default_factory=lambda: config.sweep.workers, ge=1)

    # Command-specific
    preset: Optional[str] = None
    axes: Optional[str] = None
    observables: str = "entropy"
    sweep_mode: SweepMode = SweepMode.STEADY
    basis: Basis = Basis.BARE
    mode: Mode = Mode.NUMERIC
    omega0: float = Field(0.1, gt=0)
    suite: Suite = Suite.ALL
    spec_hash: Optional[str] = None

    def params(self) -> SystemParams:
        return SystemParams(**{name: getattr(self, name) for name in PARAM_FIELDS})

    def provenance(self, omit: Tuple[str, ...] = ()) -> List[Tuple[str, str]]:
        """
        key=value pairs of every set field, in declaration order; a file of
        these lines parses back to the same RunConfig
        """
        pairs = []
        for name in type(self).model_fields:
            if name in NON_PROVENANCE_KEYS or name in omit:
                continue
            value = getattr(self, name)
            if value is None:
                continue
            pairs.append((name, format_value(value)))
        return pairs


def format_value(value: Any) -> str:
    """Lossless text form of a config value"""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def read_config_text(text: str) -> Tuple[Dict[str, str], Dict[str, int]]:
    """
    Parse flat key=value text

    Returns:
        (values, line numbers) keyed by normalized key

    Raises:
        ParseError: malformed line
    """
    values: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    for binding in parse_stream(io.StringIO(text)):
        line = binding.original.line
        if binding.error:
            raise ParseError(f"cannot parse '{binding.original.string.strip()}'", line=line)
        if binding.key is None:
            continue
        if binding.value is None:
            raise ParseError(f"missing value for '{binding.key}'", line=line)
        key = normalize_key(binding.key)
        if key not in RunConfig.model_fields:
            raise UnknownKey(binding.key, line=line)
        values[key] = binding.value
        lines[key] = line
    return values, lines


def parse_config(
    text: Optional[str] = None,
    flags: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Merge a config file and explicit flags (flags win) into a RunConfig

    Args:
        text: flat key=value text, e.g. the contents of --config
        flags: explicitly given command-line values keyed by field name

    Returns:
        Validated RunConfig

    Raises:
        ParseError: malformed text or invalid value (with line or flag)
        UnknownKey: key not recognised
        NonFiniteValue: NaN or infinite value
    """
    file_values, lines = read_config_text(text) if text else ({}, {})
    flag_values = {normalize_key(k): v for k, v in (flags or {}).items() if v is not None}

    for key in flag_values:
        if key not in RunConfig.model_fields:
            raise UnknownKey(key, flag=flag_name(key))

    merged = {**file_values, **flag_values}
    try:
        cfg = RunConfig(**merged)
    except ValidationError as e:
        raise _translate(e, lines, flag_values)

    logger.debug(f"run config: {cfg.model_dump(exclude_none=True)}")
    return cfg


def _translate(error: ValidationError, lines: Dict[str, int], flag_values: Dict[str, Any]) -> ParseError:
    first = error.errors()[0]
    key = str(first["loc"][0]) if first.get("loc") else ""
    line = None if key in flag_values else lines.get(key)
    where_flag = flag_name(key) if key in flag_values else None

    if first["type"] == "extra_forbidden":
        return UnknownKey(key, line=line)
    if first["type"] == "finite_number":
        return NonFiniteValue(key, line=line, flag=where_flag)
    return ParseError(f"invalid value for '{key}': {first['msg']}", line=line, flag=where_flag)


# ============================================================================
# PRESET CONSISTENCY
# ============================================================================

def _axis_covers(spec: SweepSpec, key: str) -> Optional[Tuple[float, ...]]:
    for axis in spec.axes:
        if axis.name == key:
            return axis.values
        if axis.name == "delta" and key in ("delta_r", "delta_l"):
            return axis.values
        if axis.name == "omega_ratio" and key in ("omega_r", "omega_l"):
            return ()  # any value along the ratio axis
    return None


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=1e-12)


def check_preset_consistency(cfg: RunConfig, specs: List[SweepSpec], explicit: List[str]) -> None:
    """
    Explicit physics flags given next to a preset must agree with it: equal to
    the preset's base value, or one of the values along a swept axis.

    Raises:
        ParseError: naming the conflicting flag
    """
    for key in explicit:
        key = normalize_key(key)
        if key not in PARAM_FIELDS:
            continue
        value = getattr(cfg, key)
        if key == "phi":
            value = value % TWO_PI
        consistent = False
        for spec in specs:
            covered = _axis_covers(spec, key)
            if covered == ():
                consistent = True
            elif covered is not None:
                consistent = consistent or any(_same(value, v % TWO_PI if key == "phi" else v) for v in covered)
            else:
                consistent = consistent or _same(value, getattr(spec.base, key))
        if not consistent:
            raise ParseError(f"value {value!r} conflicts with preset '{cfg.preset}'", flag=flag_name(key))
