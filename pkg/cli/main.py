"""
Command-Line Front End
evolve, steady, sweep, preset and selftest over one validated RunConfig
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import VERSION, Command, config, update_tolerances, update_workers
from atomic import dressed
from atomic.dynamics import PARAM_FIELDS, evolve
from atomic.errors import InvalidParameter, ParseError, PhysicsError, UsageError
from atomic.steadystate import solve_steady
from sweep.engine import SweepSpec, describe_axes, parse_axes, run_sweep, specs_hash
from sweep.presets import PRESET_NAMES, figure_preset
from .config import Basis, RunConfig, Suite, check_preset_consistency, format_value, parse_config, read_config_text
from .emit import emit_csv, paper_frame
from .selftest import print_report, run_selftest

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

EXIT_OK = 0
EXIT_PHYSICS = 1
EXIT_USAGE = 2


def configure_logging(verbosity: int = 0) -> None:
    """-v raises to DEBUG, -q lowers to WARNING"""
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


# ============================================================================
# PARSER
# ============================================================================

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)

    physics = common.add_argument_group("physics (units of gamma)")
    physics.add_argument("--gamma21", type=float)
    physics.add_argument("--gamma31", type=float)
    physics.add_argument("--omega-r", type=float, help="Rabi frequency of the right field")
    physics.add_argument("--omega-l", type=float, help="Rabi frequency of the left field")
    physics.add_argument("--delta-r", type=float, help="one-photon detuning, right field")
    physics.add_argument("--delta-l", type=float, help="one-photon detuning, left field")
    physics.add_argument("--delta-small", type=float, help="two-photon detuning")
    physics.add_argument("--phi", type=float, help="relative laser phase (rad)")
    physics.add_argument("--kc", type=float, help="interference strength in [0, 1]")

    numerics = common.add_argument_group("numerics")
    numerics.add_argument("--dt", type=float)
    numerics.add_argument("--t-end", type=float)
    numerics.add_argument("--stride", type=int)
    numerics.add_argument("--degeneracy-ratio", type=float)
    numerics.add_argument("--clamp-window", type=float)

    output = common.add_argument_group("output")
    output.add_argument("--out", help="output path ('-' or omitted: stdout)")
    output.add_argument("--format", choices=["csv"])
    output.add_argument("--workers", type=int)
    output.add_argument("--config", dest="config_path", help="flat key=value configuration file")
    output.add_argument("--spec-hash", help="expected sweep spec hash")

    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="count", default=0)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=config.output.program,
        description="Quantum entropy of a V-type three-level atom with spontaneously generated coherence",
    )
    parser.add_argument("--version", action="version", version=f"{config.output.program} {VERSION}")
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    ev = sub.add_parser(Command.EVOLVE.value, parents=[common], help="time evolution from the ground state")
    ev.add_argument("--basis", choices=[b.value for b in Basis])
    ev.add_argument("--mode", choices=[m.value for m in dressed.Mode],
                    help="dressed basis only: numeric evolution or the published closed forms")
    ev.add_argument("--omega0", type=float, help="Rabi frequency of the non-stationary special case")

    sub.add_parser(Command.STEADY.value, parents=[common], help="steady state by Liouvillian null space")

    sw = sub.add_parser(Command.SWEEP.value, parents=[common], help="grid sweep of steady or transient observables")
    sw.add_argument("--axis", dest="axes", action="append",
                    help="name:linspace:lo:hi:n or name:points:v1,v2 (repeat for a 2-D sweep)")
    sw.add_argument("--observables", help="comma-separated: entropy, populations, coherences")
    sw.add_argument("--sweep-mode", choices=["steady", "transient"])

    pr = sub.add_parser(Command.PRESET.value, parents=[common], help="figure sweep with caption parameters")
    pr.add_argument("preset", choices=PRESET_NAMES, metavar="name", help=", ".join(PRESET_NAMES))

    st = sub.add_parser(Command.SELFTEST.value, parents=[common], help="oracle and invariant checks")
    st.add_argument("--suite", choices=[s.value for s in Suite])

    return parser


def explicit_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """Command-line values that were actually given, keyed by RunConfig field"""
    flags: Dict[str, Any] = {}
    for name in RunConfig.model_fields:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name == "axes":
            value = ";".join(value)
        flags[name] = value
    return flags


def _read_config_file(path: Optional[str]) -> Optional[str]:
    if not path:
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise ParseError(f"cannot read '{path}': {e.strerror or e}", flag="--config")


# ============================================================================
# COMMANDS
# ============================================================================

def _sample_times(cfg: RunConfig) -> np.ndarray:
    n_steps = int(round(cfg.t_end / cfg.dt))
    steps = list(range(0, n_steps + 1, cfg.stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.array(steps, dtype=float) * cfg.dt


def run_evolve(cfg: RunConfig, explicit: Sequence[str]) -> int:
    if cfg.basis == Basis.DRESSED:
        special = dressed.special_case_params(cfg.omega0)
        overridden = [k for k in explicit if k in PARAM_FIELDS]
        if overridden:
            logger.warning(f"dressed basis runs the special case; ignoring {', '.join(overridden)}")
        cfg = cfg.model_copy(update=special.to_dict())
        if cfg.mode == dressed.Mode.PAPER:
            result = paper_frame(cfg.omega0, _sample_times(cfg))
        else:
            result = dressed.special_case_numeric(cfg.omega0, t_end=cfg.t_end, dt=cfg.dt, stride=cfg.stride)
    else:
        result = evolve(cfg.params(), t_end=cfg.t_end, dt=cfg.dt, stride=cfg.stride)
    emit_csv(result, cfg.out, cfg.provenance())
    return EXIT_OK


def run_steady(cfg: RunConfig) -> int:
    report = solve_steady(cfg.params())
    emit_csv(report, cfg.out, cfg.provenance())
    return EXIT_OK


def _check_hash(cfg: RunConfig, actual: str) -> None:
    if cfg.spec_hash is not None and cfg.spec_hash != actual:
        logger.warning(f"spec_hash mismatch: expected {cfg.spec_hash}, computing {actual}")


def build_sweep_spec(cfg: RunConfig) -> SweepSpec:
    """SweepSpec from the sweep fields of a RunConfig"""
    if not cfg.axes:
        raise ParseError("a sweep needs at least one axis", flag="--axis")
    observables = tuple(o.strip() for o in cfg.observables.split(",") if o.strip())
    try:
        return SweepSpec(
            base=cfg.params(),
            axes=parse_axes(cfg.axes),
            observables=observables,
            mode=cfg.sweep_mode,
            t_end=cfg.t_end,
            dt=cfg.dt,
            stride=cfg.stride,
        )
    except ValueError as e:
        raise ParseError(str(e), flag="--observables")


def run_sweep_command(cfg: RunConfig) -> int:
    spec = build_sweep_spec(cfg)
    digest = specs_hash([spec])
    _check_hash(cfg, digest)
    result = run_sweep(spec, workers=cfg.workers)
    provenance = cfg.model_copy(update={"axes": describe_axes(spec.axes), "spec_hash": digest}).provenance()
    emit_csv(result, cfg.out, provenance)
    return EXIT_OK


def preset_provenance(cfg: RunConfig, specs: List[SweepSpec], digest: str) -> List[Tuple[str, str]]:
    """
    command, preset name, the base parameters every spec shares off-axis, and
    the spec hash; parameters that vary between specs are written as columns
    """
    pairs = [("command", Command.PRESET.value), ("preset", cfg.preset)]
    swept = {a.name for s in specs for a in s.axes}
    if "delta" in swept:
        swept |= {"delta_r", "delta_l"}
    if "omega_ratio" in swept:
        swept |= {"omega_r", "omega_l"}
    for name in PARAM_FIELDS:
        values = {getattr(s.base, name) for s in specs}
        if name not in swept and len(values) == 1:
            pairs.append((name, format_value(values.pop())))
    pairs.append(("spec_hash", digest))
    return pairs


def run_preset(cfg: RunConfig, explicit: Sequence[str]) -> int:
    specs = figure_preset(cfg.preset)
    check_preset_consistency(cfg, specs, list(explicit))
    digest = specs_hash(specs)
    _check_hash(cfg, digest)
    results = [run_sweep(spec, workers=cfg.workers) for spec in specs]
    emit_csv(results, cfg.out, preset_provenance(cfg, specs, digest))
    return EXIT_OK


def run_selftest_command(cfg: RunConfig) -> int:
    report = run_selftest(cfg.suite)
    print_report(report)
    return EXIT_OK if report.passed else EXIT_PHYSICS


def dispatch(cfg: RunConfig, explicit: Sequence[str] = ()) -> int:
    """Run the configured command; returns the exit status"""
    if cfg.command == Command.EVOLVE:
        return run_evolve(cfg, explicit)
    if cfg.command == Command.STEADY:
        return run_steady(cfg)
    if cfg.command == Command.SWEEP:
        return run_sweep_command(cfg)
    if cfg.command == Command.PRESET:
        if not cfg.preset:
            raise InvalidParameter("preset command needs a preset name")
        return run_preset(cfg, explicit)
    return run_selftest_command(cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point

    Returns:
        0 success, 1 physics error or failed selftest, 2 usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.verbose - args.quiet)

    try:
        text = _read_config_file(args.config_path)
        flags = explicit_flags(args)
        cfg = parse_config(text, flags)
        explicit = list(flags)
        if text:
            explicit += [k for k in read_config_text(text)[0] if k not in flags]
        update_workers(cfg.workers)
        update_tolerances(cfg.degeneracy_ratio, cfg.clamp_window)
        return dispatch(cfg, explicit)
    except PhysicsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PHYSICS
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
