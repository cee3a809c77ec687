"""
Column-Oriented Output
CSV emission of trajectories, steady states and sweeps with a provenance header
"""
import io
import logging
import sys
from datetime import datetime, timezone
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from config.settings import VERSION, config
from atomic.dressed import (
    DressedTrajectory,
    Mode,
    special_case_entropy_eq12,
    special_case_eigenvalues_eq12,
    special_case_trajectory_eq11,
)
from atomic.dynamics import PARAM_FIELDS, Trajectory
from atomic.errors import OutputError
from atomic.state import bloch_to_matrix
from atomic.steadystate import SteadyStateReport
from sweep.engine import Observable, SweepMode, SweepResult

logger = logging.getLogger(__name__)

BLOCH_COLUMNS = ("re_rho12", "im_rho12", "re_rho13", "im_rho13", "re_rho32", "im_rho32")
TRAJECTORY_COLUMNS = ("t_gamma", "entropy_nats", "rho11", "rho22", "rho33") + BLOCH_COLUMNS + ("mode",)
STEADY_COLUMNS = (("entropy_nats", "rho11", "rho22", "rho33") + BLOCH_COLUMNS
                  + ("residual", "sigma_min_1", "sigma_min_2", "sigma_max", "degenerate", "mode"))
DRESSED_COLUMNS = ("t_gamma", "entropy_nats", "rho11", "rho_psipsi", "rho_phiphi",
                   "re_rho_1psi", "im_rho_1psi", "re_rho_1phi", "im_rho_1phi",
                   "re_rho_psiphi", "im_rho_psiphi", "mode")
PAPER_COLUMNS = ("t_gamma", "rho11", "rho_psipsi", "rho_phiphi", "re_rho_1psi", "im_rho_1psi",
                 "lambda_plus", "lambda_minus", "entropy_nats", "unphysical", "mode")

Provenance = Sequence[Tuple[str, str]]


# ============================================================================
# FRAMES
# ============================================================================

def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    """One row per sample"""
    states = trajectory.states.reshape(-1, 8)
    pops = trajectory.populations.reshape(-1, 3)
    data = {
        "t_gamma": trajectory.times,
        "entropy_nats": trajectory.entropy,
        "rho11": pops[:, 0],
        "rho22": pops[:, 1],
        "rho33": pops[:, 2],
    }
    for k, name in enumerate(BLOCH_COLUMNS):
        data[name] = states[:, 2 + k]
    frame = pd.DataFrame(data, columns=TRAJECTORY_COLUMNS[:-1])
    frame["mode"] = Mode.NUMERIC.value
    return frame


def steady_frame(report: SteadyStateReport) -> pd.DataFrame:
    """Single row; observable cells are empty for a degenerate report"""
    row = {name: np.nan for name in STEADY_COLUMNS}
    if not report.degenerate:
        rho = report.matrix.elements
        row["entropy_nats"] = report.entropy
        row["rho11"], row["rho22"], row["rho33"] = np.diagonal(rho).real
        for name, value in zip(BLOCH_COLUMNS, report.state.as_array()[2:]):
            row[name] = value
        row["residual"] = report.residual
    row["sigma_min_1"], row["sigma_min_2"] = report.smallest_singular_values
    row["sigma_max"] = report.largest_singular_value
    row["degenerate"] = int(report.degenerate)
    row["mode"] = Mode.NUMERIC.value
    return pd.DataFrame([row], columns=STEADY_COLUMNS)


def dressed_frame(run: DressedTrajectory) -> pd.DataFrame:
    """Numeric special-case run in the dressed basis"""
    m = run.dressed
    frame = pd.DataFrame({
        "t_gamma": run.times,
        "entropy_nats": run.trajectory.entropy,
        "rho11": m[:, 0, 0].real,
        "rho_psipsi": m[:, 1, 1].real,
        "rho_phiphi": m[:, 2, 2].real,
        "re_rho_1psi": m[:, 0, 1].real,
        "im_rho_1psi": m[:, 0, 1].imag,
        "re_rho_1phi": m[:, 0, 2].real,
        "im_rho_1phi": m[:, 0, 2].imag,
        "re_rho_psiphi": m[:, 1, 2].real,
        "im_rho_psiphi": m[:, 1, 2].imag,
    }, columns=DRESSED_COLUMNS[:-1])
    frame["mode"] = Mode.NUMERIC.value
    return frame


def paper_frame(omega0: float, times: Iterable[float]) -> pd.DataFrame:
    """Published closed forms of the special case, evaluated at the given times"""
    rows = []
    for t in times:
        m = special_case_trajectory_eq11(omega0, t)
        lam_plus, lam_minus = special_case_eigenvalues_eq12(omega0, t)
        entropy, unphysical = special_case_entropy_eq12(omega0, t)
        rows.append({
            "t_gamma": float(t),
            "rho11": m.rho11,
            "rho_psipsi": m.rho_psipsi,
            "rho_phiphi": m.rho_phiphi,
            "re_rho_1psi": m.rho_1psi.real,
            "im_rho_1psi": m.rho_1psi.imag,
            "lambda_plus": lam_plus,
            "lambda_minus": lam_minus,
            "entropy_nats": entropy,
            "unphysical": int(unphysical),
            "mode": Mode.PAPER.value,
        })
    return pd.DataFrame(rows, columns=PAPER_COLUMNS)


def _varying_params(results: Sequence[SweepResult]) -> List[str]:
    return [name for name in PARAM_FIELDS
            if len({getattr(r.spec.base, name) for r in results}) > 1]


def _transient_block(result: SweepResult, point, columns: Tuple[str, ...]) -> pd.DataFrame:
    trajectory = point.trajectory
    data = {"t_gamma": trajectory.times}
    if "entropy_nats" in columns:
        data["entropy_nats"] = trajectory.entropy
    if Observable.POPULATIONS in result.spec.observables:
        for k, name in enumerate(("rho11", "rho22", "rho33")):
            data[name] = trajectory.populations[:, k]
    if Observable.COHERENCES in result.spec.observables:
        rho = bloch_to_matrix(trajectory.states)
        data["abs_rho12"] = np.abs(rho[:, 0, 1])
        data["abs_rho13"] = np.abs(rho[:, 0, 2])
        data["abs_rho23"] = np.abs(rho[:, 1, 2])
    return pd.DataFrame(data)


def sweep_frame(results: Union[SweepResult, Sequence[SweepResult]]) -> pd.DataFrame:
    """
    Rows for one or more sweeps; steady sweeps give one row per grid point,
    transient sweeps one row per point and sample (long format)
    """
    results = [results] if isinstance(results, SweepResult) else list(results)
    varying = _varying_params(results)
    labelled = len(results) > 1
    frames = []

    for result in results:
        spec = result.spec
        axis_names = [a.name for a in spec.axes]
        observables = spec.columns()
        for point in result.points:
            lead = {}
            if labelled:
                lead["label"] = spec.label
            for name in varying:
                lead[name] = getattr(spec.base, name)
            lead.update(zip(axis_names, point.coords))

            if spec.mode == SweepMode.TRANSIENT and point.trajectory is not None:
                block = _transient_block(result, point, observables)
            else:
                row = {"t_gamma": np.nan} if spec.mode == SweepMode.TRANSIENT else {}
                row.update({c: point.values.get(c, np.nan) for c in observables})
                block = pd.DataFrame([row])

            for i, (key, value) in enumerate(lead.items()):
                block.insert(i, key, value)
            block["degenerate"] = int(point.degenerate)
            block["error"] = point.error or ""
            block["mode"] = Mode.NUMERIC.value
            frames.append(block)

    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)


def to_frame(result) -> pd.DataFrame:
    if isinstance(result, pd.DataFrame):
        return result
    if isinstance(result, Trajectory):
        return trajectory_frame(result)
    if isinstance(result, SteadyStateReport):
        return steady_frame(result)
    if isinstance(result, DressedTrajectory):
        return dressed_frame(result)
    if isinstance(result, SweepResult) or (
        isinstance(result, (list, tuple)) and result and all(isinstance(r, SweepResult) for r in result)
    ):
        return sweep_frame(result)
    raise TypeError(f"cannot emit {type(result).__name__}")


# ============================================================================
# CSV
# ============================================================================

def header_line(timestamp: Optional[str] = None) -> str:
    timestamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    return f"# {config.output.program} v{VERSION} {timestamp}"


def render_csv(result, provenance: Provenance = (), timestamp: Optional[str] = None) -> str:
    """Full CSV text: banner, provenance block, header row and body"""
    buffer = io.StringIO()
    buffer.write(header_line(timestamp) + "\n")
    for key, value in provenance:
        buffer.write(f"# {key}={value}\n")
    to_frame(result).to_csv(
        buffer,
        index=False,
        float_format=config.output.float_format,
        na_rep="",
        lineterminator="\n",
    )
    return buffer.getvalue()


def emit_csv(
    result,
    dest: Union[str, TextIO, None] = None,
    provenance: Provenance = (),
    timestamp: Optional[str] = None,
) -> None:
    """
    Write a result as UTF-8 CSV

    Args:
        result: Trajectory, SteadyStateReport, SweepResult(s), DressedTrajectory or DataFrame
        dest: path, open text stream, or None / "-" for stdout
        provenance: key=value pairs written as `# key=value` lines
        timestamp: ISO-8601 timestamp for the banner (now when omitted)

    Raises:
        OutputError: the destination cannot be written
    """
    text = render_csv(result, provenance, timestamp)
    if dest is None or dest == "-":
        sys.stdout.write(text)
        return
    if hasattr(dest, "write"):
        dest.write(text)
        return
    try:
        with open(dest, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(str(dest), e.strerror or str(e))
    logger.info(f"wrote {dest}")


def strip_banner(text: str) -> str:
    """CSV text without its timestamped first line"""
    return text.split("\n", 1)[1] if "\n" in text else ""


def provenance_text(text: str) -> str:
    """The `# key=value` block of an emitted CSV as config-file text"""
    lines = text.split("\n")[1:]
    block = []
    for line in lines:
        if not line.startswith("# "):
            break
        block.append(line[2:])
    return "\n".join(block) + ("\n" if block else "")
