"""
Figure Presets
Caption parameter sets encoded once as sweep specifications
"""
import math
from typing import Callable, Dict, List

from config.settings import config
from atomic.dynamics import SystemParams
from atomic.errors import UnknownPreset
from .engine import Axis, Observable, SweepMode, SweepSpec

# Shared caption values: gamma21 = gamma31 = 1, Omega_R = Omega_L = 0.1, delta = 0
CAPTION_BASE = SystemParams(
    gamma21=1.0, gamma31=1.0, omega_r=0.1, omega_l=0.1,
    delta_r=0.0, delta_l=0.0, delta_small=0.0, phi=0.0, kc=0.0,
)

CAPTION_PHIS = (0.0, math.pi / 6, 4 * math.pi / 3)
CAPTION_DELTAS = (0.0, 2.0, 4.0, 6.0)

# Transient panels: (kc, detuning)
FIG2_PANELS = {
    "fig2a": (0.0, 0.0),
    "fig2b": (0.5, 0.0),
    "fig2c": (0.99, 0.0),
    "fig2d": (0.0, 2.0),
    "fig2e": (0.5, 2.0),
    "fig2f": (0.99, 2.0),
}


def _fig2(name: str) -> List[SweepSpec]:
    kc, delta = FIG2_PANELS[name]
    return [SweepSpec(
        base=CAPTION_BASE.replace(kc=kc, delta_r=delta, delta_l=delta),
        axes=(Axis.points("phi", CAPTION_PHIS),),
        observables=(Observable.ENTROPY, Observable.POPULATIONS),
        mode=SweepMode.TRANSIENT,
        t_end=50.0,
        dt=1e-3,
        stride=100,
        label=name,
    )]


def _fig3() -> List[SweepSpec]:
    n = config.sweep.resolution
    return [
        SweepSpec(
            base=CAPTION_BASE.replace(kc=kc),
            axes=(Axis.points("phi", CAPTION_PHIS), Axis.linspace("delta", -10.0, 10.0, n)),
            label=f"fig3{panel}",
        )
        for panel, kc in zip("abc", (0.0, 0.5, 0.99))
    ]


def _fig4(name: str, delta: float) -> List[SweepSpec]:
    return [SweepSpec(
        base=CAPTION_BASE.replace(delta_r=delta, delta_l=delta),
        axes=(Axis.points("kc", (0.99, 0.5, 0.0)), Axis.linspace("phi", 0.0, 2 * math.pi, config.sweep.resolution)),
        label=name,
    )]


def _fig5() -> List[SweepSpec]:
    return [SweepSpec(
        base=CAPTION_BASE.replace(kc=0.99, phi=0.0),
        axes=(Axis.points("delta", CAPTION_DELTAS), Axis.linspace("omega_ratio", 0.0, 4.0, config.sweep.resolution)),
        label="fig5",
    )]


def _fig6() -> List[SweepSpec]:
    n = config.sweep.resolution
    base = CAPTION_BASE.replace(kc=0.99, phi=0.0)
    populations = (Observable.POPULATIONS,)
    return [
        SweepSpec(
            base=base,
            axes=(Axis.points("delta", CAPTION_DELTAS), Axis.linspace("phi", 0.0, 2 * math.pi, n)),
            observables=populations,
            label="fig6-phase",
        ),
        SweepSpec(
            base=base,
            axes=(Axis.points("delta", CAPTION_DELTAS), Axis.linspace("omega_ratio", 0.0, 4.0, n)),
            observables=populations,
            label="fig6-rabi",
        ),
    ]


def _fig7() -> List[SweepSpec]:
    n = config.sweep.resolution_2d
    return [SweepSpec(
        base=CAPTION_BASE.replace(kc=0.99),
        axes=(Axis.linspace("phi", 0.0, 2 * math.pi, n), Axis.linspace("omega_ratio", 0.0, 4.0, n)),
        omega_l_anchor=0.1,
        label="fig7",
    )]


PRESET_NAMES = tuple(FIG2_PANELS) + ("fig3", "fig4a", "fig4b", "fig5", "fig6", "fig7")


def figure_preset(name: str) -> List[SweepSpec]:
    """
    Sweep specifications reproducing a figure's caption parameters

    Multi-curve figures are encoded as a single 2-axis spec where the curve
    parameter is the outer axis; figures with several panels return one spec
    per panel.

    Raises:
        UnknownPreset: name is not a known figure
    """
    key = name.strip().lower()
    if key in FIG2_PANELS:
        return _fig2(key)
    builders: Dict[str, Callable[[], List[SweepSpec]]] = {
        "fig3": _fig3,
        "fig4a": lambda: _fig4("fig4a", 0.0),
        "fig4b": lambda: _fig4("fig4b", 2.0),
        "fig5": _fig5,
        "fig6": _fig6,
        "fig7": _fig7,
    }
    if key not in builders:
        raise UnknownPreset(name, PRESET_NAMES)
    return builders[key]()
