"""
Self-Test Suites
Oracle and invariant checks with a printed residual report
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from atomic import dressed, dynamics, state, steadystate
from atomic.dynamics import SystemParams
from atomic.errors import DegenerateLiouvillian, VeeSgcError
from sweep.engine import Axis, SweepSpec, run_sweep
from .config import Suite
from .emit import render_csv, strip_banner

logger = logging.getLogger(__name__)

SEED = 20240601


@dataclass
class CheckResult:
    """Outcome of one check"""
    name: str
    passed: bool
    residual: Optional[float] = None
    detail: str = ""
    informational: bool = False


@dataclass
class SelftestReport:
    """All checks of a selftest run"""
    checks: List[CheckResult] = field(default_factory=list)
    sections: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed and not c.informational]


# ============================================================================
# ORACLES
# ============================================================================

def charpoly_eigenvalues(a: np.ndarray) -> np.ndarray:
    """
    Eigenvalues of a 3x3 Hermitian matrix as roots of its characteristic
    polynomial, Newton-polished, descending
    """
    a = np.asarray(a, dtype=complex)
    tr = np.trace(a).real
    tr2 = np.trace(a @ a).real
    det = np.linalg.det(a).real
    coeffs = np.array([1.0, -tr, 0.5 * (tr * tr - tr2), -det])
    roots = np.sort(np.roots(coeffs).real)[::-1]
    deriv = np.polyder(coeffs)
    for _ in range(3):
        slope = np.polyval(deriv, roots)
        safe = np.abs(slope) > 1e-12
        roots = np.where(safe, roots - np.polyval(coeffs, roots) / np.where(safe, slope, 1.0), roots)
    return np.sort(roots)[::-1]


def random_density_matrix(rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix with spectrum in [0, 1]"""
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    q, _ = np.linalg.qr(g)
    w = rng.dirichlet(np.ones(3))
    return (q * w) @ q.conj().T


def random_params(rng: np.random.Generator, kc_max: float = 1.0) -> SystemParams:
    return SystemParams(
        gamma21=1.0, gamma31=1.0,
        omega_r=rng.uniform(0.0, 1.0), omega_l=rng.uniform(0.0, 1.0),
        delta_r=rng.uniform(-5.0, 5.0), delta_l=rng.uniform(-5.0, 5.0),
        delta_small=0.0,
        phi=rng.uniform(0.0, 2 * math.pi), kc=rng.uniform(0.0, kc_max),
    )


def _exact_oracle_point(kc: float, phi: float) -> bool:
    # The analytic oracle is exact without interference or at phi in {0, pi}
    return kc == 0.0 or math.isclose(math.sin(phi), 0.0, abs_tol=1e-12)


# ============================================================================
# SUITES
# ============================================================================

def _state_checks(report: SelftestReport, rng: np.random.Generator) -> None:
    worst = 0.0
    for _ in range(1000):
        rho = random_density_matrix(rng)
        worst = max(worst, float(np.max(np.abs(np.array(state.eigenvalues_hermitian3(rho)) - charpoly_eigenvalues(rho)))))
    report.checks.append(CheckResult("eigenvalues vs characteristic polynomial (1000)", worst <= 1e-9, worst))

    identical = True
    for _ in range(100):
        x = rng.uniform(-0.5, 0.5, size=8)
        identical &= bool(np.array_equal(state.to_bloch(state.from_bloch(state.BlochVector.from_array(x))).as_array(), x))
    report.checks.append(CheckResult("from_bloch / to_bloch identity", identical, 0.0 if identical else None))

    refs = [
        (np.diag([1.0, 0.0, 0.0]), 0.0),
        (np.eye(3) / 3.0, math.log(3.0)),
        (np.diag([0.5, 0.5, 0.0]), math.log(2.0)),
    ]
    err = max(abs(state.von_neumann_entropy(m) - s) for m, s in refs)
    report.checks.append(CheckResult("entropy reference values", err <= 1e-12, err))

    err = 0.0
    for _ in range(100):
        rho = random_density_matrix(rng)
        err = max(err, abs(state.von_neumann_entropy(dressed.to_dressed(rho).elements) - state.von_neumann_entropy(rho)))
    report.checks.append(CheckResult("entropy invariant under dressed-basis unitary", err <= 1e-12, err))


def _dynamics_checks(report: SelftestReport, rng: np.random.Generator) -> None:
    generic = SystemParams(omega_r=0.5, omega_l=0.3, delta_r=1.0, delta_l=-0.5, phi=0.7, kc=0.5)
    result = dynamics.convergence_order_check(generic)
    ok = result.order is not None and 3.7 <= result.order <= 4.3
    report.checks.append(CheckResult("RK4 order, generic", ok, result.order))

    stiff = SystemParams(omega_r=1.0, omega_l=1.0, delta_r=10.0, delta_l=10.0, kc=0.5, phi=0.3)
    result = dynamics.convergence_order_check(stiff, dt=1e-3, t_end=5.0)
    ok = result.order is not None and 3.7 <= result.order <= 4.3
    report.checks.append(CheckResult("RK4 order, detuning 10", ok, result.order))

    result = dynamics.convergence_order_check(SystemParams(omega_r=0.0, omega_l=0.0))
    report.checks.append(CheckResult("RK4 order, zero field reports exact", result.exact, result.differences[0]))

    excited = state.BlochVector(p22=1.0)
    traj = dynamics.evolve(SystemParams(omega_r=0.0, omega_l=0.0), excited, t_end=5.0, dt=1e-3, stride=10)
    err = float(np.max(np.abs(traj.populations[:, 1] - np.exp(-2.0 * traj.times))))
    report.checks.append(CheckResult("free decay p22 = exp(-2t)", err <= 1e-8, err))

    base = SystemParams(omega_r=0.3, omega_l=0.2, delta_r=1.0, delta_l=0.5, kc=0.0)
    a = dynamics.evolve(base.replace(phi=0.0), t_end=5.0, dt=1e-3, stride=50)
    b = dynamics.evolve(base.replace(phi=math.pi / 3), t_end=5.0, dt=1e-3, stride=50)
    same = bool(np.array_equal(a.states, b.states))
    report.checks.append(CheckResult("phi-independent trajectories at K_c = 0", same, 0.0 if same else None))

    worst = 0.0
    zero = np.zeros(8)
    for _ in range(100):
        p = random_params(rng)
        v1, v2 = rng.uniform(-1.0, 1.0, size=(2, 8))
        residual = (dynamics.rhs_array(p, v1 + v2) - dynamics.rhs_array(p, v1)
                    - dynamics.rhs_array(p, v2) + dynamics.rhs_array(p, zero))
        worst = max(worst, float(np.max(np.abs(residual))))
    report.checks.append(CheckResult("rhs affine in the Bloch vector", worst <= 1e-14, worst))

    lowest, worst_s, worst_trace = math.inf, 0.0, 0.0
    hermitian = True
    for _ in range(100):
        traj = dynamics.evolve(random_params(rng), t_end=50.0, dt=1e-3, stride=100)
        rho = traj.matrices()
        worst_trace = max(worst_trace, float(np.max(np.abs(np.trace(rho, axis1=1, axis2=2) - 1.0))))
        hermitian &= bool(np.array_equal(rho, np.conj(np.swapaxes(rho, 1, 2))))
        lowest = min(lowest, float(np.min(state.min_eigenvalues(rho))))
        worst_s = max(worst_s, float(np.max(traj.entropy)))
    ok = hermitian and worst_trace <= 1e-15 and lowest >= -1e-6 and worst_s <= state.LN3 + 1e-12
    report.checks.append(CheckResult("physicality over 100 random draws", ok, lowest,
                                     detail=f"max entropy {worst_s:.6f}, max trace error {worst_trace:.1e}"))


def _steady_checks(report: SelftestReport, rng: np.random.Generator) -> None:
    worst = 0.0
    for _ in range(10):
        p = random_params(rng)
        L = steadystate.build_liouvillian(p)
        for _ in range(10):
            x = rng.uniform(-1.0, 1.0, size=8)
            worst = max(worst, float(np.max(np.abs(L.apply(x) - dynamics.rhs_array(p, x)))))
    report.checks.append(CheckResult("Liouvillian reproduces rhs", worst <= 1e-13, worst))

    comparison = steadystate.oracle_deviations()
    expected = sorted(
        (w, k, f) for w in steadystate.ORACLE_OMEGAS for k in steadystate.ORACLE_KCS
        for f in steadystate.ORACLE_PHIS if not _exact_oracle_point(k, f)
    )
    ok = sorted(comparison.deviating_points) == expected and comparison.max_error_agreeing <= 1e-6
    report.checks.append(CheckResult(
        "analytic oracle agreement", ok, comparison.max_error_agreeing,
        detail=f"{len(comparison.deviating_points)}/{comparison.points} points deviate",
    ))
    report.sections["analytic oracle deviations"] = _deviation_table(comparison)

    p = SystemParams(omega_r=0.1, omega_l=0.1, kc=0.99, phi=0.0)
    solved = steadystate.solve_steady(p)
    rho11 = state.populations(solved.matrix)[0]
    ok = solved.entropy < 0.02 and rho11 > 0.99
    report.checks.append(CheckResult("disentanglement at K_c = 0.99, phi = 0", ok, solved.entropy,
                                     detail=f"rho11 = {rho11:.6f}"))

    flagged = []
    for omega0 in (0.01, 0.1, 0.5, 1.0):
        r = steadystate.solve_steady(dressed.special_case_params(omega0), strict=False)
        flagged.append(r.degenerate)
    report.checks.append(CheckResult("degeneracy flagged at K_c = 1, phi = pi", all(flagged)))

    r = steadystate.solve_steady(steadystate.oracle_params(0.1, 0.0, 0.0))
    expected22 = 0.01 * 1.01 / (0.01 + 1.02 ** 2)
    err = abs(state.populations(r.matrix)[1] - expected22)
    report.checks.append(CheckResult("K_c = 0 population against closed form", err <= 1e-8, err))


def _deviation_table(comparison: steadystate.OracleComparison) -> List[str]:
    rows = ["omega0    kc     phi      element  |analytic - numeric|"]
    for d in comparison.deviations:
        rows.append(f"{d.omega0:<8g}  {d.kc:<5g}  {d.phi:<7.4f}  {d.element:<7}  {d.magnitude:.3e}")
    return rows


def _dressed_checks(report: SelftestReport, rng: np.random.Generator) -> None:
    err_rt, err_s = 0.0, 0.0
    for _ in range(100):
        rho = random_density_matrix(rng)
        m = dressed.to_dressed(rho)
        err_rt = max(err_rt, float(np.max(np.abs(dressed.from_dressed(m).elements - rho))))
        err_s = max(err_s, abs(state.von_neumann_entropy(m.elements) - state.von_neumann_entropy(rho)))
    report.checks.append(CheckResult("dressed round trip", err_rt <= 1e-14, err_rt))
    report.checks.append(CheckResult("dressed entropy invariance", err_s <= 1e-12, err_s))

    lines = ["kc    phi      deviating coefficients  max |published - derived|"]
    coherence_rows_ok = True
    for kc in (0.0, 0.5, 1.0):
        for phi in (0.0, math.pi / 2, math.pi):
            p = SystemParams(omega_r=0.3, omega_l=0.1, delta_r=0.4, delta_l=-0.2, kc=kc, phi=phi)
            found = dressed.eq9_deviations(p)
            coherence_rows_ok &= not any(d.output in ("re_psi_phi", "im_psi_phi") for d in found)
            largest = max((d.magnitude for d in found), default=0.0)
            lines.append(f"{kc:<4g}  {phi:<7.4f}  {len(found):<22d}  {largest:.3e}")
    report.checks.append(CheckResult("published psi-phi coherence equation matches", coherence_rows_ok))
    report.sections["dressed-equation deviations"] = lines


def _special_checks(report: SelftestReport, rng: np.random.Generator) -> None:
    omega0 = 0.1
    try:
        steadystate.solve_steady(dressed.special_case_params(omega0))
        raised = False
    except DegenerateLiouvillian:
        raised = True
    report.checks.append(CheckResult("non-stationary regime raises DegenerateLiouvillian", raised))

    run = dressed.special_case_numeric(omega0, t_end=200.0)
    summary = dressed.summarize_special_case(run)
    ok = (summary.peak_to_peak > 0.9
          and summary.last_cycle_amplitude >= 0.99 * summary.first_cycle_amplitude
          and summary.max_rho_phiphi <= 1e-8
          and summary.min_eigenvalue >= -1e-6)
    report.checks.append(CheckResult("undamped oscillation, |phi> decoupled", ok, summary.max_rho_phiphi,
                                     detail=f"peak-to-peak {summary.peak_to_peak:.6f}"))

    quarter = math.pi / 2 * math.sqrt(2.0) / (4.0 * omega0)
    lp0, lm0 = dressed.special_case_eigenvalues_eq12(omega0, 0.0)
    lpq, lmq = dressed.special_case_eigenvalues_eq12(omega0, quarter)
    root = 2.0 ** 0.25
    err = max(abs(lp0 - 1.0), abs(lm0), abs(lpq - (1 + root) / 2), abs(lmq - (1 - root) / 2))
    report.checks.append(CheckResult("published eigenvalues reproduced", err <= 1e-12, err))
    _, unphysical = dressed.special_case_entropy_eq12(omega0, quarter)
    report.checks.append(CheckResult("published lambda- < 0 at quarter period (expected)", unphysical,
                                     lmq, informational=True))

    f = summary.frequency
    matches = f.matches()
    rel = lambda e: f"{e:.2e}" if e is not None else "n/a"
    report.sections["special-case frequency"] = [
        f"measured          {f.measured:.10f}" if f.measured is not None else "measured          n/a",
        f"4 W0 / sqrt2      {f.closed_form:.10f}  rel. error {rel(f.closed_form_relative_error)}  match={matches['closed_form']}",
        f"4 W0 / 2^(1/4)    {f.reduced_equations:.10f}  rel. error {rel(f.reduced_equations_relative_error)}  match={matches['reduced_equations']}",
        f"max |rho_1psi|    {summary.max_abs_rho_1psi:.6f}  (published amplitude {math.sqrt(2) / 2:.6f})",
        f"max entropy       {summary.max_entropy:.3e}",
    ]


def _sweep_checks(report: SelftestReport, rng: np.random.Generator) -> None:
    base = SystemParams(omega_r=0.1, omega_l=0.1, kc=0.0)
    single = run_sweep(SweepSpec(base=base, axes=(Axis.points("phi", [0.0]),)), workers=1)
    direct = steadystate.solve_steady(base).entropy
    ok = single.points[0].values["entropy_nats"] == direct
    report.checks.append(CheckResult("one-point sweep equals direct solve", ok))

    flat = run_sweep(SweepSpec(base=base, axes=(Axis.linspace("phi", 0.0, 2 * math.pi, 64),)), workers=1)
    spread = float(np.ptp(flat.values("entropy_nats")))
    report.checks.append(CheckResult("entropy phase-independent at K_c = 0", spread < 1e-10, spread))

    lines = ["kc    phi      argmax delta  S(0)         S(-2)        S(+2)"]
    gating_ok = True
    for kc in (0.0, 0.5, 0.99):
        for phi in (math.pi / 6, 4 * math.pi / 3):
            spec = SweepSpec(base=base.replace(kc=kc, phi=phi), axes=(Axis.linspace("delta", -10.0, 10.0, 201),))
            result = run_sweep(spec, workers=1)
            s = result.values("entropy_nats")
            deltas = np.array(spec.axes[0].values)
            at = lambda d: s[int(np.argmin(np.abs(deltas - d)))]
            peak = float(deltas[int(np.nanargmax(s))])
            gating_ok &= bool(abs(peak) <= 0.05 and at(2.0) < at(0.0) and at(-2.0) < at(0.0))
            lines.append(f"{kc:<4g}  {phi:<7.4f}  {peak:<12g}  {at(0.0):.6e}  {at(-2.0):.6e}  {at(2.0):.6e}")
    report.checks.append(CheckResult("entropy maximal at one-photon resonance", gating_ok))
    report.sections["resonance scan"] = lines

    spec = SweepSpec(base=base.replace(kc=0.5), axes=(Axis.points("kc", [0.0, 0.5, 1.0]), Axis.linspace("phi", 0.0, 2 * math.pi, 9)))
    serial = strip_banner(render_csv(run_sweep(spec, workers=1)))
    parallel = strip_banner(render_csv(run_sweep(spec, workers=4)))
    report.checks.append(CheckResult("parallel sweep output identical to serial", serial == parallel))


SUITES: Dict[Suite, Callable[[SelftestReport, np.random.Generator], None]] = {
    Suite.STATE: _state_checks,
    Suite.DYNAMICS: _dynamics_checks,
    Suite.STEADY: _steady_checks,
    Suite.DRESSED: _dressed_checks,
    Suite.SPECIAL: _special_checks,
    Suite.SWEEP: _sweep_checks,
}


def run_selftest(suite: Suite = Suite.ALL, seed: int = SEED) -> SelftestReport:
    """Run one suite, or all of them"""
    suite = Suite(suite)
    report = SelftestReport()
    rng = np.random.default_rng(seed)
    selected = list(SUITES) if suite == Suite.ALL else [suite]
    for name in selected:
        start = time.perf_counter()
        try:
            SUITES[name](report, rng)
        except VeeSgcError as e:
            report.checks.append(CheckResult(f"{name.value} suite aborted", False, detail=f"{type(e).__name__}: {e}"))
        logger.info(f"suite {name.value} finished in {time.perf_counter() - start:.2f}s")
    return report


def print_report(report: SelftestReport) -> None:
    print("=" * 72)
    print("vee-sgc selftest")
    print("=" * 72)
    for check in report.checks:
        tag = "INFO" if check.informational else ("PASS" if check.passed else "FAIL")
        residual = f"{check.residual:.3e}" if isinstance(check.residual, float) else ""
        print(f"  [{tag}] {check.name:<52} {residual:>10}  {check.detail}")
    for title, lines in report.sections.items():
        print(f"\n{title}:")
        for line in lines:
            print(f"  {line}")
    print("-" * 72)
    failed = len(report.failures)
    print("ALL CHECKS PASSED" if not failed else f"{failed} CHECK(S) FAILED")
