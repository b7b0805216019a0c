"""
Polariton Dispersion Solver
Solves ω = c|k|/n(ω, k) for the three polariton branches of the EIT medium.

Branch windows (intervals of Δω where n² > 0) are located by sign-scanning a
logarithmically refined grid around the two resonance poles; eigenfrequencies
are then bracketed inside the requested window and bisected.

All solving is done in the two-photon detuning Δω measured from the reference
ω_c + ω_{q,k−k_c}. In that variable n² − 1 = −AΔω/Q(Δω) with A = ρμ²/(ε₀ħ) and
Q(Δω) = Δω² + (β + (1−x)A)Δω − Ω_c², so nothing cancels against optical
frequencies and the polarizability poles (which sit inside stop bands) are
never evaluated.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import root_scalar

from .errors import (DegenerateWindow, DomainError, NoConvergence, NoRootInWindow,
                     SlowLightError, StopBand, ValidationError)
from .medium import (CONSTANTS, Detunings, MediumParams, check_detuning_validity,
                     control_mismatch, coupling_strength, polarizability,
                     polarizability_control_derivative, polarizability_derivative, reference_frequency,
                     refractive_index_slope, refractive_index_squared, resonance_poles)

logger = logging.getLogger(__name__)

BRANCHES = (1, 2, 3)
SLOW_BRANCH = 2
SCAN_RESOLUTION = 4000
MIN_SCAN_RESOLUTION = 1000
# Absolute bisection tolerance in units of Ω_c
BISECTION_XTOL_RATIO = 1e-12
BISECTION_MAXITER = 60
FIXED_POINT_MAXITER = 100
RESIDUAL_TOLERANCE = 1e-10
# Closest approach of the edge scan to a pole, in units of Ω_c
SCAN_FLOOR_RATIO = 1e-9
MAX_BRACKET_DOUBLINGS = 200

DISPERSION_COLUMNS = ("branch", "k", "omega", "delta_omega", "n", "v_g", "v_full")


@dataclass(frozen=True)
class BranchSolution:
    """One point ω_k^(m) of a polariton branch"""

    m: int
    k: float
    omega: float
    delta_omega: float
    n: float
    v_g: float
    v_full: float
    beta: float = 0.0

    def as_row(self) -> tuple:
        return (self.m, self.k, self.omega, self.delta_omega, self.n, self.v_g, self.v_full)


@dataclass(frozen=True)
class BranchWindow:
    """Open Δω interval with n² > 0 belonging to branch m"""

    m: int
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, delta_omega: float) -> bool:
        return self.lower < delta_omega < self.upper


@dataclass(frozen=True)
class BranchWindows:
    """Resonance poles Δω± and the propagation windows at one wavevector"""

    poles: Tuple[float, float]
    windows: Tuple[BranchWindow, ...]
    beta: float = 0.0

    def window_for(self, m: int) -> BranchWindow:
        for window in self.windows:
            if window.m == m:
                return window
        raise NoRootInWindow(f"no propagation window for branch {m}")

    def branch_of(self, delta_omega: float) -> Optional[int]:
        for window in self.windows:
            if window.contains(delta_omega):
                return window.m
        return None


@dataclass(frozen=True)
class SweepFailure:
    """A sweep point that could not be solved"""

    branch: int
    k: float
    code: str
    message: str


@dataclass
class DispersionSweep:
    """Branch solutions ordered by k, plus the collected per-point failures"""

    branches: Dict[int, List[BranchSolution]] = field(default_factory=dict)
    failures: List[SweepFailure] = field(default_factory=list)

    def rows(self) -> List[tuple]:
        return [sol.as_row() for m in sorted(self.branches) for sol in self.branches[m]]


@dataclass(frozen=True)
class UncoupledModes:
    """Vanishing-density limit at one k, as detunings: photon line and dressed doublet"""

    k: float
    photon: float
    lower: float
    upper: float


def _edge_polynomials(params: MediumParams, beta: float):
    """N(Δω) and Q(Δω): n² = N/Q, edges of the windows are their roots"""
    coupling = coupling_strength(params)
    omega_sq = params.Omega_c ** 2
    x = params.x

    def numerator(dw):
        return dw * dw + (beta - x * coupling) * dw - omega_sq

    def denominator(dw):
        return dw * dw + (beta + (1.0 - x) * coupling) * dw - omega_sq

    return numerator, denominator


def _index_excess_unchecked(params: MediumParams, delta_omega, beta: float):
    """n² − 1 = −AΔω/Q(Δω); infinite on the window edges where Q = 0"""
    _, denominator = _edge_polynomials(params, beta)
    dw = np.asarray(delta_omega, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -coupling_strength(params) * dw / denominator(dw)


def dispersion_mismatch(params: MediumParams, k: float, delta_omega) -> np.ndarray:
    """
    Sign-carrying dispersion residual at fixed k as a function of Δω

    Equals (ω²n² − c²k²)/(ω + c|k|) with ω = ω_c + ω_{q,k−k_c} + Δω, i.e.
    Δω − (c|k| − ω_ref) + ω²(n² − 1)/(ω + c|k|). Same sign as ω²n² − c²k².
    """
    beta = control_mismatch(params, k)
    omega_ref = reference_frequency(params, k)
    light = CONSTANTS.c * abs(k)
    dw = np.asarray(delta_omega, dtype=float)
    omega = omega_ref + dw
    excess = _index_excess_unchecked(params, dw, beta)
    with np.errstate(invalid="ignore", over="ignore"):
        return dw - (light - omega_ref) + omega * omega * excess / (omega + light)


def _scan_grid(poles: Tuple[float, float], span: float, floor: float, resolution: int) -> np.ndarray:
    offsets = np.geomspace(floor, span, max(resolution // 4, 2))
    lower, upper = poles
    pieces = [
        np.array([0.0]),
        lower - offsets, lower + offsets,
        upper - offsets, upper + offsets,
        np.linspace(lower - span, upper + span, max(resolution // 4, 2)),
    ]
    return np.unique(np.concatenate(pieces))


def branch_windows(params: MediumParams, k: float, scan_resolution: int = SCAN_RESOLUTION) -> BranchWindows:
    """
    Locate the propagation windows of all branches at wavevector k

    Poles come from Δω² + βΔω − Ω_c² = 0 in closed form; window edges are
    found by sign-scanning n² on a grid refined logarithmically toward both
    poles, then polished with brentq on the edge polynomial that changed sign.
    """
    if scan_resolution < MIN_SCAN_RESOLUTION:
        raise ValidationError(f"scan_resolution must be >= {MIN_SCAN_RESOLUTION}, got {scan_resolution}",
                              invariant="scan_resolution >= 1000")

    beta = control_mismatch(params, k)
    poles = resonance_poles(params, beta)
    numerator, denominator = _edge_polynomials(params, beta)
    span = 4.0 * (params.Omega_c + abs(beta) + coupling_strength(params))
    floor = SCAN_FLOOR_RATIO * params.Omega_c

    grid = _scan_grid(poles, span, floor, scan_resolution)
    num_sign = np.sign(numerator(grid))
    den_sign = np.sign(denominator(grid))
    changes = np.flatnonzero(np.diff(np.signbit(num_sign * den_sign)))

    edges = []
    for i in changes:
        a, b = grid[i], grid[i + 1]
        num_flip = num_sign[i] != num_sign[i + 1]
        den_flip = den_sign[i] != den_sign[i + 1]
        if num_flip and den_flip:
            raise DegenerateWindow(f"stop band narrower than scan tolerance between "
                                   f"delta_omega = {a:.6e} and {b:.6e} rad/s at k = {k:.6e} rad/m")
        edge_poly = numerator if num_flip else denominator
        edges.append(root_scalar(edge_poly, bracket=(a, b), method="brentq").root)

    bounds = [-math.inf] + edges + [math.inf]
    windows = []
    for lower, upper in zip(bounds[:-1], bounds[1:]):
        if math.isinf(lower) and math.isinf(upper):
            probe = 0.0
        elif math.isinf(lower):
            probe = upper - span
        elif math.isinf(upper):
            probe = lower + span
        else:
            probe = 0.5 * (lower + upper)
        if numerator(probe) * denominator(probe) <= 0:
            continue
        if upper - lower < floor:
            raise DegenerateWindow(f"propagation window ({lower:.6e}, {upper:.6e}) rad/s narrower "
                                   f"than scan tolerance {floor:.3e} rad/s")
        if math.isinf(lower):
            m = 1
        elif math.isinf(upper):
            m = 3
        else:
            m = SLOW_BRANCH
        windows.append(BranchWindow(m=m, lower=lower, upper=upper))

    if [w.m for w in windows] != list(BRANCHES):
        logger.warning(f"⚠️ Unexpected window structure at k = {k:.6e}: {[(w.m, w.lower, w.upper) for w in windows]}")
    logger.debug(f"Windows at k={k:.6e}: poles={poles}, edges={edges}")
    return BranchWindows(poles=poles, windows=tuple(windows), beta=beta)


def _window_grid(lower: float, upper: float, resolution: int) -> np.ndarray:
    width = upper - lower
    offsets = np.geomspace(width * 1e-12, width / 2.0, max(resolution // 2, 2))
    interior = np.linspace(lower, upper, resolution)[1:-1]
    grid = np.unique(np.concatenate([lower + offsets, upper - offsets, interior]))
    return grid[(grid > lower) & (grid < upper)]


def _finite_bracket(mismatch, window: BranchWindow, scale: float) -> Tuple[float, float]:
    """Replace an infinite window end by a finite point beyond the root"""
    lower, upper = window.lower, window.upper
    if math.isinf(lower):
        step = scale
        for _ in range(MAX_BRACKET_DOUBLINGS):
            lower = upper - step
            if mismatch(lower) < 0:
                break
            step *= 2.0
        else:
            raise NoRootInWindow(f"branch {window.m}: no sign change below {upper:.6e} rad/s",
                                 window=(window.lower, window.upper))
    if math.isinf(upper):
        step = scale
        for _ in range(MAX_BRACKET_DOUBLINGS):
            upper = lower + step
            if mismatch(upper) > 0:
                break
            step *= 2.0
        else:
            raise NoRootInWindow(f"branch {window.m}: no sign change above {lower:.6e} rad/s",
                                 window=(window.lower, window.upper))
    return lower, upper


def _group_velocity(params: MediumParams, omega: float, d: Detunings, n: float) -> float:
    """c(n + ω ∂n/∂ω)⁻¹ with ∂n/∂ω = (dn²/dα)(dα/dΔω)/2n"""
    alpha = polarizability(params, d)
    dn2_domega = refractive_index_slope(params, alpha) * polarizability_derivative(params, d)
    return CONSTANTS.c / (n + omega * dn2_domega / (2.0 * n))


def _atomic_drift(params: MediumParams, k: float, d: Detunings, n: float, v_g: float) -> float:
    """
    Non-radiative part of ∂ω/∂k

    Implicit differentiation of ωn(Δω, β) = c|k| with dω_ref/dk = ħ(k − k_c)/M
    and dβ/dk = −ħk_c/M gives
        ∂ω/∂k = sign(k)·v_g + (1 − n·v_g/c)·[ħ(k − k_c)/M + (ħk_c/M)·(∂α/∂β)/(∂α/∂Δω)]
    """
    share = polarizability_control_derivative(params, d) / polarizability_derivative(params, d)
    recoil_rate = CONSTANTS.hbar / params.M
    return (1.0 - n * v_g / CONSTANTS.c) * recoil_rate * ((k - params.k_c) + params.k_c * share)


def _build_solution(params: MediumParams, m: int, k: float, delta_omega: float, beta: float) -> BranchSolution:
    d = Detunings(delta_omega=delta_omega, beta=beta)
    n_sq = refractive_index_squared(params, polarizability(params, d))
    if n_sq <= 0:
        raise StopBand(f"n^2 = {n_sq:.6e} <= 0 at delta_omega = {delta_omega:.6e} rad/s, k = {k:.6e} rad/m")
    n = math.sqrt(n_sq)
    omega_ref = reference_frequency(params, k)
    omega = omega_ref + delta_omega
    light = CONSTANTS.c * abs(k)

    # ωn − c|k| = Δω − (c|k| − ω_ref) + ω(n − 1), with n − 1 = (n² − 1)/(n + 1)
    excess = float(_index_excess_unchecked(params, delta_omega, beta))
    residual = abs(delta_omega - (light - omega_ref) + omega * excess / (n + 1.0)) / light
    if residual > RESIDUAL_TOLERANCE:
        raise NoConvergence(f"dispersion residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:g} "
                            f"at k = {k:.6e} rad/m, branch {m}")

    v_g = _group_velocity(params, omega, d, n)
    v_full = math.copysign(v_g, k) + _atomic_drift(params, k, d, n, v_g)
    return BranchSolution(m=m, k=k, omega=omega, delta_omega=delta_omega, n=n,
                          v_g=v_g, v_full=v_full, beta=beta)


def frequency_of_wavevector(params: MediumParams, k: float, m: int,
                            windows: Optional[BranchWindows] = None,
                            scan_resolution: int = SCAN_RESOLUTION) -> BranchSolution:
    """
    Eigenfrequency ω_k^(m) of branch m at wavevector k

    Args:
        params: medium parameters
        k: signed probe wavevector (rad/m), nonzero
        m: branch index (1 lower, 2 slow, 3 upper)
        windows: precomputed windows at this k, if available
        scan_resolution: points in the bracketing scans

    Returns:
        Fully populated BranchSolution
    """
    if m not in BRANCHES:
        raise DomainError(f"branch index must be one of {BRANCHES}, got {m}")
    if k == 0:
        raise DomainError("k (rad/m) must be nonzero")

    windows = windows or branch_windows(params, k, scan_resolution)
    window = windows.window_for(m)
    beta = windows.beta

    def mismatch(dw):
        return float(dispersion_mismatch(params, k, dw))

    scale = params.Omega_c + abs(beta) + coupling_strength(params) + abs(
        CONSTANTS.c * abs(k) - reference_frequency(params, k))
    lower, upper = _finite_bracket(mismatch, window, scale)

    grid = _window_grid(lower, upper, scan_resolution)
    values = dispersion_mismatch(params, k, grid)
    finite = np.isfinite(values)
    grid, values = grid[finite], values[finite]
    changes = np.flatnonzero(np.diff(np.signbit(values)))
    if changes.size == 0:
        raise NoRootInWindow(f"branch {m}: no sign change of the dispersion function in window "
                             f"({window.lower:.6e}, {window.upper:.6e}) rad/s at k = {k:.6e} rad/m",
                             window=(window.lower, window.upper))
    if changes.size > 1:
        logger.debug(f"Branch {m} at k={k:.6e}: {changes.size} sign changes, using the first")

    i = changes[0]
    result = root_scalar(mismatch, bracket=(grid[i], grid[i + 1]), method="bisect",
                         xtol=BISECTION_XTOL_RATIO * params.Omega_c, maxiter=BISECTION_MAXITER)
    if not result.converged:
        logger.debug(f"Bisection stopped at {BISECTION_MAXITER} iterations for branch {m}, k={k:.6e}")

    check_detuning_validity(params, result.root)
    return _build_solution(params, m, k, result.root, beta)


def _branch_of_detuning(params: MediumParams, delta_omega: float, beta: float) -> int:
    lower, upper = resonance_poles(params, beta)
    if delta_omega < lower:
        return 1
    if delta_omega > upper:
        return 3
    return SLOW_BRANCH


def branch_point(params: MediumParams, delta_omega: float, k_seed: Optional[float] = None) -> BranchSolution:
    """
    Branch solution at a prescribed detuning Δω

    The wavevector follows from k = ω·n(ω, k)/c iterated to a fixed point;
    n depends on k only through recoil terms, so a few steps suffice.
    """
    if k_seed is None:
        k_seed = (params.omega_c + params.omega_q) / CONSTANTS.c
    sign = -1.0 if k_seed < 0 else 1.0
    k = k_seed
    for step in range(FIXED_POINT_MAXITER):
        beta = control_mismatch(params, k)
        d = Detunings(delta_omega=delta_omega, beta=beta)
        n_sq = refractive_index_squared(params, polarizability(params, d))
        if n_sq <= 0:
            raise StopBand(f"n^2 = {n_sq:.6e} <= 0 at delta_omega = {delta_omega:.6e} rad/s")
        k_new = sign * (reference_frequency(params, k) + delta_omega) * math.sqrt(n_sq) / CONSTANTS.c
        if abs(k_new - k) <= 4.0 * np.spacing(abs(k_new)):
            k = k_new
            break
        k = k_new
    else:
        raise NoConvergence(f"wavevector fixed point did not converge in {FIXED_POINT_MAXITER} steps")

    beta = control_mismatch(params, k)
    return _build_solution(params, _branch_of_detuning(params, delta_omega, beta), k, delta_omega, beta)


def wavevector_of_frequency(params: MediumParams, omega: float, k_seed: float) -> float:
    """
    Wavevector k = ω·n(ω, k)/c of a propagating mode at frequency ω

    The sign of k_seed selects the propagation direction.
    """
    sign = -1.0 if k_seed < 0 else 1.0
    k = k_seed if k_seed != 0 else omega / CONSTANTS.c
    for step in range(FIXED_POINT_MAXITER):
        beta = control_mismatch(params, k)
        dw = omega - reference_frequency(params, k)
        n_sq = refractive_index_squared(params, polarizability(params, Detunings(delta_omega=dw, beta=beta)))
        if n_sq <= 0:
            raise StopBand(f"n^2 = {n_sq:.6e} <= 0 at omega = {omega:.9e} rad/s")
        k_new = sign * omega * math.sqrt(n_sq) / CONSTANTS.c
        if abs(k_new - k) <= 4.0 * np.spacing(abs(k_new)):
            logger.debug(f"Wavevector fixed point converged in {step + 1} steps")
            return k_new
        k = k_new
    raise NoConvergence(f"wavevector fixed point did not converge in {FIXED_POINT_MAXITER} steps")


def radiative_group_velocity(params: MediumParams, sol: BranchSolution) -> float:
    """v_g = c(n + ω ∂n/∂ω)⁻¹, analytic through dα/dΔω"""
    d = Detunings(delta_omega=sol.delta_omega, beta=control_mismatch(params, sol.k))
    return _group_velocity(params, sol.omega, d, sol.n)


def atomic_drift_velocity(params: MediumParams, sol: BranchSolution) -> float:
    """∂ω/∂k − sign(k)·v_g: spin-wave drift ħ(k − k_c)/M plus the β(k) dependence of n"""
    d = Detunings(delta_omega=sol.delta_omega, beta=control_mismatch(params, sol.k))
    return _atomic_drift(params, sol.k, d, sol.n, sol.v_g)


def full_group_velocity(params: MediumParams, sol: BranchSolution) -> float:
    """Exact ∂ω/∂k along the branch, signed along the propagation axis"""
    return math.copysign(sol.v_g, sol.k) + atomic_drift_velocity(params, sol)


def resonant_wavevector(params: MediumParams, sign: float = 1.0) -> float:
    """Wavevector of the EIT resonance (Δω = 0, n = 1) in the given direction"""
    seed = math.copysign((params.omega_c + params.omega_q) / CONSTANTS.c, sign)
    return branch_point(params, 0.0, k_seed=seed).k


def closed_form_group_velocity(params: MediumParams) -> float:
    """Slow-light estimate c·2Ω_c²ħε₀/(ω₀μ²ρ) at the EIT resonance"""
    omega0 = reference_frequency(params, resonant_wavevector(params))
    ratio = 2.0 * params.Omega_c ** 2 * CONSTANTS.hbar * CONSTANTS.eps0 / (omega0 * params.mu ** 2 * params.rho)
    return CONSTANTS.c * ratio


def density_for_group_velocity(params: MediumParams, ratio: float) -> float:
    """Density giving v_g/c = ratio exactly at Δω = 0"""
    if not 0 < ratio < 1:
        raise DomainError(f"target v_g/c must lie in (0, 1), got {ratio}")
    omega0 = reference_frequency(params, resonant_wavevector(params))
    return (1.0 / ratio - 1.0) * 2.0 * CONSTANTS.eps0 * CONSTANTS.hbar * params.Omega_c ** 2 / (
        omega0 * params.mu ** 2)


def uncoupled_modes(params: MediumParams, k: float) -> UncoupledModes:
    """Photon line c|k| and the control-split doublet, expressed as Δω"""
    beta = control_mismatch(params, k)
    lower, upper = resonance_poles(params, beta)
    photon = CONSTANTS.c * abs(k) - reference_frequency(params, k)
    return UncoupledModes(k=k, photon=photon, lower=lower, upper=upper)


def local_field_sensitivity(params: MediumParams, detuning_ratio: float = 0.02) -> float:
    """Relative change of slow-branch v_g between x = 2/3 and x = 1 at Δω = ratio·Ω_c"""
    delta_omega = detuning_ratio * params.Omega_c
    reference = branch_point(replace(params, x=2.0 / 3.0), delta_omega)
    contact = branch_point(replace(params, x=1.0), delta_omega, k_seed=reference.k)
    return abs(contact.v_g - reference.v_g) / reference.v_g


def dispersion_sweep(params: MediumParams, k_range: Tuple[float, float], samples: int,
                     branches: Sequence[int] = BRANCHES, workers: Optional[int] = None,
                     scan_resolution: int = SCAN_RESOLUTION) -> DispersionSweep:
    """
    Solve the requested branches on a uniform k grid

    Point failures are collected, logged and skipped; they never abort the sweep.
    """
    if samples < 2:
        raise ValidationError(f"samples must be >= 2, got {samples}", invariant="samples >= 2")
    ks = np.linspace(k_range[0], k_range[1], samples)

    def solve_point(k: float):
        solved, failed = [], []
        try:
            windows = branch_windows(params, k, scan_resolution)
        except SlowLightError as e:
            return solved, [SweepFailure(m, k, e.code, str(e)) for m in branches]
        for m in branches:
            try:
                solved.append(frequency_of_wavevector(params, k, m, windows, scan_resolution))
            except SlowLightError as e:
                failed.append(SweepFailure(m, k, e.code, str(e)))
        return solved, failed

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve_point, (float(k) for k in ks)))
    else:
        results = [solve_point(float(k)) for k in ks]

    sweep = DispersionSweep(branches={m: [] for m in branches})
    for solved, failed in results:
        for sol in solved:
            sweep.branches[sol.m].append(sol)
        sweep.failures.extend(failed)

    for failure in sweep.failures:
        logger.warning(f"⚠️ Sweep point skipped: branch {failure.branch}, k={failure.k:.9e}: {failure.message}")
    logger.info(f"📈 Dispersion sweep: {sum(len(v) for v in sweep.branches.values())} points, "
                f"{len(sweep.failures)} failures")
    return sweep
