"""
Polariton Composition
Photon, spin-excitation and excited-state content of a polariton mode, its
Bose normalization and its radiative decay rate.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from .dispersion import (BRANCHES, SLOW_BRANCH, SCAN_RESOLUTION, BranchSolution, SweepFailure,
                         branch_point, dispersion_sweep)
from .errors import DomainError, ValidationError
from .medium import CONSTANTS, Detunings, MediumParams

logger = logging.getLogger(__name__)

# Slack allowed on n·v_g/c ≤ 1 before a solution is considered inconsistent
RADIATIVE_FRACTION_SLACK = 1e-12
# Propagation time of the stored-light experiment (s)
EXPERIMENT_DURATION = 11.8e-6

# schema=1 composition CSV; gamma_order_of_magnitude extends the base column set and is
# 1 on branches 1 and 3, where Γ is only an order-of-magnitude estimate
COMPOSITION_COLUMNS = ("branch", "k", "delta_omega", "u", "photon_plus", "photon_minus",
                       "excited", "gamma", "normalization_residual", "gamma_order_of_magnitude")


@dataclass(frozen=True)
class PolaritonComposition:
    """
    Mode amplitudes of one polariton

    Args:
        u: spin-excitation amplitude
        photon_plus: co-propagating photon coefficient √(v_g/c)·(n+1)/2
        photon_minus: counter-rotating photon coefficient √(v_g/c)·(n−1)/2
        excited: excited-state amplitude u·Δω/Ω_c
        gamma: population decay rate (s⁻¹)
        branch: branch index the point belongs to
        Omega_c: control Rabi frequency the composition was computed with (rad/s)
    """

    u: float
    photon_plus: float
    photon_minus: float
    excited: float
    gamma: float
    branch: int = SLOW_BRANCH
    Omega_c: float = 1.0

    @property
    def radiative_fraction(self) -> float:
        """n·v_g/c, the photon share of the quasiparticle number"""
        return self.photon_plus ** 2 - self.photon_minus ** 2

    @property
    def gamma_is_order_of_magnitude(self) -> bool:
        """Γ off the slow branch is only an order-of-magnitude estimate"""
        return self.branch != SLOW_BRANCH


@dataclass
class CompositionSweep:
    """Composition rows for the CLI plus the dispersion failures behind them"""

    rows: List[tuple] = field(default_factory=list)
    failures: List[SweepFailure] = field(default_factory=list)


def hopfield_u(params: MediumParams, sol: BranchSolution) -> float:
    """u = (1 − n·v_g/c)^½ · [1 + (Δω/Ω_c)²]^−½"""
    radiative = sol.n * sol.v_g / CONSTANTS.c
    if radiative > 1.0 + RADIATIVE_FRACTION_SLACK:
        raise DomainError(f"n*v_g/c = {radiative:.15g} exceeds 1 at k = {sol.k:.9e} rad/m, "
                          f"branch {sol.m}: inconsistent dispersion solution")
    ratio = sol.delta_omega / params.Omega_c
    return math.sqrt(max(0.0, 1.0 - radiative)) / math.sqrt(1.0 + ratio * ratio)


def decay_rate(params: MediumParams, comp: PolaritonComposition, d: Detunings) -> float:
    """Γ = u²(Δω/Ω_c)²Γ₀, a population rate"""
    ratio = float(d.delta_omega) / params.Omega_c
    return comp.u * comp.u * ratio * ratio * params.Gamma0


def composition(params: MediumParams, sol: BranchSolution) -> PolaritonComposition:
    """Full mode composition at a branch solution"""
    u = hopfield_u(params, sol)
    scale = math.sqrt(sol.v_g / CONSTANTS.c)
    comp = PolaritonComposition(
        u=u,
        photon_plus=scale * (sol.n + 1.0) / 2.0,
        photon_minus=scale * (sol.n - 1.0) / 2.0,
        excited=u * sol.delta_omega / params.Omega_c,
        gamma=0.0,
        branch=sol.m,
        Omega_c=params.Omega_c,
    )
    gamma = decay_rate(params, comp, Detunings(delta_omega=sol.delta_omega, beta=sol.beta))
    return replace(comp, gamma=gamma)


def normalization_residual(comp: PolaritonComposition, d: Detunings) -> float:
    """photon_plus² − photon_minus² + u²[1 + (Δω/Ω_c)²] − 1"""
    ratio = float(d.delta_omega) / comp.Omega_c
    spin = comp.u * comp.u * (1.0 + ratio * ratio)
    return comp.photon_plus ** 2 - comp.photon_minus ** 2 + spin - 1.0


def survival_fraction(gamma: float, duration: float) -> float:
    """Surviving quasiparticle fraction e^{−Γt}"""
    if duration < 0:
        raise ValidationError(f"duration (s) must be >= 0, got {duration}", invariant="duration >= 0")
    return math.exp(-gamma * duration)


def band_edge_loss(params: MediumParams, detuning_ratio: float = 0.02,
                   duration: float = EXPERIMENT_DURATION) -> float:
    """Decay loss 1 − e^{−Γt} of the slow-branch mode at Δω = ratio·Ω_c"""
    sol = branch_point(params, detuning_ratio * params.Omega_c)
    comp = composition(params, sol)
    loss = 1.0 - survival_fraction(comp.gamma, duration)
    logger.debug(f"Band edge |Δω|/Ω_c={detuning_ratio}: Γ={comp.gamma:.6e} 1/s, loss={loss:.4f}")
    return loss


def composition_sweep(params: MediumParams, k_range: Tuple[float, float], samples: int,
                      branches: Sequence[int] = BRANCHES, workers: Optional[int] = None,
                      scan_resolution: int = SCAN_RESOLUTION) -> CompositionSweep:
    """Composition of every solved sweep point, ordered by branch then k"""
    sweep = dispersion_sweep(params, k_range, samples, branches, workers, scan_resolution)
    result = CompositionSweep(failures=list(sweep.failures))
    flagged = 0
    worst = 0.0

    for m in sorted(sweep.branches):
        for sol in sweep.branches[m]:
            comp = composition(params, sol)
            residual = normalization_residual(comp, Detunings(delta_omega=sol.delta_omega, beta=sol.beta))
            worst = max(worst, abs(residual))
            flagged += comp.gamma_is_order_of_magnitude
            result.rows.append((m, sol.k, sol.delta_omega, comp.u, comp.photon_plus, comp.photon_minus,
                                comp.excited, comp.gamma, residual, int(comp.gamma_is_order_of_magnitude)))

    if flagged:
        logger.warning(f"⚠️ {flagged} decay rates off the slow branch are order-of-magnitude estimates")
    logger.info(f"🧮 Composition sweep: {len(result.rows)} rows, max |normalization residual| = {worst:.3e}")
    return result
