"""
EIT Medium Response
Physical constants, medium parameters and the microscopic response functions.

Covers the atomic excitation frequencies of the dressed Λ system, the two
detunings that parameterize the probe response, the atomic polarizability and
the local-field-corrected refractive index. Units are strict SI; frequencies are
angular (rad/s) and wavevectors are signed scalars (rad/m) along the propagation axis.

All functions are pure and accept floats or numpy arrays.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy import constants

from .errors import PoleError, ValidationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Singular when |denominator| < POLE_RTOL × natural scale (Ω_c² or 1)
POLE_RTOL = 1e-9
# |Δω| above this fraction of ω_c leaves the near-resonance regime
VALIDITY_RATIO = 1e-3
DEFAULT_LOCAL_FIELD = 2.0 / 3.0
# Common dyadic lattice for wavevectors: sums and differences stay exact
WAVEVECTOR_QUANTUM = 2.0 ** -20


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants used throughout (scipy.constants)"""

    hbar: float = constants.hbar
    eps0: float = constants.epsilon_0
    c: float = constants.c

    def __post_init__(self):
        for name in ("hbar", "eps0", "c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and > 0, got {value}", invariant=f"{name} > 0")


CONSTANTS = PhysicalConstants()


class Level(Enum):
    """Atomic levels carrying excitations"""

    Q = "q"
    E = "e"


def snap_wavevector(k: ArrayLike) -> ArrayLike:
    """Round wavevector(s) onto the 2⁻²⁰ rad/m lattice"""
    snapped = np.round(np.asarray(k, dtype=float) / WAVEVECTOR_QUANTUM) * WAVEVECTOR_QUANTUM
    return _as_output(snapped)


@dataclass(frozen=True)
class MediumParams:
    """
    Medium and control-field parameters

    Args:
        rho: number density (m⁻³)
        mu: transition dipole moment (C·m)
        omega_e: bare excited-state frequency (rad/s)
        omega_q: bare hyperfine-state frequency (rad/s)
        omega_c: control-laser frequency (rad/s)
        Omega_c: control Rabi frequency (rad/s)
        k_c: control wavevector, signed (rad/m); snapped to the wavevector lattice
        M: atomic mass (kg)
        Gamma0: atomic radiative decay rate (s⁻¹)
        x: local-field (contact interaction) factor, dimensionless
    """

    rho: float
    mu: float
    omega_e: float
    omega_q: float
    omega_c: float
    Omega_c: float
    k_c: float
    M: float
    Gamma0: float
    x: float = DEFAULT_LOCAL_FIELD

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}", invariant=f"{name} finite")

        checks = [
            (self.rho > 0, "rho > 0", f"rho (m^-3) must be > 0, got {self.rho}"),
            (self.mu > 0, "mu > 0", f"mu (C*m) must be > 0, got {self.mu}"),
            (self.Omega_c > 0, "Omega_c > 0", f"Omega_c (rad/s) must be > 0, got {self.Omega_c}"),
            (self.M > 0, "M > 0", f"M (kg) must be > 0, got {self.M}"),
            (self.Gamma0 >= 0, "Gamma0 >= 0", f"Gamma0 (1/s) must be >= 0, got {self.Gamma0}"),
            (0.0 <= self.x <= 1.0, "x in [0, 1]", f"x (dimensionless) must lie in [0, 1], got {self.x}"),
            (self.omega_q >= 0, "omega_e > omega_q >= 0", f"omega_q (rad/s) must be >= 0, got {self.omega_q}"),
            (self.omega_e > self.omega_q, "omega_e > omega_q >= 0",
             f"omega_e (rad/s) must exceed omega_q (rad/s), got {self.omega_e} <= {self.omega_q}"),
            (self.omega_c > 0, "omega_c > 0", f"omega_c (rad/s) must be > 0, got {self.omega_c}"),
        ]
        for ok, invariant, message in checks:
            if not ok:
                raise ValidationError(message, invariant=invariant)

        object.__setattr__(self, "k_c", snap_wavevector(self.k_c))


@dataclass(frozen=True)
class Detunings:
    """Two-photon detuning Δω and control mismatch β (rad/s)"""

    delta_omega: ArrayLike
    beta: ArrayLike


def _as_output(value: np.ndarray) -> ArrayLike:
    """Return python floats for 0-d results, arrays otherwise"""
    if np.ndim(value) == 0:
        return float(value)
    return value


def recoil_frequency(params: MediumParams, k: ArrayLike) -> ArrayLike:
    """Recoil term ħk²/2M (rad/s)"""
    k = np.asarray(k, dtype=float)
    return _as_output(CONSTANTS.hbar * k * k / (2.0 * params.M))


def recoil_difference(params: MediumParams, k: ArrayLike, k_ref: float) -> ArrayLike:
    """ħ(k² − k_ref²)/2M, factored so nearby wavevectors keep full precision"""
    k = np.asarray(k, dtype=float)
    return _as_output(CONSTANTS.hbar * (k - k_ref) * (k + k_ref) / (2.0 * params.M))


def atomic_excitation_frequency(params: MediumParams, level: Level, k: ArrayLike) -> ArrayLike:
    """ω_{j,k} = ω_j + ħk²/2M for j ∈ {q, e}"""
    base = params.omega_q if level is Level.Q else params.omega_e
    return _as_output(base + np.asarray(recoil_frequency(params, k)))


def reference_frequency(params: MediumParams, k: ArrayLike) -> ArrayLike:
    """Two-photon reference ω_c + ω_{q,k−k_c}; Δω is measured from it"""
    k = np.asarray(k, dtype=float)
    return _as_output(params.omega_c + np.asarray(atomic_excitation_frequency(params, Level.Q, k - params.k_c)))


def two_photon_detuning(params: MediumParams, omega: ArrayLike, k: ArrayLike) -> ArrayLike:
    """Δω = ω − ω_c − ω_{q,k−k_c}"""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValidationError("omega (rad/s) must be > 0", invariant="omega > 0")
    return _as_output(omega - np.asarray(reference_frequency(params, k)))


def control_mismatch(params: MediumParams, k: ArrayLike) -> ArrayLike:
    """β = ω_{q,k−k_c} + ω_c − ω_{e,k}"""
    k = np.asarray(k, dtype=float)
    bare = (params.omega_q + params.omega_c) - params.omega_e
    recoil = (np.asarray(recoil_frequency(params, k - params.k_c))
              - np.asarray(recoil_frequency(params, k)))
    return _as_output(bare + recoil)


def check_detuning_validity(params: MediumParams, delta_omega: ArrayLike,
                            ratio: float = VALIDITY_RATIO) -> bool:
    """Warn (never raise) when |Δω| leaves the near-resonance regime"""
    worst = float(np.max(np.abs(delta_omega)))
    limit = ratio * params.omega_c
    if worst > limit:
        logger.warning(f"⚠️ |delta_omega| = {worst:.3e} rad/s exceeds validity threshold "
                       f"{limit:.3e} rad/s ({ratio:g} x omega_c)")
        return False
    return True


def detunings(params: MediumParams, omega: ArrayLike, k: ArrayLike,
              ratio: float = VALIDITY_RATIO) -> Detunings:
    """Both detunings at (ω, k), with the validity warning applied"""
    delta_omega = two_photon_detuning(params, omega, k)
    check_detuning_validity(params, delta_omega, ratio)
    return Detunings(delta_omega=delta_omega, beta=control_mismatch(params, k))


def resonance_poles(params: MediumParams, beta: float) -> Tuple[float, float]:
    """
    Roots Δω₋ < 0 < Δω₊ of Δω² + βΔω − Ω_c² = 0

    The larger-magnitude root is taken from the quadratic formula and the other
    from Δω₊·Δω₋ = −Ω_c², avoiding cancellation when |β| is large.
    """
    omega_sq = params.Omega_c ** 2
    disc = math.sqrt(beta * beta + 4.0 * omega_sq)
    if beta >= 0:
        lower = (-beta - disc) / 2.0
        upper = -omega_sq / lower
    else:
        upper = (-beta + disc) / 2.0
        lower = -omega_sq / upper
    return lower, upper


def _response_denominator(params: MediumParams, d: Detunings) -> np.ndarray:
    dw = np.asarray(d.delta_omega, dtype=float)
    return dw * dw + np.asarray(d.beta, dtype=float) * dw - params.Omega_c ** 2


def _check_response_pole(params: MediumParams, d: Detunings, denominator: np.ndarray, pole_rtol: float):
    singular = np.abs(denominator) < pole_rtol * params.Omega_c ** 2
    if np.any(singular):
        index = np.flatnonzero(np.ravel(singular))[0]
        beta = float(np.ravel(np.broadcast_to(d.beta, np.shape(denominator)))[index])
        value = float(np.ravel(np.broadcast_to(d.delta_omega, np.shape(denominator)))[index])
        poles = resonance_poles(params, beta)
        raise PoleError(f"polarizability pole at delta_omega = {value:.6e} rad/s "
                        f"(poles {poles[0]:.6e}, {poles[1]:.6e} rad/s)", poles=poles, value=value)


def polarizability(params: MediumParams, d: Detunings, pole_rtol: float = POLE_RTOL) -> ArrayLike:
    """α = −(μ²/ħ)·Δω/(Δω² + βΔω − Ω_c²)  (C·m²/V)"""
    denominator = _response_denominator(params, d)
    _check_response_pole(params, d, denominator, pole_rtol)
    dw = np.asarray(d.delta_omega, dtype=float)
    return _as_output(-(params.mu ** 2 / CONSTANTS.hbar) * dw / denominator)


def polarizability_derivative(params: MediumParams, d: Detunings, pole_rtol: float = POLE_RTOL) -> ArrayLike:
    """dα/dΔω = (μ²/ħ)·(Δω² + Ω_c²)/(Δω² + βΔω − Ω_c²)²"""
    denominator = _response_denominator(params, d)
    _check_response_pole(params, d, denominator, pole_rtol)
    dw = np.asarray(d.delta_omega, dtype=float)
    return _as_output((params.mu ** 2 / CONSTANTS.hbar) * (dw * dw + params.Omega_c ** 2) / denominator ** 2)


def polarizability_control_derivative(params: MediumParams, d: Detunings,
                                      pole_rtol: float = POLE_RTOL) -> ArrayLike:
    """∂α/∂β = (μ²/ħ)·Δω²/(Δω² + βΔω − Ω_c²)²"""
    denominator = _response_denominator(params, d)
    _check_response_pole(params, d, denominator, pole_rtol)
    dw = np.asarray(d.delta_omega, dtype=float)
    return _as_output((params.mu ** 2 / CONSTANTS.hbar) * dw * dw / denominator ** 2)


def coupling_strength(params: MediumParams) -> float:
    """Collective coupling ρμ²/(ε₀ħ) in rad/s"""
    return params.rho * params.mu ** 2 / (CONSTANTS.eps0 * CONSTANTS.hbar)


def local_field_pole(params: MediumParams) -> float:
    """Polarizability at which n² diverges, ε₀/((1−x)ρ); inf when x = 1"""
    if params.x >= 1.0:
        return math.inf
    return CONSTANTS.eps0 / ((1.0 - params.x) * params.rho)


def _local_field_denominator(params: MediumParams, alpha: ArrayLike, pole_rtol: float) -> np.ndarray:
    scaled = np.asarray(alpha, dtype=float) * params.rho / CONSTANTS.eps0
    denominator = 1.0 - (1.0 - params.x) * scaled
    if np.any(np.abs(denominator) < pole_rtol):
        pole = local_field_pole(params)
        raise PoleError(f"refractive index pole at alpha = {pole:.6e} C*m^2/V", poles=(pole,), value=pole)
    return denominator


def refractive_index_squared(params: MediumParams, alpha: ArrayLike, pole_rtol: float = POLE_RTOL) -> ArrayLike:
    """
    n² = (1 + xαρ/ε₀)/(1 − (1−x)αρ/ε₀)

    Returns a signed value; n² ≤ 0 marks a stop band.
    """
    denominator = _local_field_denominator(params, alpha, pole_rtol)
    scaled = np.asarray(alpha, dtype=float) * params.rho / CONSTANTS.eps0
    return _as_output((1.0 + params.x * scaled) / denominator)


def index_excess(params: MediumParams, alpha: ArrayLike, pole_rtol: float = POLE_RTOL) -> ArrayLike:
    """n² − 1 = (αρ/ε₀)/(1 − (1−x)αρ/ε₀), free of cancellation near α = 0"""
    denominator = _local_field_denominator(params, alpha, pole_rtol)
    scaled = np.asarray(alpha, dtype=float) * params.rho / CONSTANTS.eps0
    return _as_output(scaled / denominator)


def refractive_index_slope(params: MediumParams, alpha: ArrayLike, pole_rtol: float = POLE_RTOL) -> ArrayLike:
    """dn²/dα = (ρ/ε₀)/(1 − (1−x)αρ/ε₀)²"""
    denominator = _local_field_denominator(params, alpha, pole_rtol)
    return _as_output((params.rho / CONSTANTS.eps0) / denominator ** 2)


def resonant_control_frequency(omega_e: float, omega_q: float, k: float, k_c: float, M: float) -> float:
    """Control frequency that makes β vanish for a probe at wavevector k"""
    # ħ(k² − (k − k_c)²)/2M = ħk_c(2k − k_c)/2M
    return omega_e - omega_q + CONSTANTS.hbar * k_c * (2.0 * k - k_c) / (2.0 * M)
