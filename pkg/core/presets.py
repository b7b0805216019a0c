"""
Built-in Medium Presets
Named parameter sets for the run configuration `preset` key.
"""

import math
from typing import Callable, Dict

from .errors import ValidationError
from .medium import (CONSTANTS, DEFAULT_LOCAL_FIELD, MediumParams, resonant_control_frequency,
                     snap_wavevector)

# Sodium D2 line, 3S½ F=1 → 3P3/2 (Steck, "Sodium D Line Data")
SODIUM_WAVELENGTH = 589.0e-9
# Ground-state hyperfine splitting F=1 ↔ F=2
SODIUM_HYPERFINE = 2.0 * math.pi * 1.7716e9
# Natural linewidth of 3P3/2
SODIUM_GAMMA0 = 6.15e7
SODIUM_MASS = 3.8175e-26


def dipole_from_linewidth(omega: float, gamma0: float) -> float:
    """μ from Γ₀ = ω³μ²/(3πε₀ħc³)"""
    return math.sqrt(3.0 * math.pi * CONSTANTS.eps0 * CONSTANTS.hbar * CONSTANTS.c ** 3 * gamma0 / omega ** 3)


def hau2001(x: float = DEFAULT_LOCAL_FIELD) -> MediumParams:
    """
    Stored-light experiment in a sodium condensate

    Ω_c = Γ₀/2 and the density is chosen so the slow-branch group velocity at
    the EIT resonance is ≈ 10⁻⁷c; control and probe co-propagate and the control
    frequency is resonant (β = 0) at the probe resonance.
    """
    omega_e = 2.0 * math.pi * CONSTANTS.c / SODIUM_WAVELENGTH
    k_c = float(snap_wavevector((omega_e - SODIUM_HYPERFINE) / CONSTANTS.c))
    k_probe = float(snap_wavevector(omega_e / CONSTANTS.c))
    return MediumParams(
        rho=1.24e19,
        mu=dipole_from_linewidth(omega_e, SODIUM_GAMMA0),
        omega_e=omega_e,
        omega_q=SODIUM_HYPERFINE,
        omega_c=resonant_control_frequency(omega_e, SODIUM_HYPERFINE, k_probe, k_c, SODIUM_MASS),
        Omega_c=0.5 * SODIUM_GAMMA0,
        k_c=k_c,
        M=SODIUM_MASS,
        Gamma0=SODIUM_GAMMA0,
        x=x,
    )


PRESETS: Dict[str, Callable[..., MediumParams]] = {
    "hau2001": hau2001,
}


def preset_params(name: str) -> MediumParams:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValidationError(f"unknown preset '{name}' (available: {', '.join(sorted(PRESETS))})",
                              invariant="preset is a known name") from None
