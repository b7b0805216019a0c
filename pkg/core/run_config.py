"""
Run Configuration
Flat `key = value` run files for the simulator CLI.

Lines are `key = value`; `#` starts a comment; blank lines are ignored.
Every key may appear once. All physical values are SI.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from .dispersion import BRANCHES
from .errors import ParseError, ValidationError
from .medium import (CONSTANTS, DEFAULT_LOCAL_FIELD, MediumParams, resonant_control_frequency,
                     snap_wavevector)
from .presets import preset_params

logger = logging.getLogger(__name__)

COMMANDS = ("dispersion", "composition", "protocol", "fwm")

MEDIUM_UNITS = {
    "rho": "m^-3",
    "mu": "C*m",
    "omega_e": "rad/s",
    "omega_q": "rad/s",
    "omega_c": "rad/s",
    "Omega_c": "rad/s",
    "k_c": "rad/m",
    "M": "kg",
    "Gamma0": "1/s",
    "x": "dimensionless",
}
RUN_UNITS = {
    "command": "one of " + ", ".join(COMMANDS),
    "preset": "preset name",
    "k_range": "rad/m, 'lo, hi'",
    "samples": "count",
    "branches": "comma-separated branch indices",
    "k": "rad/m",
    "carrier_k": "rad/m",
    "bandwidth_ratio": "dimensionless, band half-width / Omega_c",
    "t1": "s",
    "t2": "s",
    "t_final": "s",
    "new_Omega_c": "rad/s",
    "new_k_c": "rad/m, or k_c / -k_c",
    "z_samples": "count",
    "workers": "count",
    "output_path": "directory",
}
KNOWN_KEYS = {**MEDIUM_UNITS, **RUN_UNITS}
REQUIRED_MEDIUM_KEYS = ("rho", "mu", "omega_e", "omega_q", "Omega_c", "M", "Gamma0")

DEFAULT_SWEEP_SAMPLES = 201
DEFAULT_PACKET_MODES = 65
DEFAULT_Z_SAMPLES = 401


@dataclass(frozen=True)
class RunConfig:
    """
    Validated run configuration

    Unset optional values are resolved when the command runs: the carrier
    defaults to the EIT resonance, the sweep range to carrier ± 1.5·Ω_c/v_g.
    """

    command: str
    medium: MediumParams
    k_range: Optional[Tuple[float, float]] = None
    samples: Optional[int] = None
    branches: Tuple[int, ...] = BRANCHES
    k: Optional[float] = None
    carrier_k: Optional[float] = None
    bandwidth_ratio: float = 0.0
    t1: float = 0.0
    t2: Optional[float] = None
    t_final: Optional[float] = None
    new_Omega_c: Optional[float] = None
    new_k_c: Optional[float] = None
    z_samples: int = DEFAULT_Z_SAMPLES
    workers: int = 1
    output_path: str = "."

    @property
    def sweep_samples(self) -> int:
        return self.samples or DEFAULT_SWEEP_SAMPLES

    @property
    def packet_modes(self) -> int:
        return self.samples or DEFAULT_PACKET_MODES

    @property
    def switch_on_time(self) -> float:
        return self.t1 if self.t2 is None else self.t2

    @property
    def final_time(self) -> float:
        return self.switch_on_time if self.t_final is None else self.t_final

    @property
    def switched_Omega_c(self) -> float:
        return self.medium.Omega_c if self.new_Omega_c is None else self.new_Omega_c

    @property
    def switched_k_c(self) -> float:
        return self.medium.k_c if self.new_k_c is None else self.new_k_c


def _split_lines(text: str) -> Dict[str, Tuple[str, int]]:
    entries: Dict[str, Tuple[str, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got '{line}'", lines=(number,))
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("missing key before '='", lines=(number,))
        if not value:
            raise ParseError(f"missing value for key '{key}'", lines=(number,))
        if key not in KNOWN_KEYS:
            raise ParseError(f"unknown key '{key}'", lines=(number,))
        if key in entries:
            raise ParseError(f"duplicate key '{key}'", lines=(entries[key][1], number))
        entries[key] = (value, number)
    return entries


def _unit(key: str) -> str:
    return KNOWN_KEYS[key]


def _float(entries, key: str) -> Optional[float]:
    if key not in entries:
        return None
    value, number = entries[key]
    try:
        result = float(value)
    except ValueError:
        raise ParseError(f"{key} ({_unit(key)}) must be a number, got '{value}'", lines=(number,)) from None
    if not math.isfinite(result):
        raise ValidationError(f"{key} ({_unit(key)}) must be finite, got {value}", invariant=f"{key} finite")
    return result


def _int(entries, key: str, minimum: int) -> Optional[int]:
    if key not in entries:
        return None
    value, number = entries[key]
    try:
        result = int(value)
    except ValueError:
        raise ParseError(f"{key} ({_unit(key)}) must be an integer, got '{value}'", lines=(number,)) from None
    if result < minimum:
        raise ValidationError(f"{key} ({_unit(key)}) must be >= {minimum}, got {result}",
                              invariant=f"{key} >= {minimum}")
    return result


def _medium(entries) -> MediumParams:
    overrides = {key: _float(entries, key) for key in MEDIUM_UNITS if key in entries}

    if "preset" in entries:
        base = preset_params(entries["preset"][0])
        return replace(base, **overrides) if overrides else base

    for key in REQUIRED_MEDIUM_KEYS:
        if key not in overrides:
            raise ValidationError(f"missing key '{key}' ({_unit(key)})", invariant=f"{key} given")

    omega_e, omega_q, M = overrides["omega_e"], overrides["omega_q"], overrides["M"]
    omega_c = overrides.get("omega_c")
    k_c = overrides.get("k_c")
    if k_c is None:
        k_c = (omega_c if omega_c is not None else omega_e - omega_q) / CONSTANTS.c
    if omega_c is None:
        probe = _float(entries, "carrier_k") or _float(entries, "k") or omega_e / CONSTANTS.c
        omega_c = resonant_control_frequency(omega_e, omega_q, float(snap_wavevector(probe)),
                                             float(snap_wavevector(k_c)), M)

    return MediumParams(
        rho=overrides["rho"], mu=overrides["mu"], omega_e=omega_e, omega_q=omega_q,
        omega_c=omega_c, Omega_c=overrides["Omega_c"], k_c=k_c, M=M,
        Gamma0=overrides["Gamma0"], x=overrides.get("x", DEFAULT_LOCAL_FIELD),
    )


def _k_range(entries) -> Optional[Tuple[float, float]]:
    if "k_range" not in entries:
        return None
    value, number = entries["k_range"]
    parts = [p.strip() for p in value.split(",")]
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ParseError(f"k_range ({_unit('k_range')}) must be two numbers, got '{value}'",
                         lines=(number,)) from None
    if not lo < hi:
        raise ValidationError(f"k_range (rad/m) needs lo < hi, got {lo}, {hi}", invariant="k_range lo < hi")
    return lo, hi


def _new_k_c(entries, medium: MediumParams) -> Optional[float]:
    """Numeric value, or `k_c` / `-k_c` to reuse or reverse the control wavevector"""
    if "new_k_c" not in entries:
        return None
    symbol = entries["new_k_c"][0].replace(" ", "")
    if symbol == "k_c":
        return medium.k_c
    if symbol == "-k_c":
        return -medium.k_c
    return _float(entries, "new_k_c")


def _branches(entries) -> Tuple[int, ...]:
    if "branches" not in entries:
        return BRANCHES
    value, number = entries["branches"]
    try:
        branches = tuple(sorted({int(p) for p in value.split(",")}))
    except ValueError:
        raise ParseError(f"branches must be integers, got '{value}'", lines=(number,)) from None
    if not branches or any(m not in BRANCHES for m in branches):
        raise ValidationError(f"branches must be drawn from {BRANCHES}, got {value}", invariant="branch in {1, 2, 3}")
    return branches


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a run configuration

    Args:
        text: configuration file contents

    Returns:
        Validated RunConfig

    Raises:
        ParseError: malformed line, unknown or duplicate key
        ValidationError: a value violates a documented invariant
    """
    entries = _split_lines(text)
    if "command" not in entries:
        raise ValidationError(f"missing key 'command' ({_unit('command')})", invariant="command given")
    command = entries["command"][0]
    if command not in COMMANDS:
        raise ValidationError(f"command must be one of {', '.join(COMMANDS)}, got '{command}'",
                              invariant="known command")

    medium = _medium(entries)
    config = RunConfig(
        command=command,
        medium=medium,
        k_range=_k_range(entries),
        samples=_int(entries, "samples", 1),
        branches=_branches(entries),
        k=_float(entries, "k"),
        carrier_k=_float(entries, "carrier_k"),
        bandwidth_ratio=_float(entries, "bandwidth_ratio") or 0.0,
        t1=_float(entries, "t1") or 0.0,
        t2=_float(entries, "t2"),
        t_final=_float(entries, "t_final"),
        new_Omega_c=_float(entries, "new_Omega_c"),
        new_k_c=_new_k_c(entries, medium),
        z_samples=_int(entries, "z_samples", 3) or DEFAULT_Z_SAMPLES,
        workers=_int(entries, "workers", 1) or 1,
        output_path=entries["output_path"][0] if "output_path" in entries else ".",
    )
    _check_schedule(config)
    logger.debug(f"Parsed {command} config with {len(entries)} keys")
    return config


def _check_schedule(config: RunConfig):
    checks = [
        (config.bandwidth_ratio >= 0, "bandwidth_ratio >= 0",
         f"bandwidth_ratio ({_unit('bandwidth_ratio')}) must be >= 0, got {config.bandwidth_ratio}"),
        (config.t1 >= 0, "t1 >= 0", f"t1 (s) must be >= 0, got {config.t1}"),
        (config.switch_on_time >= config.t1, "t2 >= t1",
         f"t2 (s) must be >= t1 (s), got {config.switch_on_time} < {config.t1}"),
        (config.final_time >= config.switch_on_time, "t_final >= t2",
         f"t_final (s) must be >= t2 (s), got {config.final_time} < {config.switch_on_time}"),
        (config.switched_Omega_c > 0, "new_Omega_c > 0",
         f"new_Omega_c (rad/s) must be > 0, got {config.switched_Omega_c}"),
        (config.k != 0, "k != 0", "k (rad/m) must be nonzero"),
        (config.carrier_k != 0, "carrier_k != 0", "carrier_k (rad/m) must be nonzero"),
    ]
    for ok, invariant, message in checks:
        if not ok:
            raise ValidationError(message, invariant=invariant)
