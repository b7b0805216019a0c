"""
Storage, Retrieval and Redirection Protocol
Coherent-state wave packets carried through the three-stage light-storage
protocol: slow-polariton propagation, sudden control switch-off into a pure
spin excitation (magnon), free magnon evolution, and switch-on with a possibly
different control beam.

Amplitudes are c-numbers per plane-wave mode; the quasiparticle number
Σ|α_k|² is the bookkeeping quantity and every weight that leaves the packet is
recorded in a ledger. Wavevectors live on the 2⁻²⁰ rad/m lattice so the
phase-matching identity k − k_c = k′ − k_c′ holds exactly in floating point.

Phases are carried relative to a per-stage reference frequency: the global
part is reduced modulo 2π and only the small per-mode offsets multiply the
elapsed time directly.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dispersion import SLOW_BRANCH, branch_windows, frequency_of_wavevector
from .errors import BandTooWide, DomainError, NoRootInWindow, SlowLightError, ValidationError
from .medium import MediumParams, recoil_frequency, snap_wavevector
from .polariton import composition

logger = logging.getLogger(__name__)

DEFAULT_PACKET_SAMPLES = 65
# Storage shorter than this many radiative lifetimes leaves leakage undissipated
LEAKAGE_LIFETIMES = 5.0
LEDGER_TOLERANCE = 1e-8
TWO_PI = 2.0 * math.pi

TRACE_COLUMNS = ("stage", "t", "k", "re_alpha", "im_alpha", "weight")
ENVELOPE_COLUMNS = ("t", "z", "re_E", "im_E", "abs_E")


class Stage(Enum):
    POLARITON = "polariton"
    MAGNON = "magnon"
    REGENERATED = "regenerated"


class Scenario(Enum):
    DEGENERATE = "degenerate"
    REVERTED = "reverted"
    COUNTER_PROPAGATING = "counter_propagating"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class ModeTable:
    """Slow-branch data for every grid wavevector under one set of medium parameters"""

    grid: np.ndarray
    valid: np.ndarray
    delta_omega: np.ndarray
    n: np.ndarray
    v_full: np.ndarray
    u: np.ndarray
    radiative: np.ndarray
    excited: np.ndarray
    gamma: np.ndarray
    offsets: np.ndarray
    reference_omega: float
    params: MediumParams

    def matches(self, params: MediumParams, grid: np.ndarray) -> bool:
        return (self.params == params and self.grid.shape == grid.shape
                and bool(np.all(self.grid == grid)))


@dataclass(frozen=True, eq=False)
class WavePacket:
    """
    Many-mode coherent state on a uniform wavevector grid

    Args:
        grid: increasing signed wavevectors (rad/m); magnon wavevectors k − k_c in the magnon stage
        amps: complex amplitude per grid point
        branch: branch index of the polariton modes
        stage: protocol stage the packet is in
        carrier_k: central wavevector (rad/m)
        time: time the amplitudes refer to (s)
        modes: slow-branch mode table of a polariton-like packet
    """

    grid: np.ndarray
    amps: np.ndarray
    branch: int
    stage: Stage
    carrier_k: float
    time: float = 0.0
    modes: Optional[ModeTable] = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        amps = np.asarray(self.amps, dtype=complex)
        if grid.ndim != 1 or grid.shape != amps.shape or grid.size == 0:
            raise ValidationError("grid and amps must be equal-length non-empty 1-D arrays",
                                  invariant="len(grid) == len(amps)")
        if grid.size > 1:
            steps = np.diff(grid)
            if np.any(steps <= 0):
                raise ValidationError("grid wavevectors (rad/m) must be strictly increasing",
                                      invariant="grid strictly increasing")
            if np.ptp(steps) > 1e-9 * steps.mean() + 2.0 * np.spacing(np.max(np.abs(grid))):
                raise ValidationError("grid spacing (rad/m) must be uniform", invariant="uniform grid")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "amps", amps)

    @property
    def number(self) -> float:
        """Quasiparticle number Σ|α_k|²"""
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True)
class ProtocolSchedule:
    """Switch-off at t1, switch-on at t2 with Rabi frequency Ω_c′ and control wavevector k_c′"""

    t1: float
    t2: float
    new_Omega_c: float
    new_k_c: float

    def __post_init__(self):
        if not (0.0 <= self.t1 <= self.t2):
            raise ValidationError(f"schedule needs t2 (s) >= t1 (s) >= 0, got t1={self.t1}, t2={self.t2}",
                                  invariant="t2 >= t1 >= 0")
        if not self.new_Omega_c > 0:
            raise ValidationError(f"new_Omega_c (rad/s) must be > 0, got {self.new_Omega_c}",
                                  invariant="new_Omega_c > 0")
        object.__setattr__(self, "new_k_c", snap_wavevector(self.new_k_c))


@dataclass
class LeakageRecord:
    """Weight removed from the packet at one switch event"""

    radiative: float = 0.0
    excited: float = 0.0
    other_branches: float = 0.0
    out_of_window: float = 0.0

    @property
    def total(self) -> float:
        return self.radiative + self.excited + self.other_branches + self.out_of_window


@dataclass(frozen=True)
class FwmReport:
    """Phase-matching analysis of a single regenerated mode"""

    k: float
    k_prime: float
    scenario: Scenario
    delta_omega: float
    delta_omega_prime: float
    frequency_shift: float
    exact_shift: float
    v_g_prime: float
    gamma_prime: float

    def summary(self) -> str:
        return (f"scenario={self.scenario.value} k={self.k:.17g} k_prime={self.k_prime:.17g} "
                f"delta_omega_prime={self.frequency_shift:.17g} exact_shift={self.exact_shift:.17g} "
                f"v_g_prime={self.v_g_prime:.17g} gamma_prime={self.gamma_prime:.17g}")


@dataclass
class ProtocolResult:
    """Outcome and conservation ledger of a protocol run"""

    final_packet: WavePacket
    per_mode_efficiency: np.ndarray
    total_efficiency: float
    leakage_radiative: float
    leakage_excited: float
    leakage_other_branches: float
    leakage_out_of_window: float
    decay_loss: float
    initial_number: float
    regenerated_shift: float
    scenario: Scenario
    warnings: List[str] = field(default_factory=list)
    trace: List[tuple] = field(default_factory=list)

    @property
    def ledger_residual(self) -> float:
        """Initial number minus everything accounted for, relative to the initial number"""
        accounted = (self.final_packet.number + self.leakage_radiative + self.leakage_excited
                     + self.leakage_other_branches + self.leakage_out_of_window + self.decay_loss)
        return (self.initial_number - accounted) / self.initial_number


def switched_params(params: MediumParams, sched: ProtocolSchedule) -> MediumParams:
    """Medium parameters after switch-on: new Rabi frequency and control wavevector"""
    return replace(params, Omega_c=sched.new_Omega_c, k_c=sched.new_k_c)


def classify_scenario(k: float, k_c: float, new_k_c: float) -> Scenario:
    if new_k_c == k_c:
        return Scenario.DEGENERATE
    if new_k_c == -k_c:
        if math.copysign(1.0, k) == math.copysign(1.0, k_c):
            return Scenario.REVERTED
        return Scenario.COUNTER_PROPAGATING
    return Scenario.GENERAL


def slow_modes(params: MediumParams, grid: np.ndarray) -> ModeTable:
    """Solve the slow branch at every grid wavevector; failed points are marked invalid"""
    grid = np.asarray(grid, dtype=float)
    size = grid.size
    columns = {name: np.zeros(size) for name in
               ("delta_omega", "n", "v_full", "u", "radiative", "excited", "gamma")}
    valid = np.zeros(size, dtype=bool)

    for i, k in enumerate(grid):
        try:
            sol = frequency_of_wavevector(params, float(k), SLOW_BRANCH)
            comp = composition(params, sol)
        except SlowLightError as e:
            logger.debug(f"Slow branch unavailable at k={k:.9e}: {e.code}: {e}")
            continue
        valid[i] = True
        ratio = sol.delta_omega / params.Omega_c
        columns["delta_omega"][i] = sol.delta_omega
        columns["n"][i] = sol.n
        columns["v_full"][i] = sol.v_full
        columns["u"][i] = comp.u
        columns["radiative"][i] = comp.radiative_fraction
        columns["excited"][i] = comp.u * comp.u * ratio * ratio
        columns["gamma"][i] = comp.gamma

    # ω_k = (ω_c + ω_q) + [ħ(k − k_c)²/2M + Δω_k]
    offsets = np.asarray(recoil_frequency(params, grid - params.k_c)) + columns["delta_omega"]
    return ModeTable(grid=grid, valid=valid, offsets=offsets,
                     reference_omega=params.omega_c + params.omega_q, params=params, **columns)


def _mode_table(packet: WavePacket, params: MediumParams) -> ModeTable:
    """The packet's cached table when it was built for these parameters and this grid"""
    modes = packet.modes
    if modes is None or not modes.matches(params, packet.grid):
        modes = slow_modes(params, packet.grid)
    return modes


def _phase_factor(reference_omega: float, offsets: np.ndarray, dt: float) -> np.ndarray:
    return np.exp(-1j * (math.fmod(reference_omega * dt, TWO_PI) + offsets * dt))


def gaussian_packet(params: MediumParams, carrier_k: float, bandwidth_ratio: float,
                    samples: int = DEFAULT_PACKET_SAMPLES) -> WavePacket:
    """
    Normalized Gaussian slow-polariton packet

    The grid spans carrier ± bandwidth_ratio·Ω_c/v_g, so the outermost modes sit
    at |Δω| ≈ bandwidth_ratio·Ω_c; |α| is Gaussian with standard deviation one
    third of that half-width.
    """
    if bandwidth_ratio < 0:
        raise ValidationError(f"bandwidth_ratio must be >= 0, got {bandwidth_ratio}", invariant="bandwidth_ratio >= 0")
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}", invariant="samples >= 1")

    carrier_k = float(snap_wavevector(carrier_k))
    windows = branch_windows(params, carrier_k)
    carrier = frequency_of_wavevector(params, carrier_k, SLOW_BRANCH, windows)

    if bandwidth_ratio == 0 or samples == 1:
        grid = np.array([carrier_k])
        amps = np.array([1.0 + 0.0j])
    else:
        window = windows.window_for(SLOW_BRANCH)
        band = bandwidth_ratio * params.Omega_c
        if carrier.delta_omega - band <= window.lower or carrier.delta_omega + band >= window.upper:
            raise BandTooWide(f"band ±{band:.6e} rad/s around delta_omega = {carrier.delta_omega:.6e} rad/s "
                              f"leaves the slow-branch window ({window.lower:.6e}, {window.upper:.6e}) rad/s")
        half_width = band / carrier.v_g
        spacing = float(snap_wavevector(2.0 * half_width / (samples - 1)))
        if spacing <= 0:
            raise ValidationError(f"grid spacing below the wavevector lattice for half-width {half_width:.3e} rad/m",
                                  invariant="grid spacing > 0")
        index = np.arange(samples) - samples // 2
        grid = carrier_k + index * spacing
        sigma = half_width / 3.0
        amps = np.exp(-0.5 * ((grid - carrier_k) / sigma) ** 2).astype(complex)
        amps /= math.sqrt(float(np.sum(np.abs(amps) ** 2)))

    modes = slow_modes(params, grid)
    if not np.all(modes.valid):
        raise BandTooWide(f"{int(np.sum(~modes.valid))} packet modes have no slow-branch solution")

    logger.debug(f"Gaussian packet: {grid.size} modes around k={carrier_k:.9e}, v_g={carrier.v_g:.6e} m/s")
    return WavePacket(grid=grid, amps=amps, branch=SLOW_BRANCH, stage=Stage.POLARITON,
                      carrier_k=carrier_k, modes=modes)


def evolve_polariton_stage(packet: WavePacket, params: MediumParams, dt: float) -> WavePacket:
    """α_k → α_k·exp(−iω_k dt)·exp(−Γ_k dt/2) on the slow branch"""
    if packet.stage not in (Stage.POLARITON, Stage.REGENERATED):
        raise DomainError(f"polariton evolution needs a polariton packet, got stage {packet.stage.value}")
    if dt < 0:
        raise DomainError(f"dt (s) must be >= 0, got {dt}")
    if dt == 0:
        return packet

    modes = _mode_table(packet, params)
    if np.any(~modes.valid & (packet.amps != 0)):
        raise NoRootInWindow("occupied packet modes have no slow-branch solution")
    factor = _phase_factor(modes.reference_omega, modes.offsets, dt) * np.exp(-0.5 * modes.gamma * dt)
    amps = np.where(modes.valid, packet.amps * factor, 0.0)
    return replace(packet, amps=amps, time=packet.time + dt, modes=modes)


def switch_off_map(packet: WavePacket, params: MediumParams) -> Tuple[WavePacket, LeakageRecord]:
    """
    Sudden control switch-off: polariton → magnon

    Each mode keeps i·u_k·α_k on the magnon wavevector k − k_c; the radiative
    (n·v_g/c) and excited-state (u²Δω²/Ω_c²) weights are discarded into the ledger.
    """
    if packet.stage is not Stage.POLARITON:
        raise DomainError(f"switch-off needs a polariton packet, got stage {packet.stage.value}")

    modes = _mode_table(packet, params)
    weights = packet.weights
    leakage = LeakageRecord(radiative=float(np.sum(modes.radiative * weights)),
                            excited=float(np.sum(modes.excited * weights)))
    amps = 1j * modes.u * packet.amps
    magnon = WavePacket(grid=packet.grid - params.k_c, amps=amps, branch=packet.branch,
                        stage=Stage.MAGNON, carrier_k=packet.carrier_k - params.k_c, time=packet.time)
    logger.debug(f"Switch-off: retained {magnon.number:.15g}, radiative {leakage.radiative:.3e}, "
                 f"excited {leakage.excited:.3e}")
    return magnon, leakage


def evolve_magnon_stage(packet: WavePacket, params: MediumParams, dt: float) -> WavePacket:
    """Free spin-excitation evolution at ω_{q,k−k_c}; unimodular, so N is conserved"""
    if packet.stage is not Stage.MAGNON:
        raise DomainError(f"magnon evolution needs a magnon packet, got stage {packet.stage.value}")
    if dt < 0:
        raise DomainError(f"dt (s) must be >= 0, got {dt}")
    if dt == 0:
        return packet
    offsets = np.asarray(recoil_frequency(params, packet.grid))
    amps = packet.amps * _phase_factor(params.omega_q, offsets, dt)
    return replace(packet, amps=amps, time=packet.time + dt)


def _other_branch_weights(params: MediumParams, k: float) -> Tuple[float, float]:
    """u² of branches 1 and 3 at k, for the switch-on log"""
    windows = branch_windows(params, k)
    result = []
    for m in (1, 3):
        try:
            result.append(composition(params, frequency_of_wavevector(params, k, m, windows)).u ** 2)
        except SlowLightError:
            result.append(float("nan"))
    return result[0], result[1]


def switch_on_map(packet: WavePacket, params: MediumParams,
                  sched: ProtocolSchedule) -> Tuple[WavePacket, LeakageRecord]:
    """
    Sudden control switch-on: magnon → regenerated slow polariton

    Magnon q maps to k′ = q + k_c′ with amplitude −i·u′_{k′}. Spin weight not
    projected onto the slow branch (1 − u′²) goes to branches 1 and 3; modes
    outside the new slow-branch window lose all their weight.
    """
    if packet.stage is not Stage.MAGNON:
        raise DomainError(f"switch-on needs a magnon packet, got stage {packet.stage.value}")

    new_params = switched_params(params, sched)
    grid = packet.grid + new_params.k_c
    modes = slow_modes(new_params, grid)
    weights = packet.weights

    projected = np.where(modes.valid, modes.u ** 2, 0.0)
    leakage = LeakageRecord(other_branches=float(np.sum(np.where(modes.valid, (1.0 - projected) * weights, 0.0))),
                            out_of_window=float(np.sum(np.where(modes.valid, 0.0, weights))))
    amps = np.where(modes.valid, -1j * modes.u * packet.amps, 0.0)

    carrier_k = packet.carrier_k + new_params.k_c
    if logger.isEnabledFor(logging.DEBUG):
        lower, upper = _other_branch_weights(new_params, carrier_k)
        carrier = int(np.argmin(np.abs(grid - carrier_k)))
        logger.debug(f"Switch-on carrier weights: slow {projected[carrier]:.15g}, "
                     f"lower {lower:.3e}, upper {upper:.3e}")
    if leakage.out_of_window > 0:
        logger.warning(f"⚠️ {int(np.sum(~modes.valid))} modes fall outside the new slow-branch window, "
                       f"weight {leakage.out_of_window:.3e} lost")

    regenerated = WavePacket(grid=grid, amps=amps, branch=SLOW_BRANCH, stage=Stage.REGENERATED,
                             carrier_k=carrier_k, time=packet.time, modes=modes)
    return regenerated, leakage


def fwm_analyze(params: MediumParams, k: float, sched: ProtocolSchedule) -> FwmReport:
    """
    Phase matching k − k_c = k′ − k_c′ for one mode and the regenerated frequency shift

    For the reverted scenario the shift is reported as 2v_g′(k_c − k); the
    exact difference ω′ − ω is always reported alongside it.
    """
    k = float(snap_wavevector(k))
    new_params = switched_params(params, sched)
    k_prime = (k - params.k_c) + new_params.k_c
    scenario = classify_scenario(k, params.k_c, new_params.k_c)

    original = frequency_of_wavevector(params, k, SLOW_BRANCH)
    regenerated = frequency_of_wavevector(new_params, k_prime, SLOW_BRANCH)
    # both reference frequencies contain the same ω_{q,k−k_c}, so ω′ − ω = Δω′ − Δω
    exact_shift = regenerated.delta_omega - original.delta_omega
    if scenario is Scenario.REVERTED:
        shift = 2.0 * regenerated.v_g * (params.k_c - k)
    else:
        shift = exact_shift

    report = FwmReport(k=k, k_prime=k_prime, scenario=scenario,
                       delta_omega=original.delta_omega, delta_omega_prime=regenerated.delta_omega,
                       frequency_shift=shift, exact_shift=exact_shift, v_g_prime=regenerated.v_g,
                       gamma_prime=composition(new_params, regenerated).gamma)
    logger.info(f"🔀 FWM {scenario.value}: k'={k_prime:.9e} rad/m, shift={shift:.6e} rad/s")
    return report


def _trace_rows(label: str, packet: WavePacket) -> List[tuple]:
    return [(label, packet.time, float(k), float(a.real), float(a.imag), float(abs(a) ** 2))
            for k, a in zip(packet.grid, packet.amps)]


def run_protocol(initial: WavePacket, params: MediumParams, sched: ProtocolSchedule,
                 t_final: float) -> ProtocolResult:
    """Propagate, store, hold, regenerate and propagate again, keeping the full ledger"""
    if initial.stage is not Stage.POLARITON:
        raise DomainError(f"protocol needs a polariton packet, got stage {initial.stage.value}")
    if not initial.time <= sched.t1:
        raise ValidationError(f"t1 (s) must not precede the packet time {initial.time}", invariant="t1 >= packet time")
    if t_final < sched.t2:
        raise ValidationError(f"t_final (s) must be >= t2 (s), got {t_final} < {sched.t2}", invariant="t_final >= t2")

    warnings = []
    storage = sched.t2 - sched.t1
    if params.Gamma0 > 0 and storage < LEAKAGE_LIFETIMES / params.Gamma0:
        message = (f"storage time {storage:.3e} s is shorter than {LEAKAGE_LIFETIMES:g}/Gamma0 = "
                   f"{LEAKAGE_LIFETIMES / params.Gamma0:.3e} s; switch-off leakage may not have dissipated")
        logger.warning(f"⚠️ {message}")
        warnings.append(message)

    new_params = switched_params(params, sched)
    initial_number = initial.number
    trace = _trace_rows("initial", initial)

    propagated = evolve_polariton_stage(initial, params, sched.t1 - initial.time)
    trace += _trace_rows("switch_off", propagated)
    magnon, off_leakage = switch_off_map(propagated, params)
    held = evolve_magnon_stage(magnon, params, storage)
    trace += _trace_rows("switch_on", held)
    regenerated, on_leakage = switch_on_map(held, params, sched)
    final = evolve_polariton_stage(regenerated, new_params, t_final - sched.t2)
    trace += _trace_rows("final", final)

    decay_loss = (initial_number - propagated.number) + (regenerated.number - final.number)
    per_mode = np.where(regenerated.modes.valid,
                        (_mode_table(propagated, params).u * regenerated.modes.u) ** 2, 0.0)
    shift = fwm_analyze(params, initial.carrier_k, sched).frequency_shift

    result = ProtocolResult(
        final_packet=final,
        per_mode_efficiency=per_mode,
        total_efficiency=final.number / initial_number,
        leakage_radiative=off_leakage.radiative,
        leakage_excited=off_leakage.excited,
        leakage_other_branches=on_leakage.other_branches,
        leakage_out_of_window=on_leakage.out_of_window,
        decay_loss=decay_loss,
        initial_number=initial_number,
        regenerated_shift=shift,
        scenario=classify_scenario(initial.carrier_k, params.k_c, new_params.k_c),
        warnings=warnings,
        trace=trace,
    )
    if abs(result.ledger_residual) > LEDGER_TOLERANCE:
        logger.warning(f"⚠️ Protocol ledger does not close: residual {result.ledger_residual:.3e}")
    logger.info(f"📦 Protocol {result.scenario.value}: efficiency {result.total_efficiency:.12f}, "
                f"decay {decay_loss:.3e}, leakage {off_leakage.total + on_leakage.total:.3e}")
    return result


def real_space_envelope(packet: WavePacket, positions: Sequence[float], t: float) -> np.ndarray:
    """
    Slowly varying envelope E(z, t) = Σ_k α_{k,t} e^{i(k − k_carrier)z}

    Amplitudes are carried from the packet time to t with the packet's own mode
    frequencies; the common carrier phase is dropped.
    """
    if packet.stage not in (Stage.POLARITON, Stage.REGENERATED):
        raise DomainError(f"envelope needs a polariton packet, got stage {packet.stage.value}")
    if packet.modes is None:
        raise DomainError("packet carries no mode table; evolve or construct it with medium parameters")

    modes = packet.modes
    tau = t - packet.time
    amps = packet.amps * np.exp(-1j * modes.offsets * tau - 0.5 * modes.gamma * tau)
    z = np.asarray(positions, dtype=float)
    return np.exp(1j * np.outer(z, packet.grid - packet.carrier_k)) @ amps


def envelope_peak(packet: WavePacket, positions: Sequence[float], t: float) -> float:
    """Position of max |E| with parabolic refinement between grid points"""
    z = np.asarray(positions, dtype=float)
    magnitude = np.abs(real_space_envelope(packet, z, t))
    i = int(np.argmax(magnitude))
    if i == 0 or i == z.size - 1:
        return float(z[i])
    a, b, c = magnitude[i - 1], magnitude[i], magnitude[i + 1]
    curvature = a - 2.0 * b + c
    if curvature == 0:
        return float(z[i])
    return float(z[i] + 0.5 * (z[i + 1] - z[i]) * (a - c) / curvature)


def peak_velocity(packet: WavePacket, positions: Sequence[float], t_a: float, t_b: float) -> float:
    """Envelope peak velocity from two snapshots"""
    if t_b == t_a:
        raise DomainError("peak velocity needs two distinct times")
    return (envelope_peak(packet, positions, t_b) - envelope_peak(packet, positions, t_a)) / (t_b - t_a)


def envelope_rows(packet: WavePacket, positions: Sequence[float], times: Sequence[float]) -> List[tuple]:
    """Rows (t, z, re_E, im_E, abs_E) for the envelope CSV"""
    rows = []
    for t in times:
        envelope = real_space_envelope(packet, positions, t)
        rows += [(float(t), float(z), float(e.real), float(e.imag), float(abs(e)))
                 for z, e in zip(positions, envelope)]
    return rows
