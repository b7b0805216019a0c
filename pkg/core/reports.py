"""
Simulation Reports
Command execution for the CLI and the deterministic CSV writers.

Every CSV starts with a `# schema=1` line followed by the header; floats are
written with 17 significant digits so identical runs give identical bytes.
"""

import csv
import logging
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .dispersion import DISPERSION_COLUMNS, SLOW_BRANCH, dispersion_sweep, frequency_of_wavevector, resonant_wavevector
from .medium import snap_wavevector
from .polariton import COMPOSITION_COLUMNS, composition_sweep
from .protocol import (ENVELOPE_COLUMNS, TRACE_COLUMNS, ProtocolSchedule, envelope_rows, fwm_analyze,
                       gaussian_packet, run_protocol)
from .run_config import RunConfig

logger = logging.getLogger(__name__)

SCHEMA_LINE = "# schema=1"
# Default sweep half-width in units of Ω_c/v_g around the carrier
SWEEP_HALF_WIDTH = 1.5
ENVELOPE_SNAPSHOTS = 5


class _Unmonitored:
    def stage(self, name: str):
        return nullcontext()


@dataclass
class RunOutcome:
    """Files written and the one-line summary of a command"""

    command: str
    files: List[Path] = field(default_factory=list)
    summary: str = ""


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write a versioned CSV and return the number of data rows"""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(SCHEMA_LINE + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"💾 Wrote {count} rows to {path}")
    return count


def carrier_wavevector(config: RunConfig) -> float:
    """Configured carrier, or the EIT resonance in the +z direction"""
    chosen = config.carrier_k if config.carrier_k is not None else config.k
    if chosen is None:
        return resonant_wavevector(config.medium)
    return float(snap_wavevector(chosen))


def sweep_range(config: RunConfig):
    if config.k_range is not None:
        return config.k_range
    params = config.medium
    carrier = carrier_wavevector(config)
    v_g = frequency_of_wavevector(params, carrier, SLOW_BRANCH).v_g
    half_width = SWEEP_HALF_WIDTH * params.Omega_c / v_g
    return carrier - half_width, carrier + half_width


def schedule(config: RunConfig) -> ProtocolSchedule:
    return ProtocolSchedule(t1=config.t1, t2=config.switch_on_time,
                            new_Omega_c=config.switched_Omega_c, new_k_c=config.switched_k_c)


def _run_dispersion(config: RunConfig, out_dir: Path, monitor) -> RunOutcome:
    with monitor.stage("dispersion_sweep"):
        sweep = dispersion_sweep(config.medium, sweep_range(config), config.sweep_samples,
                                 config.branches, config.workers)
    with monitor.stage("write_csv"):
        path = out_dir / "dispersion.csv"
        rows = write_csv(path, DISPERSION_COLUMNS, sweep.rows())
    return RunOutcome("dispersion", [path], f"dispersion rows={rows} failures={len(sweep.failures)}")


def _run_composition(config: RunConfig, out_dir: Path, monitor) -> RunOutcome:
    with monitor.stage("composition_sweep"):
        sweep = composition_sweep(config.medium, sweep_range(config), config.sweep_samples,
                                  config.branches, config.workers)
    with monitor.stage("write_csv"):
        path = out_dir / "composition.csv"
        rows = write_csv(path, COMPOSITION_COLUMNS, sweep.rows)
    return RunOutcome("composition", [path], f"composition rows={rows} failures={len(sweep.failures)}")


def _envelope_positions(packet, start: float, speed: float, duration: float, samples: int) -> np.ndarray:
    """z grid following the pulse from `start` over `duration`, at most 0.9 of one alias period wide"""
    centre = start + 0.5 * speed * duration
    if packet.grid.size > 1:
        spread = 0.5 * (packet.grid[-1] - packet.grid[0])
        # the envelope repeats every 2π/Δk in z
        period = 2.0 * np.pi / (packet.grid[1] - packet.grid[0])
        half_span = min(24.0 / spread + 0.5 * abs(speed) * duration, 0.45 * period)
    else:
        half_span = 1e-3
    return np.linspace(centre - half_span, centre + half_span, samples)


def _run_protocol(config: RunConfig, out_dir: Path, monitor) -> RunOutcome:
    params = config.medium
    sched = schedule(config)
    with monitor.stage("initial_packet"):
        packet = gaussian_packet(params, carrier_wavevector(config), config.bandwidth_ratio, config.packet_modes)
    with monitor.stage("protocol"):
        result = run_protocol(packet, params, sched, config.final_time)

    final = result.final_packet
    centre_index = int(np.argmin(np.abs(final.grid - final.carrier_k)))
    stored_at = packet.modes.v_full[int(np.argmin(np.abs(packet.grid - packet.carrier_k)))] * sched.t1
    speed = final.modes.v_full[centre_index]
    duration = config.final_time - sched.t2
    positions = _envelope_positions(final, stored_at, speed, duration, config.z_samples)
    if duration > 0:
        times = np.linspace(sched.t2, config.final_time, ENVELOPE_SNAPSHOTS)
    else:
        times = np.array([sched.t2])

    with monitor.stage("write_csv"):
        trace_path = out_dir / "protocol_trace.csv"
        envelope_path = out_dir / "protocol_envelope.csv"
        write_csv(trace_path, TRACE_COLUMNS, result.trace)
        write_csv(envelope_path, ENVELOPE_COLUMNS, envelope_rows(final, positions, times))

    summary = (f"protocol scenario={result.scenario.value} efficiency={format_value(result.total_efficiency)} "
               f"ledger_residual={format_value(result.ledger_residual)} "
               f"shift={format_value(result.regenerated_shift)}")
    return RunOutcome("protocol", [trace_path, envelope_path], summary)


def _run_fwm(config: RunConfig, out_dir: Path, monitor) -> RunOutcome:
    with monitor.stage("fwm"):
        report = fwm_analyze(config.medium, carrier_wavevector(config), schedule(config))
    return RunOutcome("fwm", [], report.summary())


COMMAND_RUNNERS = {
    "dispersion": _run_dispersion,
    "composition": _run_composition,
    "protocol": _run_protocol,
    "fwm": _run_fwm,
}


def run(config: RunConfig, out_dir: Optional[Path] = None, monitor=None) -> RunOutcome:
    """
    Execute a validated configuration

    Args:
        config: parsed run configuration
        out_dir: output directory; defaults to the configured output_path
        monitor: RunMonitor recording stage timings

    Returns:
        RunOutcome with the written files and a summary line
    """
    if monitor is None:
        monitor = _Unmonitored()
    out_dir = Path(out_dir if out_dir is not None else config.output_path)
    logger.info(f"🚀 Running {config.command} → {out_dir}")
    outcome = COMMAND_RUNNERS[config.command](config, out_dir, monitor)
    logger.info(f"✅ {outcome.summary}")
    return outcome
