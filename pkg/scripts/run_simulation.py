#!/usr/bin/env python3
"""
Slow-Light Simulation Runner
Main entry point: `run_simulation.py <command> --config <path> [--out <dir>]`
"""

import json
import sys
from pathlib import Path
from typing import Optional

import click

# Add project root to path
sys.path.append(str(Path(__file__).parent.parent))

from core.errors import ParseError
from core.reports import run
from core.run_config import COMMANDS, parse_config
from production.error_handler import SimulationErrorHandler, render_error, setup_logging
from production.performance_monitor import RunMonitor

DEFAULT_SETTINGS = Path(__file__).parent.parent / "config" / "production.json"


def get_default_settings() -> dict:
    """Built-in runtime settings used when no settings file is present"""
    return {
        "environment": "production",
        "logging": {
            "level": "WARNING",
            "log_dir": None
        },
        "performance": {
            "monitoring_enabled": False,
            "report_dir": None
        }
    }


def load_settings(settings_path: Optional[str]) -> dict:
    """Load runtime settings from JSON, falling back to the defaults"""
    path = Path(settings_path) if settings_path else DEFAULT_SETTINGS
    if not path.exists():
        return get_default_settings()
    with open(path, 'r') as f:
        settings = json.load(f)
    defaults = get_default_settings()
    for section, values in defaults.items():
        if isinstance(values, dict):
            settings[section] = {**values, **settings.get(section, {})}
        else:
            settings.setdefault(section, values)
    return settings


def execute(command: str, config_path: str, out: Optional[str], settings_path: Optional[str]):
    settings = load_settings(settings_path)
    logger = setup_logging(settings["logging"]["level"], settings["logging"]["log_dir"])
    perf = settings["performance"]
    monitor = RunMonitor(enabled=perf["monitoring_enabled"])

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise ParseError(f"run file is not valid UTF-8 text (byte {e.start}: {e.reason})") from None
    config = parse_config(text)
    if config.command != command:
        raise click.UsageError(f"config file is for '{config.command}', not '{command}'")

    outcome = run(config, Path(out) if out else None, monitor)
    monitor.log_summary()
    if perf["report_dir"]:
        monitor.export_metrics(str(Path(perf["report_dir"]) / f"{command}_performance.json"))

    logger.debug(f"Files: {[str(p) for p in outcome.files]}")
    click.echo(outcome.summary)


def _command(name: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False),
                  help="Flat key = value run configuration")
    @click.option("--out", type=click.Path(file_okay=False), default=None,
                  help="Output directory (default: output_path from the config)")
    @click.option("--settings", "settings_path", type=click.Path(dir_okay=False), default=None,
                  help="Runtime settings JSON (default: config/production.json)")
    def command(config_path, out, settings_path):
        execute(name, config_path, out, settings_path)

    return command


@click.group()
def cli():
    """EIT slow-light polariton simulator"""


HELP = {
    "dispersion": "Sweep the polariton branches and write dispersion.csv",
    "composition": "Write photon / spin / excited-state composition per branch point",
    "protocol": "Run storage, retrieval and redirection and write trace and envelope CSVs",
    "fwm": "Print the phase-matching report of one regenerated mode",
}
for _name in COMMANDS:
    _command(_name, HELP[_name])


def main(argv=None) -> int:
    """Run the CLI; every failure prints one `error:` line and returns nonzero"""
    handler = SimulationErrorHandler()
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("error: aborted: interrupted", err=True)
        return 1
    except click.ClickException as e:
        click.echo(f"error: usage_error: {' '.join(e.format_message().split())}", err=True)
        return 2
    except Exception as e:
        handler.handle_error(e, "simulation run")
        click.echo(render_error(e), err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
