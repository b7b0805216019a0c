#!/usr/bin/env python3
"""
Run Configuration Tests
Parsing and validation of flat `key = value` run files.
"""

import sys
import unittest
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from core.dispersion import BRANCHES
from core.errors import ParseError, ValidationError
from core.medium import CONSTANTS
from core.presets import hau2001
from core.run_config import DEFAULT_PACKET_MODES, DEFAULT_SWEEP_SAMPLES, parse_config

CONFIG_DIR = project_root / "config"

MINIMAL = """
command = dispersion
rho = 1.24e19
mu = 2.11e-29
omega_e = 3.1980e15
omega_q = 1.1131e10
Omega_c = 3.075e7
M = 3.8175e-26
Gamma0 = 6.15e7
"""


class TestParseConfig(unittest.TestCase):
    """Test configuration parsing"""

    def test_minimal_medium(self):
        config = parse_config(MINIMAL)
        self.assertEqual(config.command, "dispersion")
        self.assertAlmostEqual(config.medium.x, 2.0 / 3.0)
        self.assertEqual(config.branches, BRANCHES)
        self.assertEqual(config.sweep_samples, DEFAULT_SWEEP_SAMPLES)
        self.assertEqual(config.packet_modes, DEFAULT_PACKET_MODES)
        # control defaults to co-propagating at ω_e − ω_q
        self.assertAlmostEqual(config.medium.k_c, (3.1980e15 - 1.1131e10) / CONSTANTS.c, delta=1e-6)

    def test_comments_and_blank_lines(self):
        config = parse_config("# header\n\ncommand = fwm   # trailing\npreset = hau2001\n")
        self.assertEqual(config.command, "fwm")
        self.assertEqual(config.medium, hau2001())

    def test_local_field_out_of_range(self):
        with self.assertRaises(ValidationError) as ctx:
            parse_config(MINIMAL + "x = 1.5\n")
        self.assertIn("x", str(ctx.exception))

    def test_duplicate_key_names_both_lines(self):
        text = "command = dispersion\npreset = hau2001\n\nsamples = 10\nsamples = 20\n"
        with self.assertRaises(ParseError) as ctx:
            parse_config(text)
        self.assertEqual(ctx.exception.lines, (4, 5))
        self.assertIn("line 4, 5", str(ctx.exception))

    def test_unknown_key(self):
        with self.assertRaises(ParseError) as ctx:
            parse_config("command = dispersion\npreset = hau2001\ncolour = blue\n")
        self.assertEqual(ctx.exception.lines, (3,))
        self.assertIn("colour", str(ctx.exception))

    def test_missing_command(self):
        with self.assertRaises(ValidationError):
            parse_config("preset = hau2001\n")

    def test_unknown_command(self):
        with self.assertRaises(ValidationError):
            parse_config("command = plot\npreset = hau2001\n")

    def test_missing_medium_key_names_unit(self):
        text = MINIMAL.replace("Gamma0 = 6.15e7\n", "")
        with self.assertRaises(ValidationError) as ctx:
            parse_config(text)
        self.assertIn("Gamma0", str(ctx.exception))
        self.assertIn("1/s", str(ctx.exception))

    def test_non_numeric_value_names_unit(self):
        with self.assertRaises(ParseError) as ctx:
            parse_config(MINIMAL.replace("rho = 1.24e19", "rho = dense"))
        self.assertIn("m^-3", str(ctx.exception))

    def test_line_without_equals(self):
        with self.assertRaises(ParseError):
            parse_config("command dispersion\n")

    def test_preset_override(self):
        config = parse_config("command = dispersion\npreset = hau2001\nrho = 2.0e19\n")
        self.assertEqual(config.medium.rho, 2.0e19)
        self.assertEqual(config.medium.Omega_c, hau2001().Omega_c)

    def test_unknown_preset(self):
        with self.assertRaises(ValidationError):
            parse_config("command = dispersion\npreset = rubidium\n")

    def test_reversed_control_symbol(self):
        config = parse_config("command = fwm\npreset = hau2001\nnew_k_c = -k_c\n")
        self.assertEqual(config.switched_k_c, -config.medium.k_c)
        config = parse_config("command = fwm\npreset = hau2001\nnew_k_c = k_c\n")
        self.assertEqual(config.switched_k_c, config.medium.k_c)

    def test_k_range(self):
        config = parse_config("command = dispersion\npreset = hau2001\nk_range = 1.0e7, 1.1e7\n")
        self.assertEqual(config.k_range, (1.0e7, 1.1e7))
        with self.assertRaises(ValidationError):
            parse_config("command = dispersion\npreset = hau2001\nk_range = 1.1e7, 1.0e7\n")
        with self.assertRaises(ParseError):
            parse_config("command = dispersion\npreset = hau2001\nk_range = 1.0e7\n")

    def test_branches(self):
        config = parse_config("command = dispersion\npreset = hau2001\nbranches = 2\n")
        self.assertEqual(config.branches, (2,))
        with self.assertRaises(ValidationError):
            parse_config("command = dispersion\npreset = hau2001\nbranches = 2, 4\n")

    def test_schedule_defaults(self):
        config = parse_config("command = protocol\npreset = hau2001\nt1 = 1e-6\n")
        self.assertEqual(config.switch_on_time, 1e-6)
        self.assertEqual(config.final_time, 1e-6)
        self.assertEqual(config.switched_Omega_c, config.medium.Omega_c)

    def test_schedule_order(self):
        with self.assertRaises(ValidationError):
            parse_config("command = protocol\npreset = hau2001\nt1 = 2e-6\nt2 = 1e-6\n")
        with self.assertRaises(ValidationError):
            parse_config("command = protocol\npreset = hau2001\nt2 = 2e-6\nt_final = 1e-6\n")

    def test_shipped_configs_parse(self):
        for path in sorted(CONFIG_DIR.glob("*.conf")):
            with self.subTest(config=path.name):
                config = parse_config(path.read_text(encoding="utf-8"))
                self.assertIn(config.command, ("dispersion", "composition", "protocol", "fwm"))


if __name__ == '__main__':
    unittest.main()
