#!/usr/bin/env python3
"""
Polariton Composition Tests
Mode amplitudes, Bose normalization and radiative decay.
"""

import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from core.dispersion import BRANCHES, SLOW_BRANCH, BranchSolution, branch_point, resonant_wavevector
from core.errors import DomainError, ValidationError
from core.medium import CONSTANTS, Detunings
from core.polariton import (COMPOSITION_COLUMNS, band_edge_loss, composition, composition_sweep, decay_rate,
                            hopfield_u, normalization_residual, survival_fraction)
from core.presets import hau2001

PARAMS = hau2001()
OMEGA = PARAMS.Omega_c


def synthetic_solution(delta_omega: float, n: float = 1.0, v_g: float = 0.0) -> BranchSolution:
    return BranchSolution(m=SLOW_BRANCH, k=1.0e7, omega=3.0e15, delta_omega=delta_omega,
                          n=n, v_g=v_g, v_full=v_g, beta=0.0)


class TestHopfieldAmplitude:
    """Spin amplitude u"""

    def test_resonance_is_almost_pure_spin(self):
        sol = branch_point(PARAMS, 0.0)
        assert hopfield_u(PARAMS, sol) == pytest.approx(1.0, abs=1e-6)

    def test_equal_spin_and_excited_share(self):
        # n·v_g/c → 0 at Δω = Ω_c leaves u = 1/√2
        sol = synthetic_solution(OMEGA)
        assert hopfield_u(PARAMS, sol) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-15)

    def test_superluminal_solution_rejected(self):
        sol = synthetic_solution(0.0, n=1.0, v_g=2.0 * CONSTANTS.c)
        with pytest.raises(DomainError, match="exceeds 1"):
            hopfield_u(PARAMS, sol)

    def test_spin_dominates_near_resonance(self):
        for ratio in (-0.03, -0.01, 0.0, 0.01, 0.03):
            comp = composition(PARAMS, branch_point(PARAMS, ratio * OMEGA))
            assert 1.0 - comp.u ** 2 < 1e-3
            assert comp.radiative_fraction < 1e-6


class TestNormalization:
    """photon share + spin share + excited share = 1"""

    def test_sweep_closes_on_all_branches(self):
        k0 = resonant_wavevector(PARAMS)
        v0 = branch_point(PARAMS, 0.0).v_g
        sweep = composition_sweep(PARAMS, (k0 - 1.5 * OMEGA / v0, k0 + 1.5 * OMEGA / v0), 400)
        assert not sweep.failures
        assert len(sweep.rows) == 1200
        residual = COMPOSITION_COLUMNS.index("normalization_residual")
        for m in BRANCHES:
            rows = [row for row in sweep.rows if row[0] == m]
            assert len(rows) == 400
            assert max(abs(row[residual]) for row in rows) < 1e-10

    def test_corrupted_amplitude_detected(self):
        sol = branch_point(PARAMS, 0.05 * OMEGA)
        d = Detunings(delta_omega=sol.delta_omega, beta=sol.beta)
        comp = composition(PARAMS, sol)
        corrupt = replace(comp, u=2.0 * comp.u)
        ratio = sol.delta_omega / OMEGA
        expected = 3.0 * comp.u ** 2 * (1.0 + ratio * ratio)
        assert normalization_residual(corrupt, d) == pytest.approx(expected, rel=1e-9)

    def test_photon_coefficients(self):
        sol = branch_point(PARAMS, 0.1 * OMEGA)
        comp = composition(PARAMS, sol)
        scale = math.sqrt(sol.v_g / CONSTANTS.c)
        assert comp.photon_plus == pytest.approx(scale * (sol.n + 1.0) / 2.0, rel=1e-15)
        assert comp.photon_minus == pytest.approx(scale * (sol.n - 1.0) / 2.0, rel=1e-12)
        assert comp.excited == pytest.approx(comp.u * sol.delta_omega / OMEGA, rel=1e-15)


class TestDecay:
    """Γ = u²(Δω/Ω_c)²Γ₀"""

    def test_dark_at_resonance(self):
        assert composition(PARAMS, branch_point(PARAMS, 0.0)).gamma == 0.0

    def test_quadratic_in_detuning(self):
        small = composition(PARAMS, branch_point(PARAMS, 0.01 * OMEGA)).gamma
        large = composition(PARAMS, branch_point(PARAMS, 0.02 * OMEGA)).gamma
        assert large / small == pytest.approx(4.0, rel=1e-2)

    def test_even_in_detuning(self):
        above = composition(PARAMS, branch_point(PARAMS, 0.02 * OMEGA)).gamma
        below = composition(PARAMS, branch_point(PARAMS, -0.02 * OMEGA)).gamma
        assert above == pytest.approx(below, rel=1e-2)

    def test_rate_formula(self):
        sol = branch_point(PARAMS, 0.04 * OMEGA)
        comp = composition(PARAMS, sol)
        d = Detunings(delta_omega=sol.delta_omega, beta=sol.beta)
        assert decay_rate(PARAMS, comp, d) == pytest.approx(comp.u ** 2 * 0.04 ** 2 * PARAMS.Gamma0, rel=1e-9)

    def test_band_edge_loss_over_experiment(self):
        loss = band_edge_loss(PARAMS)
        assert 0.2 < loss < 0.3

    def test_survival_fraction(self):
        assert survival_fraction(0.0, 1.0) == 1.0
        assert survival_fraction(2.0, 0.5) == pytest.approx(math.exp(-1.0))
        with pytest.raises(ValidationError):
            survival_fraction(1.0, -1e-6)


class TestCompositionSweep:
    """Rows written by the composition command"""

    def setup_method(self):
        k0 = resonant_wavevector(PARAMS)
        v0 = branch_point(PARAMS, 0.0).v_g
        self.k_range = (k0 - 0.2 * OMEGA / v0, k0 + 0.2 * OMEGA / v0)

    def test_row_layout(self):
        sweep = composition_sweep(PARAMS, self.k_range, 4)
        assert len(sweep.rows) == 12
        assert all(len(row) == len(COMPOSITION_COLUMNS) for row in sweep.rows)
        assert [row[0] for row in sweep.rows] == [1] * 4 + [2] * 4 + [3] * 4
        # the order-of-magnitude flag is appended after the base columns
        assert COMPOSITION_COLUMNS[-1] == "gamma_order_of_magnitude"
        assert COMPOSITION_COLUMNS.index("normalization_residual") == len(COMPOSITION_COLUMNS) - 2

    def test_outer_branch_rates_flagged(self, caplog):
        with caplog.at_level(logging.WARNING):
            sweep = composition_sweep(PARAMS, self.k_range, 3)
        flag = COMPOSITION_COLUMNS.index("gamma_order_of_magnitude")
        assert {row[0] for row in sweep.rows if row[flag]} == {1, 3}
        assert "order-of-magnitude" in caplog.text
