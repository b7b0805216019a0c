#!/usr/bin/env python3
"""
Dispersion Solver Tests
Branch windows, eigenfrequencies, group velocities and slow-light anchors.
"""

import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from core.dispersion import (BRANCHES, DISPERSION_COLUMNS, SLOW_BRANCH, atomic_drift_velocity, branch_point,
                             branch_windows, closed_form_group_velocity, density_for_group_velocity,
                             dispersion_mismatch, dispersion_sweep, frequency_of_wavevector,
                             full_group_velocity, local_field_sensitivity, radiative_group_velocity,
                             resonant_wavevector, uncoupled_modes, wavevector_of_frequency)
from core.errors import DomainError, ValidationError
from core.medium import CONSTANTS, control_mismatch, coupling_strength, recoil_difference, reference_frequency
from core.presets import hau2001

PARAMS = hau2001()
OMEGA = PARAMS.Omega_c


def stable_roots(b: float, c: float):
    """Roots of Δ² + bΔ + c with c < 0, smaller first"""
    disc = math.sqrt(b * b - 4.0 * c)
    big = (-b - disc) / 2.0 if b >= 0 else (-b + disc) / 2.0
    small = c / big
    return tuple(sorted((big, small)))


def dense_scan_root(k: float, lower: float, upper: float, points: int = 10_001) -> float:
    """Minimizer of |mismatch| by repeated uniform scans, refined below 10⁻⁹·Ω_c spacing"""
    while True:
        spacing = (upper - lower) / (points - 1)
        grid = np.linspace(lower, upper, points)
        values = dispersion_mismatch(PARAMS, k, grid)
        finite = np.isfinite(values)
        grid, values = grid[finite], values[finite]
        if spacing < 1e-9 * OMEGA:
            return float(grid[np.argmin(np.abs(values))])
        i = np.flatnonzero(np.diff(np.signbit(values)))[0]
        lower, upper = grid[i], grid[i + 1]


def slope_by_difference(k: float, h: float) -> float:
    """Central difference dω/dk on the slow branch, recoil part of ω_ref differenced exactly"""
    up = frequency_of_wavevector(PARAMS, k + h, SLOW_BRANCH)
    down = frequency_of_wavevector(PARAMS, k - h, SLOW_BRANCH)
    recoil = recoil_difference(PARAMS, k + h - PARAMS.k_c, k - h - PARAMS.k_c)
    return ((up.delta_omega - down.delta_omega) + recoil) / (2.0 * h)


class TestBranchWindows:
    """Propagation windows against the closed-form edge polynomials"""

    def setup_method(self):
        self.k0 = resonant_wavevector(PARAMS)

    def test_three_windows_in_order(self):
        windows = branch_windows(PARAMS, self.k0)
        assert [w.m for w in windows.windows] == list(BRANCHES)
        assert windows.windows[0].lower == -math.inf
        assert windows.windows[2].upper == math.inf

    def test_edges_match_closed_form(self):
        windows = branch_windows(PARAMS, self.k0)
        beta = control_mismatch(PARAMS, self.k0)
        coupling = coupling_strength(PARAMS)
        x = PARAMS.x
        n_lower, n_upper = stable_roots(beta - x * coupling, -OMEGA ** 2)
        q_lower, q_upper = stable_roots(beta + (1.0 - x) * coupling, -OMEGA ** 2)

        assert windows.window_for(1).upper == pytest.approx(q_lower, abs=1e-9 * OMEGA)
        assert windows.window_for(2).lower == pytest.approx(n_lower, abs=1e-9 * OMEGA)
        assert windows.window_for(2).upper == pytest.approx(q_upper, abs=1e-9 * OMEGA)
        assert windows.window_for(3).lower == pytest.approx(n_upper, abs=1e-9 * OMEGA)

    def test_poles_lie_in_stop_bands(self):
        windows = branch_windows(PARAMS, self.k0)
        for pole in windows.poles:
            assert windows.branch_of(pole) is None

    def test_scan_resolution_floor(self):
        with pytest.raises(ValidationError):
            branch_windows(PARAMS, self.k0, scan_resolution=100)


class TestEigenfrequencies:
    """ω_k^(m) by bracketed bisection"""

    def setup_method(self):
        self.k0 = resonant_wavevector(PARAMS)
        self.v0 = branch_point(PARAMS, 0.0).v_g

    def test_resonant_point_is_dark(self):
        sol = frequency_of_wavevector(PARAMS, self.k0, SLOW_BRANCH)
        assert abs(sol.delta_omega) < 1e-6 * OMEGA
        assert sol.n == pytest.approx(1.0, abs=1e-9)

    def test_branch_ordering(self):
        windows = branch_windows(PARAMS, self.k0)
        omegas = [frequency_of_wavevector(PARAMS, self.k0, m, windows).delta_omega for m in BRANCHES]
        assert omegas[0] < omegas[1] < omegas[2]

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            frequency_of_wavevector(PARAMS, self.k0, 4)
        with pytest.raises(DomainError):
            frequency_of_wavevector(PARAMS, 0.0, SLOW_BRANCH)

    def test_matches_dense_scan(self):
        rng = np.random.default_rng(11)
        for k in self.k0 + rng.uniform(-0.5, 0.5, 1000) * OMEGA / self.v0:
            k = float(k)
            window = branch_windows(PARAMS, k).window_for(SLOW_BRANCH)
            sol = frequency_of_wavevector(PARAMS, k, SLOW_BRANCH)
            best = dense_scan_root(k, window.lower, window.upper)
            assert sol.delta_omega == pytest.approx(best, abs=1e-8 * OMEGA)

    def test_outer_branches_match_dense_scan(self):
        rng = np.random.default_rng(13)
        coupling = coupling_strength(PARAMS)
        # photon-scale offsets keep the outer roots inside the near-resonance regime
        for k in self.k0 + rng.uniform(-10.0, 10.0, 1000) * OMEGA / CONSTANTS.c:
            k = float(k)
            windows = branch_windows(PARAMS, k)
            # outer roots lie within |photon line| + √(ω·A) of the inner window edge
            span = abs(uncoupled_modes(PARAMS, k).photon) + 2.0 * math.sqrt(
                reference_frequency(PARAMS, k) * coupling) + 10.0 * OMEGA
            lower_window, upper_window = windows.window_for(1), windows.window_for(3)
            cases = ((1, lower_window.upper - span, lower_window.upper),
                     (3, upper_window.lower, upper_window.lower + span))
            for m, lower, upper in cases:
                sol = frequency_of_wavevector(PARAMS, k, m, windows)
                assert sol.delta_omega == pytest.approx(dense_scan_root(k, lower, upper), abs=1e-8 * OMEGA)

    def test_slow_branch_monotone(self):
        sweep = dispersion_sweep(PARAMS, (self.k0 - 1.5 * OMEGA / self.v0, self.k0 + 1.5 * OMEGA / self.v0),
                                 41, branches=(SLOW_BRANCH,))
        assert not sweep.failures
        detunings = np.array([s.delta_omega for s in sweep.branches[SLOW_BRANCH]])
        assert np.all(np.diff(detunings) > 0)

    def test_backward_propagation_symmetric(self):
        sol = frequency_of_wavevector(PARAMS, -self.k0, SLOW_BRANCH)
        assert sol.k < 0
        assert sol.v_full < 0

    def test_wavevector_inverse(self):
        for offset in (-0.3, 0.0, 0.4):
            k = self.k0 + offset * OMEGA / self.v0
            sol = frequency_of_wavevector(PARAMS, k, SLOW_BRANCH)
            assert wavevector_of_frequency(PARAMS, sol.omega, k) == pytest.approx(k, rel=1e-8)

    def test_vanishing_coupling_limit(self):
        dilute = replace(PARAMS, rho=PARAMS.rho * 1e-6)
        for shift in np.linspace(-2.0, 2.0, 5) * OMEGA:
            k = (reference_frequency(dilute, self.k0) + shift) / CONSTANTS.c
            windows = branch_windows(dilute, k)
            light = CONSTANTS.c * abs(k)
            for m in BRANCHES:
                sol = frequency_of_wavevector(dilute, k, m, windows)
                assert abs(sol.omega - light) / light < 1e-6


class TestSweep:
    """Uniform k sweeps and failure collection"""

    def test_rows_and_columns(self):
        k0 = resonant_wavevector(PARAMS)
        v0 = branch_point(PARAMS, 0.0).v_g
        sweep = dispersion_sweep(PARAMS, (k0 - 0.1 * OMEGA / v0, k0 + 0.1 * OMEGA / v0), 5)
        rows = sweep.rows()
        assert len(rows) == 15
        assert len(rows[0]) == len(DISPERSION_COLUMNS)
        assert [r[0] for r in rows] == [1] * 5 + [2] * 5 + [3] * 5

    def test_failed_points_are_collected(self):
        sweep = dispersion_sweep(PARAMS, (-1.0, 1.0), 3)
        at_zero = [f for f in sweep.failures if f.k == 0.0]
        assert len(at_zero) == 3
        assert {f.code for f in at_zero} == {"domain_error"}

    def test_threaded_sweep_matches_serial(self):
        k0 = resonant_wavevector(PARAMS)
        v0 = branch_point(PARAMS, 0.0).v_g
        k_range = (k0 - 0.2 * OMEGA / v0, k0 + 0.2 * OMEGA / v0)
        serial = dispersion_sweep(PARAMS, k_range, 7, branches=(SLOW_BRANCH,))
        threaded = dispersion_sweep(PARAMS, k_range, 7, branches=(SLOW_BRANCH,), workers=3)
        assert serial.rows() == threaded.rows()

    def test_samples_floor(self):
        with pytest.raises(ValidationError):
            dispersion_sweep(PARAMS, (1.0, 2.0), 1)


class TestGroupVelocity:
    """Analytic group velocities and the slow-light anchors"""

    def setup_method(self):
        self.resonant = branch_point(PARAMS, 0.0)

    def test_slow_light_magnitude(self):
        ratio = self.resonant.v_g / CONSTANTS.c
        assert 0.5e-7 < ratio < 2e-7
        assert self.resonant.v_g == pytest.approx(closed_form_group_velocity(PARAMS), rel=0.02)

    def test_radiative_velocity_recomputed(self):
        assert radiative_group_velocity(PARAMS, self.resonant) == pytest.approx(self.resonant.v_g, rel=1e-12)

    def test_full_velocity_at_dark_point_is_recoil_drift(self):
        # ∂α/∂β vanishes at Δω = 0, leaving only the spin-wave drift
        drift = CONSTANTS.hbar * (self.resonant.k - PARAMS.k_c) / PARAMS.M
        assert atomic_drift_velocity(PARAMS, self.resonant) == pytest.approx(drift, rel=1e-6)
        assert full_group_velocity(PARAMS, self.resonant) == pytest.approx(self.resonant.v_g + drift, rel=1e-12)
        assert full_group_velocity(PARAMS, self.resonant) == self.resonant.v_full

    def test_control_mismatch_term_grows_toward_edges(self):
        near = atomic_drift_velocity(PARAMS, branch_point(PARAMS, 0.1 * OMEGA))
        far = atomic_drift_velocity(PARAMS, branch_point(PARAMS, 0.9 * OMEGA))
        assert 0 < near < far

    def test_matches_finite_difference_across_slow_window(self):
        rng = np.random.default_rng(3)
        window = branch_windows(PARAMS, self.resonant.k).window_for(SLOW_BRANCH)
        h = 1e-4 * OMEGA / self.resonant.v_g
        for fraction in rng.uniform(0.01, 0.99, 100):
            k = branch_point(PARAMS, window.lower + fraction * window.width).k
            sol = frequency_of_wavevector(PARAMS, k, SLOW_BRANCH)
            numeric = slope_by_difference(k, h)
            assert sol.v_full == pytest.approx(numeric, rel=1e-4)
            assert sol.v_g == pytest.approx(numeric - atomic_drift_velocity(PARAMS, sol), rel=1e-4)

    def test_reduced_density_anchor(self):
        rho = density_for_group_velocity(PARAMS, 0.1)
        sol = branch_point(replace(PARAMS, rho=rho), 0.0)
        assert sol.v_g / CONSTANTS.c == pytest.approx(0.1, rel=0.1)

    def test_contact_interaction_sensitivity(self):
        assert local_field_sensitivity(PARAMS) < 0.01
        assert local_field_sensitivity(replace(PARAMS, rho=10.0 * PARAMS.rho)) > 0.01

    def test_dark_point_independent_of_local_field(self):
        contact = branch_point(replace(PARAMS, x=1.0), 0.0)
        assert contact.v_g == pytest.approx(self.resonant.v_g, rel=1e-9)

    def test_uncoupled_modes(self):
        modes = uncoupled_modes(PARAMS, self.resonant.k)
        assert modes.lower == pytest.approx(-OMEGA, rel=1e-6)
        assert modes.upper == pytest.approx(OMEGA, rel=1e-6)
        # the photon line crosses the dark point at resonance
        assert abs(modes.photon) < 1e-6 * OMEGA
