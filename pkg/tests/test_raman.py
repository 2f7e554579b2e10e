import math

import numpy as np
import pytest

from qcpon import (NoiseBreakdown, RamanSpectrum, Scenario, backward_raman_power,
                   build_crosstalk_matrix, build_grid, channel_background,
                   forward_raman_power, load_spectrum, photons_per_gate)
from qcpon.assignment import conventional_assignment
from qcpon.errors import SpectrumError


def make_scenario(grid, spectrum, **kw):
    defaults = dict(users=1, setup="fiber", launch_power_dbm=-30.0, block_size=1e11)
    defaults.update(kw)
    return Scenario(grid=grid, spectrum=spectrum, **defaults)


class TestSpectrum:
    def test_parse_and_interpolate(self):
        sp = load_spectrum("# comment\n-10 2e-9\n0 0\n10 5e-9\n")
        assert sp.rho(5.0) == pytest.approx(2.5e-9)
        assert sp.rho(-5.0) == pytest.approx(1e-9)

    def test_out_of_range_is_zero(self):
        sp = load_spectrum("-10 2e-9\n0 0\n10 5e-9\n")
        assert sp.rho(50.0) == 0.0
        assert sp.rho(-50.0) == 0.0

    def test_monotonicity_violation(self):
        with pytest.raises(SpectrumError, match="increasing"):
            load_spectrum("0 1e-9\n-5 1e-9\n10 1e-9\n")

    def test_too_few_samples(self):
        with pytest.raises(SpectrumError, match="at least 2"):
            load_spectrum("0 1e-9\n")

    def test_negative_cross_section(self):
        with pytest.raises(SpectrumError, match="negative"):
            load_spectrum("0 1e-9\n5 -1e-9\n")

    def test_bad_columns(self):
        with pytest.raises(SpectrumError, match="2 columns"):
            load_spectrum("0 1e-9 7\n5 1e-9\n")


class TestCrosstalkMatrix:
    def test_constant_spectrum_two_channels(self):
        rho0 = 3e-9
        sp = RamanSpectrum(np.array([-100.0, 100.0]), np.array([rho0, rho0]))
        grid = build_grid(1530.0, 1530.8, 0.8)
        u = build_crosstalk_matrix(grid, sp).u
        lam1, lam2 = 1530.0, 1530.8
        assert u[0, 1] == pytest.approx(lam2 * rho0, rel=1e-12)
        assert u[1, 0] == pytest.approx(lam1 * rho0, rel=1e-12)
        assert math.isinf(u[0, 0]) and math.isinf(u[1, 1])

    def test_diagonal_infinite(self, shipped_spectrum, full_grid):
        u = build_crosstalk_matrix(full_grid, shipped_spectrum).u
        assert np.all(np.isinf(np.diag(u)))

    def test_stokes_anti_stokes_asymmetry(self):
        # stokes (positive shift) heavier than anti-stokes: noise classical->up
        sp = RamanSpectrum(np.array([-2.0, 0.0, 2.0]), np.array([2e-9, 0.0, 5e-9]))
        grid = build_grid(1530.0, 1531.6, 0.8)
        u = build_crosstalk_matrix(grid, sp).u
        lam = grid.wavelengths_nm
        # row 0 classical at 1530, column 2 quantum at 1531.6: shift +1.6 (stokes)
        rho_stokes = 5e-9 * 1.6 / 2.0  # linear interp between 0 and 5e-9 at 1.6
        rho_anti = 2e-9 * 1.6 / 2.0
        assert u[0, 2] == pytest.approx(lam[2] * rho_stokes, rel=1e-12)
        assert u[2, 0] == pytest.approx(lam[0] * rho_anti, rel=1e-12)
        assert u[0, 2] > u[2, 0]

    def test_transposed_swaps_orientation(self, shipped_spectrum, full_grid):
        m = build_crosstalk_matrix(full_grid, shipped_spectrum)
        mt = m.transposed()
        off = ~np.eye(full_grid.count, dtype=bool)
        assert np.array_equal(mt.u[off], m.u.T[off])


class TestPowerFormulas:
    def test_forward_zero_length(self):
        assert forward_raman_power(1e-3, 3e-9, 0.046, 0.0, 0.2) == 0.0

    def test_forward_reference_value(self):
        # I e^-(alpha L) rho L bw at the documented operating point
        got = forward_raman_power(1e-3, 3e-9, 0.046, 5.0, 0.2)
        assert got == pytest.approx(2.3836008075e-12, rel=1e-9)

    def test_forward_linear_in_power(self):
        one = forward_raman_power(1e-3, 3e-9, 0.046, 5.0, 0.2)
        two = forward_raman_power(2e-3, 3e-9, 0.046, 5.0, 0.2)
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_backward_zero_length(self):
        assert backward_raman_power(1e-3, 3e-9, 0.046, 0.0, 0.2) == 0.0

    def test_backward_lossless_limit_matches_forward(self):
        fwd = forward_raman_power(1e-3, 3e-9, 0.0, 5.0, 0.2)
        bwd = backward_raman_power(1e-3, 3e-9, 0.0, 5.0, 0.2)
        assert bwd == pytest.approx(fwd, rel=1e-12)
        near = backward_raman_power(1e-3, 3e-9, 1e-14, 5.0, 0.2)
        assert near == pytest.approx(fwd, rel=1e-9)

    def test_backward_saturates(self):
        alpha = 0.046
        sat = 1e-3 * 3e-9 * 0.2 / (2 * alpha)
        assert backward_raman_power(1e-3, 3e-9, alpha, 1e4, 0.2) == pytest.approx(sat, rel=1e-9)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            forward_raman_power(-1e-3, 3e-9, 0.046, 5.0, 0.2)
        with pytest.raises(ValueError):
            backward_raman_power(1e-3, -3e-9, 0.046, 5.0, 0.2)


class TestPhotonsPerGate:
    def test_zero_power(self):
        assert photons_per_gate(0.0, 1550.0, 1e-10, 1.0) == 0.0

    def test_reference_value(self):
        # ~1 photon: 1.28e-9 W for 100 ps at 1550 nm (photon energy 1.282e-19 J)
        got = photons_per_gate(1.28e-9, 1550.0, 1e-10, 1.0)
        assert got == pytest.approx(0.9987666440, rel=1e-9)

    def test_bilinear_in_power_and_gate(self):
        base = photons_per_gate(1e-9, 1550.0, 1e-10, 0.5)
        assert photons_per_gate(2e-9, 1550.0, 1e-10, 0.5) == pytest.approx(2 * base)
        assert photons_per_gate(1e-9, 1550.0, 5e-11, 0.5) == pytest.approx(base / 2)


class TestChannelBackground:
    def test_dark_counts_only(self, full_grid):
        # classical launch at -inf is not representable; use zero cross sections
        sp = RamanSpectrum(np.array([-100.0, 100.0]), np.array([0.0, 0.0]))
        scen = make_scenario(full_grid, sp, users=2)
        plan = conventional_assignment(full_grid, 2)
        noise = channel_background(plan, plan.q[0], scen)
        assert noise.p_raman_fwd == 0.0 and noise.p_raman_bwd == 0.0
        assert noise.p_ambient == 0.0
        # two-detector composition of the 1e-7-per-gate dark probability
        assert noise.y0 == pytest.approx(1.9999999e-7, rel=1e-6)

    def test_no_classical_channels(self, full_grid, shipped_spectrum):
        from qcpon import ChannelPlan

        scen = make_scenario(full_grid, shipped_spectrum)
        plan = conventional_assignment(full_grid, 1)
        bare = ChannelPlan(full_grid, plan.q, ())
        noise = channel_background(bare, plan.q[0], scen)
        assert noise.p_raman_fwd == 0.0 and noise.p_raman_bwd == 0.0

    def test_linear_in_launch_power(self, full_grid, shipped_spectrum):
        plan = conventional_assignment(full_grid, 3)
        lo = make_scenario(full_grid, shipped_spectrum, users=3, launch_power_dbm=-30.0)
        hi = make_scenario(full_grid, shipped_spectrum, users=3,
                           launch_power_dbm=-30.0 + 10 * math.log10(2))
        n_lo = channel_background(plan, plan.q[0], lo)
        n_hi = channel_background(plan, plan.q[0], hi)
        assert n_hi.p_raman_fwd == pytest.approx(2 * n_lo.p_raman_fwd, rel=1e-9)
        assert n_hi.p_raman_bwd == pytest.approx(2 * n_lo.p_raman_bwd, rel=1e-9)
        assert n_hi.p_dark == n_lo.p_dark

    def test_monotone_in_feeder_gate_bandwidth(self, full_grid, shipped_spectrum):
        plan = conventional_assignment(full_grid, 3)
        base = make_scenario(full_grid, shipped_spectrum, users=3)
        n0 = channel_background(plan, plan.q[0], base)

        longer = base.with_(feeder_km=10.0)
        n1 = channel_background(plan, plan.q[0], longer)
        assert n1.p_raman_fwd + n1.p_raman_bwd > n0.p_raman_fwd + n0.p_raman_bwd

        import dataclasses
        wider = base.with_(devices=dataclasses.replace(base.devices, nbf_bandwidth_ghz=50.0))
        n2 = channel_background(plan, plan.q[0], wider)
        assert n2.p_raman_fwd > n0.p_raman_fwd and n2.p_raman_bwd > n0.p_raman_bwd

        slower = base.with_(devices=dataclasses.replace(base.devices, gate_ns=0.2))
        n3 = channel_background(plan, plan.q[0], slower)
        assert n3.p_raman_fwd > n0.p_raman_fwd and n3.p_dark > n0.p_dark

    def test_ambient_only_in_wireless(self, full_grid, shipped_spectrum):
        plan = conventional_assignment(full_grid, 1)
        fiber = make_scenario(full_grid, shipped_spectrum, ambient_photons_per_gate=1e-4)
        wifi = make_scenario(full_grid, shipped_spectrum, setup="wireless",
                             ambient_photons_per_gate=1e-4)
        assert channel_background(plan, plan.q[0], fiber).p_ambient == 0.0
        assert channel_background(plan, plan.q[0], wifi).p_ambient == pytest.approx(5e-5)

    def test_not_a_quantum_channel(self, full_grid, shipped_spectrum):
        scen = make_scenario(full_grid, shipped_spectrum)
        plan = conventional_assignment(full_grid, 1)
        with pytest.raises(ValueError, match="not a quantum channel"):
            channel_background(plan, plan.c[0], scen)


def test_noise_breakdown_composition():
    nb = NoiseBreakdown.from_components(1e-7, 2e-6, 3e-6, 1e-5)
    p = 1e-7 + 2e-6 + 3e-6 + 1e-5
    assert nb.y0 == pytest.approx(1 - (1 - p) ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        NoiseBreakdown(-0.1, 0, 0, 0, 0)


def test_asymmetry_survives_matrix_construction(full_grid, shipped_spectrum):
    u = build_crosstalk_matrix(full_grid, shipped_spectrum).u
    i, j = 0, 30  # 24 nm apart: stokes side much heavier in the shipped table
    assert u[i, j] != u[j, i]
    assert u[i, j] > u[j, i]
