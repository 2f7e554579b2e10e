import math

import numpy as np
import pytest

from qcpon import (ChannelBudget, DeviceParams, NoiseBreakdown, ProtocolParams,
                   RamanSpectrum, Scenario, channel_budget)
from qcpon.assignment import conventional_assignment
from qcpon.link import (ObservableSet, asymptotic_key_rate, asymptotic_observables,
                        sample_observables)
from qcpon._kernels import gain


def flat_budget(eta, y0, ed=0.033):
    return ChannelBudget(eta, NoiseBreakdown(0.0, 0.0, 0.0, 0.0, y0), ed, 1.22)


class TestChannelBudget:
    def test_fiber_reference_value(self, full_grid, shipped_spectrum):
        # 0.2 dB/km * 5.5 km + 2 dB AWG = 3.1 dB below the 0.3 detector
        scen = Scenario(grid=full_grid, spectrum=shipped_spectrum, users=1)
        plan = conventional_assignment(full_grid, 1)
        b = channel_budget(scen, plan, 0)
        assert b.eta == pytest.approx(0.14693364581053386, rel=1e-12)
        assert b.misalignment == 0.033
        assert b.error_correction_inefficiency == 1.22

    def test_wireless_adds_coupling(self, full_grid, shipped_spectrum):
        scen = Scenario(grid=full_grid, spectrum=shipped_spectrum, users=1,
                        setup="wireless", coupling_loss_db=16.0)
        plan = conventional_assignment(full_grid, 1)
        b = channel_budget(scen, plan, 0)
        assert b.eta == pytest.approx(0.003690806312437144, rel=1e-12)

    def test_lossless_path_is_detector_efficiency(self, full_grid):
        sp = RamanSpectrum(np.array([-100.0, 100.0]), np.array([0.0, 0.0]))
        dev = DeviceParams(fiber_attenuation_db_per_km=0.0, awg_passes=0)
        scen = Scenario(grid=full_grid, spectrum=sp, users=1, devices=dev)
        plan = conventional_assignment(full_grid, 1)
        assert channel_budget(scen, plan, 0).eta == pytest.approx(0.3, rel=1e-12)

    def test_awg_pass_count_configurable(self, full_grid, shipped_spectrum):
        plan = conventional_assignment(full_grid, 1)
        etas = []
        for passes in (0, 1, 2):
            dev = DeviceParams(awg_passes=passes)
            scen = Scenario(grid=full_grid, spectrum=shipped_spectrum, users=1,
                            devices=dev)
            etas.append(channel_budget(scen, plan, 0).eta)
        assert etas[1] == pytest.approx(etas[0] * 10 ** -0.2, rel=1e-12)
        assert etas[2] == pytest.approx(etas[0] * 10 ** -0.4, rel=1e-12)

    def test_bad_user(self, full_grid, shipped_spectrum):
        scen = Scenario(grid=full_grid, spectrum=shipped_spectrum, users=1)
        plan = conventional_assignment(full_grid, 1)
        with pytest.raises(IndexError):
            channel_budget(scen, plan, 1)


class TestScenarioValidation:
    def test_setup_kind(self, full_grid, shipped_spectrum):
        with pytest.raises(ValueError, match="setup"):
            Scenario(grid=full_grid, spectrum=shipped_spectrum, users=1, setup="radio")

    def test_users_positive(self, full_grid, shipped_spectrum):
        with pytest.raises(ValueError, match="users"):
            Scenario(grid=full_grid, spectrum=shipped_spectrum, users=0)

    def test_device_ranges(self):
        with pytest.raises(ValueError):
            DeviceParams(detector_efficiency=0.0)
        with pytest.raises(ValueError):
            DeviceParams(misalignment_probability=0.6)
        with pytest.raises(ValueError):
            DeviceParams(error_correction_inefficiency=0.9)


class TestObservables:
    def params(self):
        return ProtocolParams.make(0.4, 0.1, 0.7, 0.2, 0.6)

    def test_reference_gain(self):
        # Q_mu at eta mu = 0.04 over a 2e-7 background
        assert gain(2e-7, 0.1, 0.4) == pytest.approx(0.03921075300556465, rel=1e-12)

    def test_vacuum_errors_are_random(self):
        obs = asymptotic_observables(flat_budget(0.1, 1e-5), self.params(), 1e9)
        vac = 2
        np.testing.assert_allclose(obs.error_detections[vac], obs.detections[vac] / 2,
                                   rtol=1e-12)

    def test_noiseless_channel_has_no_errors(self):
        obs = asymptotic_observables(flat_budget(0.1, 0.0, ed=0.0), self.params(), 1e9)
        assert np.all(obs.error_detections == 0.0)

    def test_chain_invariant(self):
        obs = asymptotic_observables(flat_budget(0.02, 1e-5), self.params(), 1e10)
        assert np.all(obs.error_detections <= obs.detections)
        assert np.all(obs.detections <= obs.pulses)

    def test_pulse_totals(self):
        params = self.params()
        obs = asymptotic_observables(flat_budget(0.02, 1e-5), params, 1e10)
        assert obs.n_basis(0) == pytest.approx(params.pz ** 2 * 1e10, rel=1e-12)
        assert obs.n_basis(1) == pytest.approx(params.px ** 2 * 1e10, rel=1e-12)

    def test_gain_monotonicity(self):
        qs = [gain(1e-6, 0.1, a) for a in (0.0, 0.1, 0.3, 0.6, 1.0)]
        assert qs == sorted(qs)
        by_eta = [gain(1e-6, eta, 0.4) for eta in (0.001, 0.01, 0.1, 0.5)]
        assert by_eta == sorted(by_eta)

    def test_error_fraction_decreasing_in_eta(self):
        def err_frac(eta):
            q = gain(1e-5, eta, 0.4)
            return (0.5e-5 + 0.033 * (1 - math.exp(-eta * 0.4))) / q

        fracs = [err_frac(eta) for eta in (1e-3, 1e-2, 1e-1, 0.5)]
        assert fracs == sorted(fracs, reverse=True)

    def test_invariant_violation_rejected(self):
        bad = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(ValueError, match="chain"):
            ObservableSet(bad, bad * 2, bad, (0.4, 0.1, 0.0), (0.5, 0.5))


class TestSampledObservables:
    def test_reproducible_and_valid(self):
        params = ProtocolParams.make(0.4, 0.1, 0.7, 0.2, 0.6)
        b = flat_budget(0.02, 1e-5)
        a1 = sample_observables(b, params, 1e8, np.random.default_rng(9))
        a2 = sample_observables(b, params, 1e8, np.random.default_rng(9))
        np.testing.assert_array_equal(a1.detections, a2.detections)
        assert np.all(a1.error_detections <= a1.detections)
        assert np.all(a1.detections <= a1.pulses)

    def test_means_match_asymptotic(self):
        params = ProtocolParams.make(0.4, 0.1, 0.7, 0.2, 0.6)
        b = flat_budget(0.02, 1e-5)
        mean = asymptotic_observables(b, params, 1e10)
        sampled = sample_observables(b, params, 1e10, np.random.default_rng(1))
        np.testing.assert_allclose(sampled.detections, mean.detections, rtol=5e-2)


class TestAsymptoticRate:
    def test_dead_channel(self):
        params = ProtocolParams.make(0.4, 0.1, 0.7, 0.2, 0.6)
        assert asymptotic_key_rate(flat_budget(0.0, 0.0), params) == 0.0

    def test_noisy_channel_clamped(self):
        # e1 pinned at 1/2 by pure background: no key
        params = ProtocolParams.make(0.4, 0.1, 0.7, 0.2, 0.6)
        assert asymptotic_key_rate(flat_budget(1e-9, 0.3), params) == 0.0

    def test_fiber_point_positive(self):
        params = ProtocolParams.make(0.45, 0.1, 0.9, 0.05, 0.7)
        r = asymptotic_key_rate(flat_budget(0.1469, 2e-7), params)
        assert r > 0.005
