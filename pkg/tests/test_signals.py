"""Signal synthesis, CAF, and orbit-parameterized matched filters."""
import math

import numpy as np
import pytest

from odbd import (ArrayGeometry, DelaySupportError, PathTrack, RadarConfig,
                  ReferenceInterpolator, SignalBuffer, SignalError,
                  StateDerivatives, beamform, caf, elements_to_state,
                  gravity_accel, gravity_jerk, matched_filter_orbit,
                  matched_filter_orbit_array, site_to_sensor_state,
                  slant_series, synthesize_echo, synthesize_reference,
                  topocentric_direction, wavevector)
from odbd.search import hypothesis_track
from odbd.scenario import oracle_path
from conftest import overhead_pass

CFG = RadarConfig(carrier_freq=100e6, sample_rate=20e3, bandwidth=10e3, cpi=0.5)


class TestReference:
    def test_unit_power_and_deterministic(self):
        a = synthesize_reference(CFG, seed=5)
        b = synthesize_reference(CFG, seed=5)
        assert np.mean(np.abs(a.samples) ** 2) == pytest.approx(1.0, rel=1e-12)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert len(a) == CFG.n_cpi_samples
        assert a.epoch == -CFG.cpi / 2.0

    def test_different_seeds_differ(self):
        a = synthesize_reference(CFG, seed=5)
        b = synthesize_reference(CFG, seed=6)
        assert np.max(np.abs(a.samples - b.samples)) > 0.1

    def test_band_limited(self):
        ref = synthesize_reference(CFG, seed=1)
        spec = np.fft.fft(ref.samples)
        freqs = np.fft.fftfreq(len(ref), 1.0 / CFG.sample_rate)
        out_of_band = np.abs(spec[np.abs(freqs) > CFG.bandwidth / 2.0])
        assert np.max(out_of_band) < 1e-9 * np.max(np.abs(spec))

    def test_config_validation(self):
        with pytest.raises(SignalError):
            RadarConfig(carrier_freq=0.0, sample_rate=1e4, bandwidth=5e3, cpi=1.0)
        with pytest.raises(SignalError):
            RadarConfig(carrier_freq=1e8, sample_rate=1e4, bandwidth=2e4, cpi=1.0)


class TestInterpolator:
    def test_exact_at_sample_times(self):
        ref = synthesize_reference(CFG, seed=2)
        interp = ReferenceInterpolator(ref)
        np.testing.assert_allclose(interp(ref.times), ref.samples, atol=1e-12)

    def test_fractional_delay_accuracy(self):
        ref = synthesize_reference(CFG, seed=3)
        interp = ReferenceInterpolator(ref)
        # Compare against an exact spectral fractional shift.
        frac = 0.37 / CFG.sample_rate
        n = len(ref)
        freqs = np.fft.fftfreq(n, 1.0 / CFG.sample_rate)
        shifted = np.fft.ifft(np.fft.fft(ref.samples)
                              * np.exp(2j * np.pi * freqs * frac))
        inner = slice(4, n - 4)
        err = np.abs(interp(ref.times + frac)[inner] - shifted[inner])
        assert np.max(err) < 1e-3

    def test_outside_support_raises(self):
        ref = synthesize_reference(CFG, seed=2)
        interp = ReferenceInterpolator(ref)
        with pytest.raises(DelaySupportError):
            interp(np.array([ref.epoch - 1.0]))


class TestPathTrack:
    def test_epoch_shifts_evaluation(self):
        track = PathTrack(delay_coeffs=[10.0, 2.0], phase_coeffs=[10.0, 2.0],
                          epoch=5.0)
        assert track.delay_path(5.0) == 10.0
        assert track.delay_path(6.0) == 12.0

    def test_truncated_keeps_low_orders(self):
        track = PathTrack(delay_coeffs=[1.0, 2.0, 3.0, 4.0],
                          phase_coeffs=[1.0, 2.0, 3.0, 4.0], epoch=1.0)
        cut = track.truncated(1)
        np.testing.assert_array_equal(cut.delay_coeffs, [1.0, 2.0])
        assert cut.epoch == 1.0

    def test_from_slant_factors(self, site):
        el, r, sensor = overhead_pass(site, 700e3)
        ss = slant_series(elements_to_state(el), sensor, CFG.cpi)
        mono = PathTrack.from_slant(ss)
        one_way = PathTrack.from_slant(ss, factor=1.0)
        assert mono.delay_path(0.0) == pytest.approx(2.0 * ss.rho)
        assert one_way.delay_path(0.0) == pytest.approx(ss.rho)

    def test_from_bistatic_sums_legs(self, site):
        el, r, sensor = overhead_pass(site, 700e3)
        target = elements_to_state(el)
        ss = slant_series(target, sensor, CFG.cpi)
        bi = PathTrack.from_bistatic(ss, ss)
        np.testing.assert_allclose(bi.delay_coeffs,
                                   PathTrack.from_slant(ss).delay_coeffs)

    def test_from_delay_doppler_phase_ramp(self):
        lam = 3.0
        track = PathTrack.from_delay_doppler(tau=1e-3, f_D=40.0, lam=lam)
        c = 299792458.0
        assert track.delay_path(0.7) == pytest.approx(c * 1e-3)
        # Phase path slope -f_D*lam makes exp(-j2pi fc path/c) a +f_D ramp.
        slope = track.phase_path(1.0) - track.phase_path(0.0)
        assert slope == pytest.approx(-40.0 * lam)


class TestEchoAndMatchedFilter:
    def test_matched_filter_recovers_amplitude(self, site):
        el, r, sensor = overhead_pass(site, 700e3)
        cfg = RadarConfig(carrier_freq=100e6, sample_rate=20e3, bandwidth=10e3,
                          cpi=0.5)
        ref = synthesize_reference(cfg, seed=4, duration=cfg.cpi + 0.02,
                                   epoch=-cfg.cpi / 2 - 0.02)
        interp = ReferenceInterpolator(ref)
        st = elements_to_state(el)
        track = hypothesis_track(st.r, st.v, sensor, cfg)
        surv = synthesize_echo(interp, track, cfg, amplitude=0.7)
        chi = matched_filter_orbit(surv, interp, track, cfg)
        ideal = 0.7 * np.sum(np.abs(interp(surv.times
                                           - track.delay_path(surv.times)
                                           / cfg.c)) ** 2)
        assert abs(chi) == pytest.approx(ideal, rel=1e-12)

    def test_oracle_path_echo_coherent(self, site):
        el, r, sensor = overhead_pass(site, 700e3)
        cfg = RadarConfig(carrier_freq=100e6, sample_rate=20e3, bandwidth=10e3,
                          cpi=1.0)
        ref = synthesize_reference(cfg, seed=8, duration=cfg.cpi + 0.02,
                                   epoch=-cfg.cpi / 2 - 0.02)
        interp = ReferenceInterpolator(ref)
        path = oracle_path(el, site, cfg)
        surv = synthesize_echo(interp, path, cfg, amplitude=1.0)
        st = elements_to_state(el)
        track = hypothesis_track(st.r, st.v, sensor, cfg)
        chi = matched_filter_orbit(surv, interp, track, cfg)
        assert abs(chi) / cfg.n_cpi_samples > 0.99

    def test_noise_power_calibrated(self):
        cfg = CFG
        flat = PathTrack(delay_coeffs=[0.0], phase_coeffs=[0.0])
        ref = synthesize_reference(cfg, seed=4)
        surv = synthesize_echo(ref, flat, cfg, amplitude=0.0, noise_power=2.0,
                               seed=11)
        assert np.mean(np.abs(surv.samples) ** 2) == pytest.approx(2.0, rel=0.05)

    def test_delay_outside_reference_raises(self):
        cfg = CFG
        ref = synthesize_reference(cfg, seed=4)
        far = PathTrack(delay_coeffs=[299792458.0], phase_coeffs=[299792458.0])
        with pytest.raises(DelaySupportError):
            synthesize_echo(ref, far, cfg)


class TestCaf:
    def _cfg(self):
        return RadarConfig(carrier_freq=100e6, sample_rate=10e3, bandwidth=5e3,
                           cpi=0.2)

    def test_peak_at_injected_bin(self):
        cfg = self._cfg()
        ref = synthesize_reference(cfg, seed=9, duration=0.3, epoch=-0.15)
        n = cfg.n_cpi_samples
        fs = cfg.sample_rate
        tau0 = 17 / fs
        f0 = 50.0   # on the k/T grid for T=0.2
        track = PathTrack.from_delay_doppler(tau0, f0, cfg.lam)
        surv = synthesize_echo(ref, track, cfg, amplitude=1.0)
        delays = np.arange(30) / fs
        dopplers = np.arange(-100.0, 105.0, 5.0)
        m = caf(surv, ref, delays, dopplers)
        tau_pk, f_pk, _ = m.peak()
        assert tau_pk == pytest.approx(tau0)
        assert f_pk == pytest.approx(f0)

    def test_fft_matches_direct(self):
        cfg = self._cfg()
        ref = synthesize_reference(cfg, seed=9, duration=0.3, epoch=-0.15)
        track = PathTrack.from_delay_doppler(8 / cfg.sample_rate, -25.0, cfg.lam)
        surv = synthesize_echo(ref, track, cfg, amplitude=1.0, noise_power=0.5,
                               seed=3)
        fs = cfg.sample_rate
        T = cfg.n_cpi_samples / fs
        delays = (surv.epoch - ref.epoch) + np.arange(20) / fs
        dopplers = np.arange(-10, 11) / T
        direct = caf(surv, ref, delays, dopplers, method="direct")
        fft = caf(surv, ref, delays, dopplers, method="fft")
        np.testing.assert_allclose(fft.power, direct.power, rtol=1e-9,
                                   atol=1e-9 * np.max(direct.power))

    def test_off_grid_delay_rejected(self):
        cfg = self._cfg()
        ref = synthesize_reference(cfg, seed=9)
        surv = synthesize_reference(cfg, seed=10)
        with pytest.raises(SignalError):
            caf(surv, ref, [0.3 / cfg.sample_rate], [0.0])

    def test_rate_mismatch_rejected(self):
        cfg = self._cfg()
        ref = synthesize_reference(cfg, seed=9)
        other = SignalBuffer(samples=ref.samples, sample_rate=2 * cfg.sample_rate,
                             epoch=ref.epoch)
        with pytest.raises(SignalError):
            caf(other, ref, [0.0], [0.0])

    def test_matched_filter_reduces_to_caf_bin(self):
        cfg = self._cfg()
        ref = synthesize_reference(cfg, seed=12, duration=0.3, epoch=-0.15)
        fs = cfg.sample_rate
        tau0 = 0.05 - 13 / fs   # on the sample grid, within the lead-in
        f0 = 35.0
        track = PathTrack.from_delay_doppler(tau0, f0, cfg.lam)
        surv = synthesize_echo(ref, track, cfg, amplitude=1.0, noise_power=0.2,
                               seed=7)
        chi = matched_filter_orbit(surv, ref, track, cfg)
        m = caf(surv, ref, [tau0], [f0])
        assert abs(chi) ** 2 == pytest.approx(float(m.power[0, 0]), rel=1e-10)


class TestArray:
    def test_wavevector_magnitude(self):
        d = topocentric_direction([1.0, 2.0, 3.0])
        k = wavevector(d, 3.0)
        assert np.linalg.norm(k) == pytest.approx(2.0 * np.pi / 3.0)

    def test_single_element_identity(self):
        cfg = CFG
        ref = synthesize_reference(cfg, seed=1)
        geom = ArrayGeometry(positions=[[0.0, 0.0, 0.0]])
        d = topocentric_direction([0.0, 0.0, 1.0])
        out = beamform([ref], geom, d, cfg.lam)
        np.testing.assert_allclose(out.samples, ref.samples, atol=1e-12)

    def test_matched_steering_gain(self):
        cfg = CFG
        ref = synthesize_reference(cfg, seed=1)
        d = topocentric_direction([0.2, -0.4, 0.9])
        n_el = 4
        geom = ArrayGeometry(positions=np.random.default_rng(0).normal(
            0.0, 1.0, (n_el, 3)))
        k = wavevector(d, cfg.lam)
        elements = [SignalBuffer(
            samples=ref.samples * np.exp(1j * float(np.dot(k, p))),
            sample_rate=ref.sample_rate, epoch=ref.epoch)
            for p in geom.positions]
        out = beamform(elements, geom, d, cfg.lam)
        np.testing.assert_allclose(out.samples, n_el * ref.samples, atol=1e-9)

    def test_array_matched_filter_single_element(self, site):
        el, r, sensor = overhead_pass(site, 700e3)
        cfg = RadarConfig(carrier_freq=100e6, sample_rate=20e3, bandwidth=10e3,
                          cpi=0.5)
        ref = synthesize_reference(cfg, seed=4, duration=cfg.cpi + 0.02,
                                   epoch=-cfg.cpi / 2 - 0.02)
        st = elements_to_state(el)
        track = hypothesis_track(st.r, st.v, sensor, cfg)
        surv = synthesize_echo(ReferenceInterpolator(ref), track, cfg)
        geom = ArrayGeometry(positions=[[0.0, 0.0, 0.0]])
        d = topocentric_direction(r - sensor.q)
        chi_arr = matched_filter_orbit_array([surv], geom, ref, track, d, cfg)
        chi = matched_filter_orbit(surv, ref, track, cfg)
        assert chi_arr == chi
