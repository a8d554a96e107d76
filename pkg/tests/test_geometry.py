"""Sensor kinematics, slant-range derivative chain, and tracks."""
import math

import numpy as np
import pytest

from odbd import (EARTH, GeodeticSite, GeometryError, KeplerianElements,
                  SlantSeries, StateDerivatives, TopocentricDirection,
                  direction_unit, elements_to_state, eval_track,
                  measurement_track, numeric_trajectory, polynomial_track,
                  propagate_kepler, site_to_sensor_state, slant_series,
                  topocentric_direction)
from conftest import overhead_pass


class TestSite:
    def test_latitude_range_checked(self):
        with pytest.raises(GeometryError):
            GeodeticSite(latitude=2.0, longitude=0.0)

    def test_from_degrees(self):
        s = GeodeticSite.from_degrees(-27.0, 116.7, 250.0)
        assert s.latitude == pytest.approx(math.radians(-27.0))
        assert s.longitude == pytest.approx(math.radians(116.7))
        assert s.altitude == 250.0

    def test_position_radius_and_latitude(self):
        site = GeodeticSite.from_degrees(-27.0, 116.7, 100.0)
        st = site_to_sensor_state(site, 12.3)
        assert np.linalg.norm(st.q) == pytest.approx(EARTH.earth_radius + 100.0)
        assert st.q[2] == pytest.approx(
            (EARTH.earth_radius + 100.0) * math.sin(site.latitude))

    def test_derivatives_match_finite_differences(self):
        site = GeodeticSite.from_degrees(40.0, 5.0)
        h = 0.5
        t0 = 100.0
        states = {dt: site_to_sensor_state(site, t0 + dt)
                  for dt in (-2 * h, -h, 0.0, h, 2 * h)}
        qd_fd = (states[h].q - states[-h].q) / (2 * h)
        qdd_fd = (states[h].q - 2 * states[0.0].q + states[-h].q) / h ** 2
        qddd_fd = (states[2 * h].q - 2 * states[h].q + 2 * states[-h].q
                   - states[-2 * h].q) / (2 * h ** 3)
        np.testing.assert_allclose(states[0.0].qd, qd_fd, rtol=1e-7)
        np.testing.assert_allclose(states[0.0].qdd, qdd_fd, rtol=1e-5)
        # Third difference of a ~6.4e6 m position is rounding-limited
        # near 1e-8; compare with a matching absolute floor.
        np.testing.assert_allclose(states[0.0].qddd, qddd_fd, rtol=1e-3,
                                   atol=1e-8)

    def test_speed_is_rotational(self):
        site = GeodeticSite.from_degrees(0.0, 0.0)
        st = site_to_sensor_state(site, 0.0)
        assert np.linalg.norm(st.qd) == pytest.approx(
            EARTH.earth_rotation_rate * EARTH.earth_radius)


class TestSlantSeries:
    def test_derivatives_match_kepler_finite_differences(self, site):
        el, r, sensor = overhead_pass(site, 900e3, off_zenith_deg=15.0)
        el = propagate_kepler(el, 12.0)
        target = elements_to_state(el)
        sensor = site_to_sensor_state(site, 12.0)
        ss = slant_series(target, sensor, 10.0)

        def rho(dt):
            st = elements_to_state(propagate_kepler(el, dt))
            q = site_to_sensor_state(site, el.epoch + dt).q
            return float(np.linalg.norm(st.r - q))

        h = 0.5
        samples = {k: rho(k * h) for k in range(-2, 3)}
        d1 = (samples[1] - samples[-1]) / (2 * h)
        d2 = (samples[1] - 2 * samples[0] + samples[-1]) / h ** 2
        d3 = (samples[2] - 2 * samples[1] + 2 * samples[-1] - samples[-2]) \
            / (2 * h ** 3)
        assert ss.rho == pytest.approx(samples[0], rel=1e-12)
        assert ss.rhod == pytest.approx(d1, rel=1e-4)
        assert ss.rhodd == pytest.approx(d2, rel=1e-3)
        assert ss.rhoddd == pytest.approx(d3, rel=0.1)

    def test_coincident_positions_rejected(self, site):
        sensor = site_to_sensor_state(site, 0.0)
        target = StateDerivatives(r=sensor.q, v=np.zeros(3), acc=np.zeros(3),
                                  jerk=np.zeros(3))
        with pytest.raises(GeometryError):
            slant_series(target, sensor, 10.0)


class TestEvalTrack:
    def test_polynomial_values(self):
        ss = SlantSeries(rho=1.0e6, rhod=100.0, rhodd=2.0, rhoddd=0.6, T=10.0)
        rho_t, rhod_t = eval_track(ss, 2.0)
        assert rho_t == pytest.approx(1.0e6 + 200.0 + 4.0 + 0.8)
        assert rhod_t == pytest.approx(100.0 + 4.0 + 1.2)

    def test_outside_window_rejected(self):
        ss = SlantSeries(rho=1.0e6, rhod=0.0, rhodd=0.0, rhoddd=0.0, T=10.0)
        with pytest.raises(GeometryError):
            eval_track(ss, 5.1)

    def test_vectorized(self):
        ss = SlantSeries(rho=5.0, rhod=1.0, rhodd=0.0, rhoddd=0.0, T=4.0)
        rho_t, _ = eval_track(ss, np.array([-1.0, 0.0, 1.0]))
        np.testing.assert_allclose(rho_t, [4.0, 5.0, 6.0])


class TestDirections:
    def test_cardinal_axes(self):
        d = topocentric_direction([1.0, 0.0, 0.0])
        assert (d.alpha, d.delta) == (0.0, 0.0)
        d = topocentric_direction([0.0, 0.0, 2.0])
        assert d.delta == pytest.approx(math.pi / 2.0)

    def test_round_trip(self):
        vec = np.array([0.3, -0.8, 0.52])
        d = topocentric_direction(vec)
        np.testing.assert_allclose(direction_unit(d), vec / np.linalg.norm(vec),
                                   atol=1e-15)

    def test_zero_vector_rejected(self):
        with pytest.raises(GeometryError):
            topocentric_direction([0.0, 0.0, 0.0])

    def test_alpha_wrapped(self):
        d = topocentric_direction([1.0, -1e-6, 0.0])
        assert 0.0 <= d.alpha < 2.0 * math.pi


class TestTracks:
    def test_measurement_track_shape_and_consistency(self, site):
        el, r, sensor = overhead_pass(site, 700e3)
        track = measurement_track(el, site, 20.0, 0.5)
        assert track.t.size == 41
        assert track.dt == 0.5
        # Centre sample must reproduce the closest-approach geometry.
        k = track.t.size // 2
        dvec = r - sensor.q
        assert track.rho[k] == pytest.approx(np.linalg.norm(dvec), rel=1e-12)
        assert abs(track.rhod[k]) < 1e-6   # built as a zero-Doppler crossing

    def test_polynomial_track_close_to_truth(self, site):
        el, r, sensor = overhead_pass(site, 3000e3, off_zenith_deg=12.0)
        truth = measurement_track(el, site, 10.0, 0.5)
        st = elements_to_state(el)
        sim = polynomial_track(st, site, 10.0, 0.5)
        np.testing.assert_allclose(sim.rho, truth.rho, atol=1e-2)
        np.testing.assert_allclose(sim.rhod, truth.rhod, atol=1e-2)
        assert np.max(np.abs(sim.alpha - truth.alpha)) < 1e-6

    def test_rho_against_rk4_oracle(self, site):
        el, _, _ = overhead_pass(site, 1100e3, off_zenith_deg=20.0)
        s0 = elements_to_state(el)
        times = np.linspace(-5.0, 5.0, 11)
        pos, _ = numeric_trajectory(s0, times, step=0.05)
        track = measurement_track(el, site, 10.0, 1.0)
        for k, t in enumerate(times):
            q = site_to_sensor_state(site, float(t)).q
            assert track.rho[k] == pytest.approx(
                float(np.linalg.norm(pos[k] - q)), abs=1e-5)

    def test_bad_grid_rejected(self, site):
        el, _, _ = overhead_pass(site, 700e3)
        with pytest.raises(GeometryError):
            measurement_track(el, site, 10.0, 0.0)
