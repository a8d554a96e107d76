"""Shared fixtures and geometry builders for the test suite."""
import math

import numpy as np
import pytest

from odbd import (GeodeticSite, circular_zero_doppler, site_to_sensor_state)


@pytest.fixture
def site():
    """Default mid-latitude receiver site."""
    return GeodeticSite.from_degrees(-27.0, 116.7)


def local_frame(sensor_q):
    """(zenith, east, north) unit vectors at a sensor position."""
    zen = sensor_q / np.linalg.norm(sensor_q)
    east = np.cross([0.0, 0.0, 1.0], zen)
    east /= np.linalg.norm(east)
    north = np.cross(zen, east)
    return zen, east, north


def overhead_pass(site, rho0, off_zenith_deg=8.0, azimuth_deg=0.0,
                  f_d=0.0, lam=3.0, t=0.0):
    """Circular-orbit pass through a position off the site zenith.

    Returns (elements, position, sensor_state) for the solution whose
    velocity has the larger K component (deterministic pick).
    """
    sensor = site_to_sensor_state(site, t)
    zen, east, north = local_frame(sensor.q)
    off = math.radians(off_zenith_deg)
    az = math.radians(azimuth_deg)
    u = (math.cos(off) * zen
         + math.sin(off) * (math.cos(az) * north + math.sin(az) * east))
    r = sensor.q + rho0 * u
    sols = circular_zero_doppler(r, sensor, f_d, lam)
    assert len(sols) == 2
    sol = max(sols, key=lambda s: s.v[2])
    return sol.elements, r, sensor
