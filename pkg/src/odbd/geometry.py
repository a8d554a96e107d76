"""Sensor kinematics and slant-range tracks.

An Earth-fixed site rotates uniformly about the ECI K axis, so its
position and all derivatives are analytic. The slant-range scalar
derivative chain feeds cubic per-CPI polynomial tracks; angular
measurements are topocentric right ascension and declination.
"""
import math
from dataclasses import dataclass

import numpy as np

from .orbits import (EARTH, GravityModel, KeplerianElements, StateDerivatives,
                     elements_to_state, propagate_kepler, wrap_angle)


class GeometryError(ValueError):
    """Invalid geometric input."""


@dataclass(frozen=True)
class GeodeticSite:
    """Spherical-Earth site: latitude/longitude (rad) and altitude (m)."""
    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self):
        if abs(self.latitude) > math.pi / 2:
            raise GeometryError(f"latitude out of range: {self.latitude}")

    @classmethod
    def from_degrees(cls, latitude_deg: float, longitude_deg: float,
                     altitude_m: float = 0.0) -> "GeodeticSite":
        return cls(math.radians(latitude_deg), math.radians(longitude_deg), altitude_m)


@dataclass(frozen=True)
class SensorState:
    """ECI sensor position and its first three derivatives at an epoch."""
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    qddd: np.ndarray
    epoch: float = 0.0

    def __post_init__(self):
        for name in ("q", "qd", "qdd", "qddd"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True)
class SlantSeries:
    """Slant range and derivatives defining a cubic per-CPI track.

    Valid for track time t in [-T/2, T/2] relative to the expansion
    epoch.
    """
    rho: float
    rhod: float
    rhodd: float
    rhoddd: float
    T: float


@dataclass(frozen=True)
class TopocentricDirection:
    """Topocentric right ascension and declination (rad)."""
    alpha: float
    delta: float


@dataclass(frozen=True)
class MeasurementTrack:
    """Uniformly sampled (alpha, delta, rho, rhodot) measurement history.

    Angles are radians; alpha_deg/delta_deg cache the exact degree
    values of a file the track was read from, so re-serialization is
    bit-exact.
    """
    t: np.ndarray
    alpha: np.ndarray
    delta: np.ndarray
    rho: np.ndarray
    rhod: np.ndarray
    dt: float
    alpha_deg: np.ndarray | None = None
    delta_deg: np.ndarray | None = None

    def __post_init__(self):
        for name in ("t", "alpha", "delta", "rho", "rhod"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


def site_to_sensor_state(site: GeodeticSite, t: float,
                         g: GravityModel = EARTH) -> SensorState:
    """ECI state of an Earth-fixed site at scenario time t.

    The site rotates uniformly about the K axis at the Earth rotation
    rate; each time derivative rotates the equatorial component a
    further 90 degrees and scales it by the rotation rate.
    """
    w = g.earth_rotation_rate
    radius = g.earth_radius + site.altitude
    theta = site.longitude + w * t
    cxy = radius * math.cos(site.latitude)
    q = np.array([cxy * math.cos(theta), cxy * math.sin(theta),
                  radius * math.sin(site.latitude)])
    qd = w * np.array([-q[1], q[0], 0.0])
    qdd = -w ** 2 * np.array([q[0], q[1], 0.0])
    qddd = -w ** 2 * qd
    return SensorState(q=q, qd=qd, qdd=qdd, qddd=qddd, epoch=t)


def slant_series(target: StateDerivatives, sensor: SensorState, T: float) -> SlantSeries:
    """Slant range and its first three instantaneous derivatives.

    Formed from the componentwise relative state (target minus sensor)
    at a common epoch.

    Raises:
        GeometryError: If target and sensor positions coincide.
    """
    d0 = target.r - sensor.q
    d1 = target.v - sensor.qd
    d2 = target.acc - sensor.qdd
    d3 = target.jerk - sensor.qddd
    rho = float(np.linalg.norm(d0))
    if rho == 0.0:
        raise GeometryError("target and sensor positions coincide")
    p01 = float(np.dot(d0, d1))
    s11 = float(np.dot(d1, d1))
    p02 = float(np.dot(d0, d2))
    p12 = float(np.dot(d1, d2))
    p03 = float(np.dot(d0, d3))
    rhod = p01 / rho
    rhodd = -p01 ** 2 / rho ** 3 + (s11 + p02) / rho
    rhoddd = (3.0 * p01 ** 3 / rho ** 5
              - 3.0 * p01 * (s11 + p02) / rho ** 3
              + (3.0 * p12 + p03) / rho)
    return SlantSeries(rho=rho, rhod=rhod, rhodd=rhodd, rhoddd=rhoddd, T=T)


def eval_track(ss: SlantSeries, t):
    """Evaluate the cubic range polynomial and its exact derivative.

    Args:
        ss: Slant series defining the polynomial.
        t: Track time(s) in [-T/2, T/2] (s).

    Returns:
        (rho_t, rhod_t) with the same shape as t.

    Raises:
        GeometryError: If any t lies outside the CPI window.
    """
    t = np.asarray(t, dtype=float)
    half = ss.T / 2.0
    if np.any(np.abs(t) > half * (1.0 + 1e-12)):
        raise GeometryError(f"track time outside CPI window [-{half}, {half}]")
    rho_t = ss.rho + ss.rhod * t + 0.5 * ss.rhodd * t ** 2 + ss.rhoddd / 6.0 * t ** 3
    rhod_t = ss.rhod + ss.rhodd * t + 0.5 * ss.rhoddd * t ** 2
    return rho_t, rhod_t


def topocentric_direction(rho_vec) -> TopocentricDirection:
    """Arrival direction of a slant-range vector as (alpha, delta).

    Raises:
        GeometryError: For a zero vector.
    """
    rho_vec = np.asarray(rho_vec, dtype=float)
    rxy = math.hypot(rho_vec[0], rho_vec[1])
    if rxy == 0.0 and rho_vec[2] == 0.0:
        raise GeometryError("direction undefined for zero vector")
    alpha = 0.0 if rxy == 0.0 else wrap_angle(math.atan2(rho_vec[1], rho_vec[0]))
    delta = math.atan2(rho_vec[2], rxy)
    return TopocentricDirection(alpha=alpha, delta=delta)


def direction_unit(d: TopocentricDirection) -> np.ndarray:
    """Unit vector of a topocentric direction in ECI-aligned axes."""
    cd = math.cos(d.delta)
    return np.array([cd * math.cos(d.alpha), cd * math.sin(d.alpha),
                     math.sin(d.delta)])


def _track_times(T: float, dt: float) -> np.ndarray:
    if dt <= 0 or T <= 0:
        raise GeometryError(f"window and spacing must be positive (T={T}, dt={dt})")
    n = int(round(T / dt))
    return (np.arange(n + 1) - n / 2.0) * dt


def measurement_track(el: KeplerianElements, site: GeodeticSite, T: float,
                      dt: float, g: GravityModel = EARTH) -> MeasurementTrack:
    """Truth measurement track over a window centred on the element epoch.

    Samples alpha, delta, rho, rhodot on a uniform grid over
    [-T/2, T/2] using the analytic Kepler propagator; this is the
    ephemeris-style comparison track, not the polynomial approximation.
    """
    times = _track_times(T, dt)
    alpha = np.empty_like(times)
    delta = np.empty_like(times)
    rho = np.empty_like(times)
    rhod = np.empty_like(times)
    for k, trel in enumerate(times):
        st = elements_to_state(propagate_kepler(el, float(trel), g), g)
        sensor = site_to_sensor_state(site, el.epoch + float(trel), g)
        dvec = st.r - sensor.q
        dvel = st.v - sensor.qd
        direction = topocentric_direction(dvec)
        alpha[k] = direction.alpha
        delta[k] = direction.delta
        rho[k] = np.linalg.norm(dvec)
        rhod[k] = np.dot(dvec, dvel) / rho[k]
    return MeasurementTrack(t=times + el.epoch, alpha=alpha, delta=delta,
                            rho=rho, rhod=rhod, dt=dt)


def polynomial_track(target: StateDerivatives, site: GeodeticSite, T: float,
                     dt: float, g: GravityModel = EARTH) -> MeasurementTrack:
    """Approximate measurement track from a cubic vector expansion.

    The target position is propagated by its Taylor expansion around
    the state epoch while the sensor position stays exact; angles are
    then evaluated from the resulting slant-vector components, which
    avoids angle-wrap singularities near zenith.
    """
    times = _track_times(T, dt)
    alpha = np.empty_like(times)
    delta = np.empty_like(times)
    rho = np.empty_like(times)
    rhod = np.empty_like(times)
    for k, trel in enumerate(times):
        t = float(trel)
        r_t = target.r + target.v * t + 0.5 * target.acc * t ** 2 \
            + target.jerk * t ** 3 / 6.0
        v_t = target.v + target.acc * t + 0.5 * target.jerk * t ** 2
        sensor = site_to_sensor_state(site, target.epoch + t, g)
        dvec = r_t - sensor.q
        dvel = v_t - sensor.qd
        direction = topocentric_direction(dvec)
        alpha[k] = direction.alpha
        delta[k] = direction.delta
        rho[k] = np.linalg.norm(dvec)
        rhod[k] = np.dot(dvec, dvel) / rho[k]
    return MeasurementTrack(t=times + target.epoch, alpha=alpha, delta=delta,
                            rho=rho, rhod=rhod, dt=dt)
