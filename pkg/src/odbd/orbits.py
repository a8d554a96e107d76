"""Keplerian two-body mechanics.

Element/state conversions, gravity derivatives, and two independent
propagators: an analytic Kepler-equation stepper and a fixed-step RK4
integrator. Everything is SI (m, s, rad) and ECI.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi


class OrbitError(ValueError):
    """Invalid or infeasible orbital input."""


class ConvergenceError(OrbitError):
    """Iterative solver failed to converge."""


@dataclass(frozen=True)
class GravityModel:
    """Central-body constants.

    Attributes:
        mu: Standard gravitational parameter (m^3/s^2).
        earth_radius: Body radius used for feasibility checks (m).
        earth_rotation_rate: Sidereal rotation rate (rad/s).
    """
    mu: float = 3.986004418e14
    earth_radius: float = 6378137.0
    earth_rotation_rate: float = 7.2921159e-5

    def __post_init__(self):
        if self.mu <= 0:
            raise OrbitError(f"mu must be positive, got {self.mu}")


EARTH = GravityModel()


def wrap_angle(theta: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    theta = math.fmod(theta, TWO_PI)
    return theta + TWO_PI if theta < 0 else theta


@dataclass(frozen=True)
class KeplerianElements:
    """Classical orbital elements at an epoch.

    Attributes:
        a: Semi-major axis (m), a > 0.
        e: Eccentricity, 0 <= e < 1 (closed orbits only).
        i: Inclination (rad).
        raan: Right ascension of the ascending node (rad).
        argp: Argument of periapsis (rad).
        nu: True anomaly (rad).
        epoch: Scenario-clock time of validity (s).
    """
    a: float
    e: float
    i: float
    raan: float
    argp: float
    nu: float
    epoch: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise OrbitError(f"semi-major axis must be positive, got {self.a}")
        if not 0.0 <= self.e < 1.0:
            raise OrbitError(f"eccentricity must be in [0, 1), got {self.e}")
        for name in ("i", "raan", "argp", "nu"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))

    def periapsis(self) -> float:
        return self.a * (1.0 - self.e)

    def apoapsis(self) -> float:
        return self.a * (1.0 + self.e)

    def period(self, g: GravityModel = EARTH) -> float:
        return TWO_PI * math.sqrt(self.a ** 3 / g.mu)


@dataclass(frozen=True)
class PerifocalBasis:
    """Orthonormal in-plane axes P, Q and plane normal W in ECI."""
    P: np.ndarray
    Q: np.ndarray
    W: np.ndarray


@dataclass(frozen=True)
class StateDerivatives:
    """ECI position and its first three time derivatives.

    Attributes:
        r: Position (m).
        v: Velocity (m/s).
        acc: Acceleration (m/s^2).
        jerk: Jerk (m/s^3).
        epoch: Scenario-clock time of validity (s).
    """
    r: np.ndarray
    v: np.ndarray
    acc: np.ndarray
    jerk: np.ndarray
    epoch: float = 0.0

    def __post_init__(self):
        for name in ("r", "v", "acc", "jerk"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


def perifocal_basis(i: float, raan: float, argp: float) -> PerifocalBasis:
    """Perifocal axes of an orbital plane in ECI coordinates.

    P points to periapsis, Q is advanced 90 deg in the direction of
    motion, and W = P x Q is the angular-momentum direction.
    """
    cO, sO = math.cos(raan), math.sin(raan)
    cw, sw = math.cos(argp), math.sin(argp)
    ci, si = math.cos(i), math.sin(i)
    P = np.array([cO * cw - sO * ci * sw,
                  sO * cw + cO * ci * sw,
                  si * sw])
    Q = np.array([-cO * sw - sO * ci * cw,
                  -sO * sw + cO * ci * cw,
                  si * cw])
    W = np.array([si * sO, -si * cO, ci])
    return PerifocalBasis(P=P, Q=Q, W=W)


def gravity_accel(r: np.ndarray, g: GravityModel = EARTH) -> np.ndarray:
    """Point-mass gravitational acceleration -mu r / |r|^3."""
    r = np.asarray(r, dtype=float)
    rmag = float(np.linalg.norm(r))
    if rmag == 0.0:
        raise OrbitError("gravity undefined at zero position")
    return -g.mu / rmag ** 3 * r


def gravity_jerk(r: np.ndarray, v: np.ndarray, g: GravityModel = EARTH) -> np.ndarray:
    """Time derivative of the gravitational acceleration along a trajectory.

    Returns (3 mu (r.v) / |r|^5) r - (mu / |r|^3) v.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    rmag = float(np.linalg.norm(r))
    if rmag == 0.0:
        raise OrbitError("gravity undefined at zero position")
    rdotv = float(np.dot(r, v))
    return 3.0 * g.mu * rdotv / rmag ** 5 * r - g.mu / rmag ** 3 * v


def elements_to_state(el: KeplerianElements, g: GravityModel = EARTH) -> StateDerivatives:
    """Convert classical elements to ECI position, velocity, acceleration, jerk.

    Args:
        el: Elements at their epoch.
        g: Gravity model.

    Returns:
        StateDerivatives at el.epoch.
    """
    p = el.a * (1.0 - el.e ** 2)
    basis = perifocal_basis(el.i, el.raan, el.argp)
    cnu, snu = math.cos(el.nu), math.sin(el.nu)
    rmag = p / (1.0 + el.e * cnu)
    r = rmag * (cnu * basis.P + snu * basis.Q)
    vcoef = math.sqrt(g.mu / p)
    v = vcoef * (-snu * basis.P + (el.e + cnu) * basis.Q)
    return StateDerivatives(r=r, v=v,
                            acc=gravity_accel(r, g),
                            jerk=gravity_jerk(r, v, g),
                            epoch=el.epoch)


_DEGENERATE_TOL = 1e-9


def state_to_elements(s: StateDerivatives, g: GravityModel = EARTH) -> KeplerianElements:
    """Convert an ECI state to classical elements.

    Degenerate conventions: for near-circular orbits (e < 1e-9) the
    argument of periapsis is set to zero and folded into the true
    anomaly; for near-equatorial orbits (i < 1e-9) the RAAN is set to
    zero and folded into the argument of periapsis.

    Args:
        s: Bound ECI state (specific energy < 0).
        g: Gravity model.

    Raises:
        OrbitError: For parabolic or hyperbolic input.
    """
    r = np.asarray(s.r, dtype=float)
    v = np.asarray(s.v, dtype=float)
    rmag = float(np.linalg.norm(r))
    vmag2 = float(np.dot(v, v))
    energy = 0.5 * vmag2 - g.mu / rmag
    if energy >= 0.0:
        raise OrbitError(f"state is not bound (specific energy {energy:.3e} >= 0)")
    a = -g.mu / (2.0 * energy)

    h = np.cross(r, v)
    hmag = float(np.linalg.norm(h))
    evec = np.cross(v, h) / g.mu - r / rmag
    e = float(np.linalg.norm(evec))

    i = math.acos(max(-1.0, min(1.0, h[2] / hmag)))

    # Node vector K x h; degenerates for equatorial orbits.
    n = np.array([-h[1], h[0], 0.0])
    nmag = float(np.linalg.norm(n))
    equatorial = i < _DEGENERATE_TOL or nmag < _DEGENERATE_TOL * hmag
    circular = e < _DEGENERATE_TOL

    if equatorial:
        raan = 0.0
        node_dir = np.array([1.0, 0.0, 0.0])
    else:
        raan = math.atan2(n[1], n[0])
        node_dir = n / nmag

    what = h / hmag
    # In-plane axis 90 deg ahead of the node in the direction of motion.
    node_perp = np.cross(what, node_dir)

    if circular:
        argp = 0.0
        nu = math.atan2(float(np.dot(r, node_perp)), float(np.dot(r, node_dir)))
    else:
        ehat = evec / e
        argp = math.atan2(float(np.dot(ehat, node_perp)), float(np.dot(ehat, node_dir)))
        eperp = np.cross(what, ehat)
        nu = math.atan2(float(np.dot(r, eperp)), float(np.dot(r, ehat)))

    return KeplerianElements(a=a, e=e, i=i, raan=raan, argp=argp, nu=nu,
                             epoch=s.epoch)


def _true_to_mean_anomaly(nu: float, e: float) -> float:
    E = 2.0 * math.atan2(math.sqrt(1.0 - e) * math.sin(nu / 2.0),
                         math.sqrt(1.0 + e) * math.cos(nu / 2.0))
    return E - e * math.sin(E)


def solve_kepler(M: float, e: float, tol: float = 1e-12, max_iter: int = 50) -> float:
    """Solve Kepler's equation M = E - e sin E for the eccentric anomaly.

    Newton iteration with start guess E0 = M + e sin M.

    Raises:
        ConvergenceError: If the residual does not drop below tol
            within max_iter iterations.
    """
    M = math.fmod(M, TWO_PI)
    E = M + e * math.sin(M)
    for _ in range(max_iter):
        f = E - e * math.sin(E) - M
        if abs(f) < tol:
            return E
        E -= f / (1.0 - e * math.cos(E))
    raise ConvergenceError(f"Kepler solver did not converge (e={e}, M={M})")


def propagate_kepler(el: KeplerianElements, dt: float,
                     g: GravityModel = EARTH) -> KeplerianElements:
    """Analytically advance elements by dt via Kepler's equation.

    Only the true anomaly (and epoch) change; a, e, i, raan, argp are
    preserved exactly.
    """
    n = math.sqrt(g.mu / el.a ** 3)
    M0 = _true_to_mean_anomaly(el.nu, el.e)
    E = solve_kepler(M0 + n * dt, el.e)
    nu = 2.0 * math.atan2(math.sqrt(1.0 + el.e) * math.sin(E / 2.0),
                          math.sqrt(1.0 - el.e) * math.cos(E / 2.0))
    return replace(el, nu=wrap_angle(nu), epoch=el.epoch + dt)


def _rk4_step(r, v, h, g):
    k1r = v
    k1v = gravity_accel(r, g)
    k2r = v + 0.5 * h * k1v
    k2v = gravity_accel(r + 0.5 * h * k1r, g)
    k3r = v + 0.5 * h * k2v
    k3v = gravity_accel(r + 0.5 * h * k2r, g)
    k4r = v + h * k3v
    k4v = gravity_accel(r + h * k3r, g)
    r2 = r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    v2 = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return r2, v2


def propagate_numeric(s: StateDerivatives, dt: float, step: float,
                      g: GravityModel = EARTH) -> StateDerivatives:
    """Fixed-step RK4 integration of the two-body equation of motion.

    Independent of the analytic propagator; used as a cross-check
    oracle. The final partial step is shortened so the result lands
    exactly on dt.

    Args:
        s: Initial state.
        dt: Propagation time, may be negative (s).
        step: Positive step magnitude (s).
        g: Gravity model.
    """
    if not step > 0:
        raise OrbitError(f"step must be positive, got {step}")
    r = np.array(s.r, dtype=float)
    v = np.array(s.v, dtype=float)
    remaining = float(dt)
    sign = 1.0 if remaining >= 0 else -1.0
    while abs(remaining) > 1e-15:
        h = sign * min(step, abs(remaining))
        r, v = _rk4_step(r, v, h, g)
        remaining -= h
    return StateDerivatives(r=r, v=v, acc=gravity_accel(r, g),
                            jerk=gravity_jerk(r, v, g), epoch=s.epoch + dt)


def numeric_trajectory(s: StateDerivatives, times: np.ndarray, step: float,
                       g: GravityModel = EARTH):
    """Sample an RK4-propagated trajectory at given times.

    Args:
        s: State at its epoch.
        times: Scenario-clock sample times (s), any order.
        step: RK4 step magnitude (s).

    Returns:
        (positions, velocities): arrays of shape (len(times), 3).
    """
    times = np.asarray(times, dtype=float)
    order = np.argsort(times)
    pos = np.empty((times.size, 3))
    vel = np.empty((times.size, 3))
    # March outward from the epoch in both directions to keep steps short.
    for direction in (order[times[order] >= s.epoch],
                      order[times[order] < s.epoch][::-1]):
        cur = s
        for idx in direction:
            cur = propagate_numeric(cur, float(times[idx] - cur.epoch), step, g)
            pos[idx] = cur.r
            vel[idx] = cur.v
    return pos, vel


def vis_viva_speed(r_mag: float, a: float, g: GravityModel = EARTH) -> float:
    """Orbital speed at radius r_mag on an orbit of semi-major axis a.

    Raises:
        OrbitError: If no orbit with that semi-major axis passes
            through that radius (negative radicand).
    """
    if r_mag <= 0:
        raise OrbitError(f"radius must be positive, got {r_mag}")
    radicand = g.mu * (2.0 / r_mag - 1.0 / a)
    if radicand < 0:
        raise OrbitError(
            f"no valid orbit through r={r_mag} with a={a} (negative vis-viva radicand)")
    return math.sqrt(radicand)
