"""Velocity-space geometric orbit constraints.

Given a hypothesized ECI position plus shape/radar constraints, the
valid orbital velocities are the intersections of the vis-viva speed
sphere, the r.v parallel planes fixed by the orbit shape, and a third
plane fixed either by the node orientation or by a measured Doppler
shift. At most four velocities survive (two in circular zero-Doppler
mode).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import SensorState
from .orbits import (EARTH, GravityModel, KeplerianElements, OrbitError,
                     StateDerivatives, gravity_accel, gravity_jerk,
                     state_to_elements, vis_viva_speed)


class InfeasibleHypothesisError(OrbitError):
    """Constraint set admits no orbit through the hypothesized position."""


class DegenerateGeometryError(OrbitError):
    """Constraint planes are degenerate (e.g. position on the node line)."""


@dataclass(frozen=True)
class PeriapsisLimits:
    """Allowed periapsis radius band (m)."""
    rp_min: float
    rp_max: float

    def __post_init__(self):
        if not self.rp_min <= self.rp_max:
            raise OrbitError(f"rp_min {self.rp_min} exceeds rp_max {self.rp_max}")


@dataclass(frozen=True)
class OrbitShapeHypothesis:
    """Hypothesized position plus orbit shape (e, a) and node angle."""
    r: np.ndarray
    e: float
    a: float
    raan: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))


@dataclass(frozen=True)
class DopplerConstraint:
    """A measured Doppler shift as a plane constraint on the velocity."""
    rho_vec: np.ndarray
    sensor_vel: np.ndarray
    f_D: float
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "rho_vec", np.asarray(self.rho_vec, dtype=float))
        object.__setattr__(self, "sensor_vel", np.asarray(self.sensor_vel, dtype=float))
        if self.lam <= 0:
            raise OrbitError(f"wavelength must be positive, got {self.lam}")
        if float(np.linalg.norm(self.rho_vec)) == 0.0:
            raise OrbitError("slant vector must be nonzero")


@dataclass(frozen=True)
class VelocitySolution:
    """One velocity intersection annotated with its recovered elements."""
    v: np.ndarray
    elements: KeplerianElements
    tangent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))


@dataclass(frozen=True)
class VelocitySolutionSet:
    """All valid velocities for one hypothesis (possibly empty)."""
    solutions: tuple[VelocitySolution, ...] = ()
    degenerate: bool = False

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)


def semi_major_bounds(r_mag: float, e: float, limits: PeriapsisLimits):
    """Feasible semi-major axis interval for a position and eccentricity.

    Intersects the apoapsis/periapsis range bound with the allowed
    periapsis band. Returns (lo, hi); the interval is empty when
    lo > hi, which signals an infeasible hypothesis rather than an
    error.
    """
    if not 0.0 <= e < 1.0:
        raise OrbitError(f"eccentricity must be in [0, 1), got {e}")
    lo = max(r_mag / (1.0 + e), limits.rp_min / (1.0 - e))
    hi = min(r_mag / (1.0 - e), limits.rp_max / (1.0 - e))
    return lo, hi


def rdotv_values(r_mag: float, a: float, e: float, g: GravityModel = EARTH) -> float:
    """Magnitude D of r.v fixed by the position and orbit shape.

    The valid velocities satisfy r.v = +D or -D. A radicand within
    -1e-6 relative of zero is clamped to zero (tangency).

    Raises:
        InfeasibleHypothesisError: If the position is inconsistent with
            the shape (radicand below the clamp tolerance).
    """
    h2 = g.mu * a * (1.0 - e ** 2)
    radicand = r_mag ** 2 * g.mu * (2.0 / r_mag - 1.0 / a) - h2
    if radicand < 0:
        if radicand > -1e-6 * h2:
            return 0.0
        raise InfeasibleHypothesisError(
            f"position r={r_mag} inconsistent with shape (a={a}, e={e})")
    return math.sqrt(radicand)


def raan_plane_normal(r, raan: float) -> np.ndarray:
    """Normal of the velocity plane fixed by the node orientation.

    Equals n_node x r with n_node = [cos(raan), sin(raan), 0]; every
    velocity of an orbit through r with that node angle is orthogonal
    to it.

    Raises:
        DegenerateGeometryError: If r lies on the node line (zero
            normal), which leaves the node constraint uninformative.
    """
    r = np.asarray(r, dtype=float)
    sO, cO = math.sin(raan), math.cos(raan)
    normal = np.array([r[2] * sO, -r[2] * cO, r[1] * cO - r[0] * sO])
    if np.linalg.norm(normal) < 1e-12 * np.linalg.norm(r):
        raise DegenerateGeometryError("position lies on the node line")
    return normal


def doppler_plane(c: DopplerConstraint):
    """Velocity plane implied by a Doppler measurement.

    Returns (unit normal, offset) such that the plane is
    {v : normal . v = offset}. The offset folds in the sensor's own
    line-of-sight speed.
    """
    rho = float(np.linalg.norm(c.rho_vec))
    normal = c.rho_vec / rho
    offset = -c.lam * c.f_D / 2.0 + float(np.dot(c.rho_vec, c.sensor_vel)) / rho
    return normal, offset


def _line_sphere(p0: np.ndarray, u: np.ndarray, speed: float):
    """Intersect the line p0 + s*u with the origin-centred speed sphere."""
    a = float(np.dot(u, u))
    b = 2.0 * float(np.dot(p0, u))
    c = float(np.dot(p0, p0)) - speed ** 2
    disc = b * b - 4.0 * a * c
    eps = 1e-9 * speed ** 2
    if disc < -eps:
        return [], False
    if disc < 0.0:
        return [p0 - b / (2.0 * a) * u], True
    root = math.sqrt(max(disc, 0.0))
    return [p0 + (-b - root) / (2.0 * a) * u,
            p0 + (-b + root) / (2.0 * a) * u], False


def _annotate(r: np.ndarray, v: np.ndarray, epoch: float,
              g: GravityModel) -> KeplerianElements:
    return state_to_elements(StateDerivatives(r=r, v=v,
                                              acc=gravity_accel(r, g),
                                              jerk=gravity_jerk(r, v, g),
                                              epoch=epoch), g)


def _intersect_planes_sphere(r, speed, d_values, n3, c3, epoch, g):
    """Speed sphere ∩ {r.v = ±D} ∩ third plane -> velocity solutions."""
    rmag = float(np.linalg.norm(r))
    n1 = r / rmag
    n3mag = float(np.linalg.norm(n3))
    n3u = n3 / n3mag
    c3u = c3 / n3mag
    solutions = []
    degenerate = False
    cross = np.cross(n1, n3u)
    if np.linalg.norm(cross) < 1e-10:
        # Parallel constraint planes: no line of intersection to solve.
        return VelocitySolutionSet(solutions=(), degenerate=True)
    dot13 = float(np.dot(n1, n3u))
    denom = 1.0 - dot13 ** 2
    for d in d_values:
        c1 = d / rmag
        p0 = ((c1 - c3u * dot13) * n1 + (c3u - c1 * dot13) * n3u) / denom
        points, tangent = _line_sphere(p0, cross, speed)
        degenerate = degenerate or tangent
        for v in points:
            solutions.append(VelocitySolution(
                v=v, elements=_annotate(r, v, epoch, g), tangent=tangent))
    return VelocitySolutionSet(solutions=tuple(solutions), degenerate=degenerate)


def solve_velocities(h: OrbitShapeHypothesis,
                     doppler: DopplerConstraint | None = None,
                     limits: PeriapsisLimits | None = None,
                     epoch: float = 0.0,
                     g: GravityModel = EARTH) -> VelocitySolutionSet:
    """All orbital velocities consistent with a shape hypothesis.

    The third plane comes from the hypothesis node angle when set,
    otherwise from the supplied Doppler constraint.

    Args:
        h: Position plus (e, a) and optional node angle.
        doppler: Doppler plane used when h.raan is None.
        limits: Optional periapsis band; an infeasible semi-major axis
            yields an empty solution set.
        epoch: Epoch attached to the recovered elements (s).
        g: Gravity model.

    Returns:
        Up to four annotated velocities (two per r.v sign).
    """
    rmag = float(np.linalg.norm(h.r))
    if limits is not None:
        lo, hi = semi_major_bounds(rmag, h.e, limits)
        if not lo * (1.0 - 1e-12) <= h.a <= hi * (1.0 + 1e-12):
            return VelocitySolutionSet()
    try:
        speed = vis_viva_speed(rmag, h.a, g)
        d = rdotv_values(rmag, h.a, h.e, g)
    except InfeasibleHypothesisError:
        return VelocitySolutionSet()
    except OrbitError:
        return VelocitySolutionSet()

    # Collapse the two parallel planes onto one near tangency.
    d_values = (0.0,) if d < 1e-6 * rmag * speed else (-d, d)

    if h.raan is not None:
        n3 = raan_plane_normal(h.r, h.raan)
        c3 = 0.0
    elif doppler is not None:
        n3, c3 = doppler_plane(doppler)
    else:
        raise OrbitError("hypothesis needs a node angle or a Doppler constraint")
    return _intersect_planes_sphere(h.r, speed, d_values, n3, c3, epoch, g)


def circular_zero_doppler(r, sensor: SensorState, f_D: float, lam: float,
                          g: GravityModel = EARTH,
                          limits: PeriapsisLimits | None = None) -> VelocitySolutionSet:
    """Circular-orbit velocities matching a Doppler shift at closest approach.

    Specializes the general solver with e = 0, so a = |r| and the two
    r.v planes collapse to the single plane r.v = 0; at most two
    velocities result.

    Raises:
        OrbitError: If the position is inside the Earth or coincides
            with the sensor.
    """
    r = np.asarray(r, dtype=float)
    rmag = float(np.linalg.norm(r))
    if rmag <= g.earth_radius:
        raise OrbitError(f"hypothesized position inside the Earth (|r|={rmag})")
    rho_vec = r - sensor.q
    if float(np.linalg.norm(rho_vec)) == 0.0:
        raise OrbitError("hypothesized position coincides with the sensor")
    if limits is not None and not limits.rp_min <= rmag <= limits.rp_max:
        return VelocitySolutionSet()
    dop = DopplerConstraint(rho_vec=rho_vec, sensor_vel=sensor.qd, f_D=f_D, lam=lam)
    hyp = OrbitShapeHypothesis(r=r, e=0.0, a=rmag, raan=None)
    return solve_velocities(hyp, doppler=dop, epoch=sensor.epoch, g=g)
