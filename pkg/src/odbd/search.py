"""Uncued detection search over constrained orbit hypotheses.

Enumerates grid positions in a direction cone and range interval,
solves each for its admissible orbital velocities, evaluates the
matched-filter bank, and thresholds detections against a robust
noise-floor estimate.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import PeriapsisLimits, VelocitySolutionSet, circular_zero_doppler, \
    OrbitShapeHypothesis, solve_velocities
from .geometry import (SensorState, SlantSeries, TopocentricDirection,
                       direction_unit, slant_series, site_to_sensor_state)
from .orbits import (EARTH, GravityModel, KeplerianElements, OrbitError,
                     StateDerivatives, gravity_accel, gravity_jerk,
                     state_to_elements)
from .signals import (DelaySupportError, PathTrack, RadarConfig,
                      ReferenceInterpolator, matched_filter_orbit)


class SearchError(ValueError):
    """Invalid search configuration or input."""


class HypothesisCapError(SearchError):
    """The hypothesis bank exceeded the configured resource guard."""


@dataclass(frozen=True)
class SearchVolume:
    """Direction cone times range interval, with grid spacings.

    The cone is centred on (alpha, delta) with the given half-angle;
    grid points are laid on a uniform alpha/delta lattice and kept when
    their angular distance from the centre is within the half-angle.
    """
    center_alpha: float
    center_delta: float
    half_angle: float
    range_min: float
    range_max: float
    angular_step: float
    range_step: float

    def __post_init__(self):
        if self.range_min <= 0 or self.range_max < self.range_min:
            raise SearchError("invalid range interval")
        if self.angular_step <= 0 or self.range_step <= 0:
            raise SearchError("grid spacings must be positive")
        if self.half_angle < 0:
            raise SearchError("half-angle must be non-negative")


@dataclass(frozen=True)
class OrbitHypothesis:
    """One grid position with its admissible candidate velocities."""
    index: int
    r: np.ndarray
    direction: TopocentricDirection
    rho: float
    f_D: float
    mode: str
    candidates: VelocitySolutionSet

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))


@dataclass(frozen=True)
class Detection:
    """Thresholded matched-filter detection with recovered elements."""
    statistic: float
    snr_db: float
    r: np.ndarray
    v: np.ndarray
    elements: KeplerianElements
    epoch: float
    mode: str
    hypothesis_index: int

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))


def _cone_offsets(half_angle: float, step: float):
    n = int(math.floor(half_angle / step + 1e-9))
    return (np.arange(-n, n + 1) * step) if n >= 0 else np.array([0.0])


def enumerate_hypotheses(vol: SearchVolume, sensor: SensorState,
                         limits: PeriapsisLimits, lam: float,
                         mode: str = "circular",
                         f_d_grid=(0.0,),
                         shape_grids=None,
                         g: GravityModel = EARTH):
    """Yield orbit hypotheses over a search volume in deterministic order.

    Circular mode solves the zero-Doppler geometry per grid position
    and Doppler value (at most two candidates each); shape mode solves
    the node-plane geometry over (e, a, raan) grids (at most four).
    Infeasible positions are skipped.

    Args:
        vol: Search volume and grid spacings.
        sensor: Receiver state at the CPI centre.
        limits: Allowed periapsis band.
        lam: Wavelength (m).
        mode: "circular" or "shape".
        f_d_grid: Doppler hypotheses (Hz), circular mode only.
        shape_grids: (e_values, a_values, raan_values), shape mode only.
        g: Gravity model.
    """
    if mode not in ("circular", "shape"):
        raise SearchError(f"unknown search mode: {mode}")
    if mode == "shape" and shape_grids is None:
        raise SearchError("shape mode requires (e, a, raan) grids")
    dalphas = _cone_offsets(vol.half_angle, vol.angular_step)
    ddeltas = _cone_offsets(vol.half_angle, vol.angular_step)
    n_ranges = int(math.floor((vol.range_max - vol.range_min) / vol.range_step + 1e-9))
    ranges = vol.range_min + np.arange(n_ranges + 1) * vol.range_step
    cosd = math.cos(vol.center_delta)
    index = 0
    for ddelta in ddeltas:
        delta = vol.center_delta + ddelta
        if abs(delta) > math.pi / 2:
            continue
        for dalpha in dalphas:
            if math.hypot(ddelta, dalpha * cosd) > vol.half_angle * (1 + 1e-9):
                continue
            direction = TopocentricDirection(alpha=vol.center_alpha + dalpha,
                                             delta=delta)
            u = direction_unit(direction)
            for rho in ranges:
                r = sensor.q + rho * u
                rmag = float(np.linalg.norm(r))
                if rmag <= g.earth_radius:
                    continue
                if mode == "circular":
                    for f_d in f_d_grid:
                        try:
                            sols = circular_zero_doppler(r, sensor, float(f_d),
                                                         lam, g=g, limits=limits)
                        except OrbitError:
                            continue
                        if len(sols):
                            yield OrbitHypothesis(index=index, r=r,
                                                  direction=direction,
                                                  rho=float(rho), f_D=float(f_d),
                                                  mode="circular", candidates=sols)
                            index += 1
                else:
                    e_vals, a_vals, raan_vals = shape_grids
                    for e in e_vals:
                        for a in a_vals:
                            for raan in raan_vals:
                                hyp = OrbitShapeHypothesis(r=r, e=float(e),
                                                           a=float(a),
                                                           raan=float(raan))
                                sols = solve_velocities(hyp, limits=limits,
                                                        epoch=sensor.epoch, g=g)
                                if len(sols):
                                    yield OrbitHypothesis(
                                        index=index, r=r, direction=direction,
                                        rho=float(rho), f_D=0.0, mode="shape",
                                        candidates=sols)
                                    index += 1


def estimate_noise_floor(statistics) -> float:
    """Robust noise power estimate from a bank of |chi|^2 statistics.

    Median of the statistics scaled by 1/ln 2, exact for exponential
    noise statistics and robust to a small fraction of real targets.

    Raises:
        SearchError: With fewer than 100 statistics.
    """
    stats = np.asarray(statistics, dtype=float)
    if stats.size < 100:
        raise SearchError(f"need >= 100 statistics, got {stats.size}")
    return float(np.median(stats) / math.log(2.0))


def hypothesis_track(r: np.ndarray, v: np.ndarray, sensor: SensorState,
                     cfg: RadarConfig, tx_sensor: SensorState | None = None,
                     g: GravityModel = EARTH) -> PathTrack:
    """Per-CPI path polynomial for one candidate (position, velocity)."""
    target = StateDerivatives(r=r, v=v, acc=gravity_accel(r, g),
                              jerk=gravity_jerk(r, v, g), epoch=sensor.epoch)
    ss_rx = slant_series(target, sensor, cfg.cpi)
    if tx_sensor is None:
        return PathTrack.from_slant(ss_rx, epoch=sensor.epoch)
    ss_tx = slant_series(target, tx_sensor, cfg.cpi)
    return PathTrack.from_bistatic(ss_rx, ss_tx, epoch=sensor.epoch)


@dataclass
class SearchResult:
    """Detections plus bank bookkeeping from one search run."""
    detections: list
    n_hypotheses: int
    n_statistics: int
    n_skipped: int
    noise_floor: float
    statistics: np.ndarray = field(default=None, repr=False)


def run_search(surv, ref, hypotheses, cfg: RadarConfig, threshold_db: float = 13.0,
               sensor: SensorState | None = None,
               tx_sensor: SensorState | None = None,
               max_hypotheses: int | None = None,
               g: GravityModel = EARTH,
               keep_statistics: bool = False) -> SearchResult:
    """Evaluate the matched-filter bank and threshold detections.

    Every candidate velocity of every hypothesis gets one statistic;
    the noise floor is estimated from the whole bank and detections are
    returned sorted by SNR descending (ties broken by enumeration
    order). Hypotheses whose track leaves the reference delay support
    are skipped and counted.

    Args:
        surv: Surveillance buffer (one CPI).
        ref: Reference buffer or interpolator.
        hypotheses: Iterable of OrbitHypothesis.
        cfg: Radar configuration.
        threshold_db: Detection threshold on SNR (dB).
        sensor: Receiver state at the CPI centre (required).
        tx_sensor: Transmitter state for bistatic geometry.
        max_hypotheses: Resource guard; exceeding it raises SearchError.
        keep_statistics: Retain the raw statistic bank in the result.
    """
    if sensor is None:
        raise SearchError("run_search requires the receiver sensor state")
    if not isinstance(ref, ReferenceInterpolator):
        ref = ReferenceInterpolator(ref)
    entries = []   # (hyp_index, r, v, elements, mode, statistic)
    stats = []
    n_hyp = 0
    n_skipped = 0
    for hyp in hypotheses:
        n_hyp += 1
        if max_hypotheses is not None and n_hyp > max_hypotheses:
            raise HypothesisCapError(f"hypothesis bank exceeds cap {max_hypotheses}")
        for sol in hyp.candidates:
            try:
                track = hypothesis_track(hyp.r, sol.v, sensor, cfg,
                                         tx_sensor=tx_sensor, g=g)
                chi = matched_filter_orbit(surv, ref, track, cfg)
            except DelaySupportError:
                n_skipped += 1
                continue
            stat = abs(chi) ** 2
            stats.append(stat)
            entries.append((hyp.index, hyp.r, sol.v, sol.elements, hyp.mode, stat))
    stats = np.asarray(stats, dtype=float)
    floor = estimate_noise_floor(stats)
    detections = []
    for hyp_index, r, v, elements, mode, stat in entries:
        snr_db = 10.0 * math.log10(stat / floor) if stat > 0 else -math.inf
        if snr_db >= threshold_db:
            detections.append(Detection(statistic=stat, snr_db=snr_db, r=r, v=v,
                                        elements=elements, epoch=sensor.epoch,
                                        mode=mode, hypothesis_index=hyp_index))
    detections.sort(key=lambda d: (-d.snr_db, d.hypothesis_index))
    return SearchResult(detections=detections, n_hypotheses=n_hyp,
                        n_statistics=stats.size, n_skipped=n_skipped,
                        noise_floor=floor,
                        statistics=stats if keep_statistics else None)


def iod_from_detection(d: Detection, g: GravityModel = EARTH) -> KeplerianElements:
    """Initial orbit determination from a single detection.

    Re-derives the elements from the winning (r, v) pair and snaps the
    hypothesis mode's assumed constraints (e = 0 and a = |r| in
    circular mode) onto the result.
    """
    state = StateDerivatives(r=d.r, v=d.v, acc=gravity_accel(d.r, g),
                             jerk=gravity_jerk(d.r, d.v, g), epoch=d.epoch)
    el = state_to_elements(state, g)
    if d.mode == "circular":
        el = replace(el, a=float(np.linalg.norm(d.r)), e=0.0)
    return el
