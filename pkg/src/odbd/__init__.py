"""Orbit-matched radar detection toolkit.

Synthesizes radar returns from Keplerian two-body orbits, builds
coherent matched filters parameterized by orbital state, constrains
uncued searches with velocity-space geometry, and performs detection
plus single-detection initial orbit determination.
"""
from .orbits import (EARTH, ConvergenceError, GravityModel, KeplerianElements,
                     OrbitError, PerifocalBasis, StateDerivatives,
                     elements_to_state, gravity_accel, gravity_jerk,
                     numeric_trajectory, perifocal_basis, propagate_kepler,
                     propagate_numeric, state_to_elements, vis_viva_speed)
from .geometry import (GeodeticSite, GeometryError, MeasurementTrack,
                       SensorState, SlantSeries, TopocentricDirection,
                       direction_unit, eval_track, measurement_track,
                       polynomial_track, site_to_sensor_state, slant_series,
                       topocentric_direction)
from .constraints import (DegenerateGeometryError, DopplerConstraint,
                          InfeasibleHypothesisError, OrbitShapeHypothesis,
                          PeriapsisLimits, VelocitySolution,
                          VelocitySolutionSet, circular_zero_doppler,
                          doppler_plane, raan_plane_normal, rdotv_values,
                          semi_major_bounds, solve_velocities)
from .signals import (ArrayGeometry, CallablePath, DelayDopplerMap,
                      DelaySupportError, PathTrack, RadarConfig,
                      ReferenceInterpolator, SignalBuffer, SignalError,
                      beamform, caf, matched_filter_orbit,
                      matched_filter_orbit_array, synthesize_echo,
                      synthesize_reference, wavevector)
from .search import (Detection, HypothesisCapError, OrbitHypothesis,
                     SearchError, SearchResult, SearchVolume,
                     enumerate_hypotheses, estimate_noise_floor,
                     hypothesis_track, iod_from_detection, run_search)

__version__ = "0.1.0"
