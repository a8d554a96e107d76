"""Command-line front end.

Subcommands:
    odbd simulate -c scenario.json -o dir/
    odbd tracks   -c tracks.json   -o dir/
    odbd search   -c search.json   -i dir/ -o detections.json
    odbd compare  a.csv b.csv      -o residuals.json

Exit codes: 0 success, 2 input error, 3 resource guard. Report paths
write matplotlib figures next to the delimited output unless --no-plot
is given.
"""
import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .constraints import OrbitShapeHypothesis, circular_zero_doppler, solve_velocities
from .geometry import GeometryError, measurement_track, polynomial_track, \
    site_to_sensor_state
from .io import FormatError, read_iq, read_track_csv, write_detections_json, \
    write_iq, write_track_csv
from .orbits import OrbitError, StateDerivatives, elements_to_state, \
    gravity_accel, gravity_jerk, propagate_kepler
from .scenario import (Scenario, ScenarioError, closest_approach_index,
                       parse_elements, parse_gravity, parse_radar, parse_site,
                       simulate_scene, _number, _require)
from .search import HypothesisCapError, SearchError, SearchVolume, \
    enumerate_hypotheses, run_search
from .search import PeriapsisLimits
from .signals import SignalError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GUARD = 3

_INPUT_ERRORS = (ScenarioError, FormatError, OrbitError, GeometryError,
                 SignalError, json.JSONDecodeError, FileNotFoundError,
                 NotADirectoryError)


def _fail(reason: str, message: str, code: int = EXIT_INPUT) -> int:
    print(json.dumps({"error": message, "reason": reason}), file=sys.stderr)
    return code


def _load_json(path):
    return json.loads(Path(path).read_text())


def _threads_from_env() -> int:
    raw = os.environ.get("ODBD_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ScenarioError(f"ODBD_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise ScenarioError(f"ODBD_THREADS must be >= 1, got {value}")
    return value


def cmd_simulate(args) -> int:
    sc = Scenario(_load_json(args.config))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    ref, surv, tracks = simulate_scene(sc)
    write_iq(out / "reference.iq", ref, sc.radar.carrier_freq)
    write_iq(out / "surveillance.iq", surv, sc.radar.carrier_freq)
    for k, track in enumerate(tracks):
        write_track_csv(out / f"truth_track_{k:02d}.csv", track)
        if args.plot:
            from . import plots
            plots.save_track_overlay(out / f"truth_track_{k:02d}.png", track)
    print(json.dumps({"n_targets": len(tracks),
                      "n_cpi_samples": sc.radar.n_cpi_samples,
                      "output_dir": str(out)}))
    return EXIT_OK


def _aligned_solutions(solutions, v_truth):
    """Candidate velocities sorted by alignment with the truth velocity."""
    return sorted(solutions,
                  key=lambda s: -float(np.dot(s.v, v_truth)))


def cmd_tracks(args) -> int:
    doc = _load_json(args.config)
    g = parse_gravity(doc.get("gravity"))
    site = parse_site(_require(doc, "site", "tracks"), "site")
    truth = parse_elements(_require(doc, "truth", "tracks"), "truth")
    radar = doc.get("radar", {})
    lam = 299792458.0 / _number(radar, "carrier_freq_hz", "radar", 100e6)
    truth_window = _number(doc, "truth_window_s", "tracks", 20.0)
    sim_window = _number(doc, "sim_window_s", "tracks", 10.0)
    step = _number(doc, "step_s", "tracks", 0.1)
    mode = doc.get("mode", "circular")

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    truth_track = measurement_track(truth, site, truth_window, step, g)
    ca = closest_approach_index(truth_track)
    t_ca = float(truth_track.t[ca])
    st = elements_to_state(propagate_kepler(truth, t_ca - truth.epoch, g), g)
    sensor = site_to_sensor_state(site, t_ca, g)

    variants = []   # (label, VelocitySolution list)
    if mode == "circular":
        f_d = doc.get("f_d_hz")
        if f_d is None:
            f_d = -2.0 * float(truth_track.rhod[ca]) / lam
        sols = circular_zero_doppler(st.r, sensor, float(f_d), lam, g=g)
        variants.append(("circular", list(sols)))
    elif mode == "shape":
        shape = doc.get("shape", {})
        e = _number(shape, "e", "shape", truth.e)
        a = _number(shape, "a_m", "shape", truth.a)
        raan = math.radians(_number(shape, "raan_deg", "shape",
                                    math.degrees(truth.raan)))
        hyp = OrbitShapeHypothesis(r=st.r, e=e, a=a, raan=raan)
        sols = solve_velocities(hyp, epoch=t_ca, g=g)
        variants.append((f"shape e={e:g}", list(sols)))
    else:
        raise ScenarioError(f"tracks: unknown mode {mode!r}")
    for e in doc.get("eccentricities", []):
        hyp = OrbitShapeHypothesis(r=st.r, e=float(e),
                                   a=float(np.linalg.norm(st.r)), raan=truth.raan)
        sols = solve_velocities(hyp, epoch=t_ca, g=g)
        variants.append((f"e={e:g}", _aligned_solutions(sols, st.v)[:1]))

    if all(len(sols) == 0 for _, sols in variants):
        return _fail("infeasible_constraints",
                     "constraint set admits no orbit at the closest approach")

    write_track_csv(out / "truth.csv", truth_track)
    sim_tracks, labels, manifest = [], [], []
    idx = 0
    for label, sols in variants:
        for sol in _aligned_solutions(sols, st.v):
            target = StateDerivatives(r=st.r, v=sol.v,
                                      acc=gravity_accel(st.r, g),
                                      jerk=gravity_jerk(st.r, sol.v, g),
                                      epoch=t_ca)
            sim = polynomial_track(target, site, sim_window, step, g)
            name = f"sim_{idx:02d}.csv"
            write_track_csv(out / name, sim)
            sim_tracks.append(sim)
            labels.append(label)
            manifest.append({"file": name, "label": label,
                             "v_eci_mps": [float(x) for x in sol.v]})
            idx += 1
    meta = {"truth_file": "truth.csv", "closest_approach_t_s": t_ca,
            "mode": mode, "simulations": manifest}
    (out / "tracks_meta.json").write_text(json.dumps(meta, indent=2,
                                                     sort_keys=True) + "\n")
    if args.plot:
        from . import plots
        plots.save_track_overlay(out / "tracks_overlay.png", truth_track,
                                 sim_tracks, labels)
    print(json.dumps({"closest_approach_t_s": t_ca,
                      "n_simulations": len(sim_tracks),
                      "output_dir": str(out)}))
    return EXIT_OK


def cmd_search(args) -> int:
    doc = _load_json(args.config)
    _threads_from_env()
    g = parse_gravity(doc.get("gravity"))
    receiver = parse_site(_require(doc, "receiver", "search"), "receiver")
    tx = doc.get("transmitter")
    tx_site = parse_site(tx, "transmitter") if tx is not None else None
    cfg = parse_radar(_require(doc, "radar", "search"), tx_site)

    indir = Path(args.input)
    surv, surv_meta = read_iq(indir / "surveillance.iq")
    ref, _ = read_iq(indir / "reference.iq")
    if abs(surv_meta["sample_rate_hz"] - cfg.sample_rate) > 1e-6:
        raise FormatError("surveillance sample rate does not match search config")
    if abs(surv_meta["carrier_freq_hz"] - cfg.carrier_freq) > 1e-3:
        raise FormatError("surveillance carrier does not match search config")

    vol_doc = _require(doc, "volume", "search")
    vol = SearchVolume(
        center_alpha=math.radians(_number(vol_doc, "center_alpha_deg", "volume")),
        center_delta=math.radians(_number(vol_doc, "center_delta_deg", "volume")),
        half_angle=math.radians(_number(vol_doc, "half_angle_deg", "volume")),
        range_min=_number(vol_doc, "range_min_m", "volume"),
        range_max=_number(vol_doc, "range_max_m", "volume"),
        angular_step=math.radians(_number(vol_doc, "angular_step_deg", "volume")),
        range_step=_number(vol_doc, "range_step_m", "volume"))
    lim_doc = doc.get("periapsis_limits", {})
    limits = PeriapsisLimits(
        rp_min=_number(lim_doc, "rp_min_m", "periapsis_limits", g.earth_radius),
        rp_max=_number(lim_doc, "rp_max_m", "periapsis_limits",
                       g.earth_radius + 2.0e6))
    mode = doc.get("mode", "circular")
    f_d_grid = doc.get("f_d_grid_hz", [0.0])
    shape_grids = None
    if mode == "shape":
        sg = _require(doc, "shape_grids", "search")
        shape_grids = (sg["e"], sg["a_m"],
                       [math.radians(x) for x in sg["raan_deg"]])
    threshold = _number(doc, "threshold_db", "search", 13.0)
    cap = doc.get("max_hypotheses")
    epoch = _number(doc, "epoch_s", "search", 0.0)

    sensor = site_to_sensor_state(receiver, epoch, g)
    tx_sensor = site_to_sensor_state(tx_site, epoch, g) if tx_site else None
    hyps = enumerate_hypotheses(vol, sensor, limits, cfg.lam, mode=mode,
                                f_d_grid=f_d_grid, shape_grids=shape_grids, g=g)
    result = run_search(surv, ref, hyps, cfg, threshold_db=threshold,
                        sensor=sensor, tx_sensor=tx_sensor,
                        max_hypotheses=cap, g=g)
    write_detections_json(args.output, result.detections)
    if args.plot:
        from . import plots
        from .io import detection_to_dict
        plots.save_detections(Path(args.output).with_suffix(".png"),
                              [detection_to_dict(d) for d in result.detections],
                              threshold)
    print(json.dumps({"n_hypotheses": result.n_hypotheses,
                      "n_statistics": result.n_statistics,
                      "n_skipped": result.n_skipped,
                      "n_detections": len(result.detections),
                      "noise_floor": result.noise_floor}))
    return EXIT_OK


def _wrap_pi(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def _stats(values):
    values = np.asarray(values, dtype=float)
    return {"max_abs": float(np.max(np.abs(values))),
            "rms": float(np.sqrt(np.mean(values ** 2)))}


def cmd_compare(args) -> int:
    track_a = read_track_csv(args.track_a)
    track_b = read_track_csv(args.track_b)
    radar = _load_json(args.config) if args.config else {}
    carrier = _number(radar, "carrier_freq_hz", "radar", 100e6)
    cpi = _number(radar, "cpi_s", "radar", 10.0)
    bandwidth = _number(radar, "bandwidth_hz", "radar", 100e3)
    lam = 299792458.0 / carrier

    t_lo = max(track_a.t[0], track_b.t[0])
    t_hi = min(track_a.t[-1], track_b.t[-1])
    if t_lo > t_hi:
        return _fail("disjoint_time_supports",
                     "tracks do not overlap in time")
    mask = (track_a.t >= t_lo - 1e-12) & (track_a.t <= t_hi + 1e-12)
    t = track_a.t[mask]

    alpha_b = np.unwrap(track_b.alpha)
    dalpha = _wrap_pi(np.interp(t, track_b.t, alpha_b) - track_a.alpha[mask])
    ddelta = np.interp(t, track_b.t, track_b.delta) - track_a.delta[mask]
    drho = np.interp(t, track_b.t, track_b.rho) - track_a.rho[mask]
    drhod = np.interp(t, track_b.t, track_b.rhod) - track_a.rhod[mask]
    # Small-angle great-circle separation.
    sep = np.hypot(ddelta, dalpha * np.cos(track_a.delta[mask]))
    doppler_bins = drhod * (2.0 / lam) * cpi
    range_bins = drho * 2.0 * bandwidth / 299792458.0

    report = {
        "overlap": {"t_start_s": float(t_lo), "t_end_s": float(t_hi),
                    "n_samples": int(t.size)},
        "residuals": {
            "alpha_rad": _stats(dalpha),
            "delta_rad": _stats(ddelta),
            "angular_sep_rad": _stats(sep),
            "rho_m": _stats(drho),
            "rhodot_mps": _stats(drhod),
            "doppler_bins": _stats(doppler_bins),
            "range_bins": _stats(range_bins),
        },
        "radar": {"carrier_freq_hz": carrier, "cpi_s": cpi,
                  "bandwidth_hz": bandwidth},
    }
    Path(args.output).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.plot:
        from . import plots
        plots.save_residuals(Path(args.output).with_suffix(".png"), t, {
            "d_alpha": (dalpha, "rad"),
            "d_delta": (ddelta, "rad"),
            "d_rho": (drho, "m"),
            "d_rhodot": (drhod, "m/s"),
        })
    print(json.dumps(report["residuals"]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odbd",
        description="Orbit-matched radar simulation, search, and comparison")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize IQ buffers and truth tracks")
    p.add_argument("-c", "--config", required=True, help="scenario JSON")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tracks", help="generate truth and simulated tracks")
    p.add_argument("-c", "--config", required=True, help="tracks JSON")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.set_defaults(func=cmd_tracks)

    p = sub.add_parser("search", help="run the uncued detection search")
    p.add_argument("-c", "--config", required=True, help="search JSON")
    p.add_argument("-i", "--input", required=True, help="IQ input directory")
    p.add_argument("-o", "--output", required=True, help="detections JSON path")
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("compare", help="residuals between two track files")
    p.add_argument("track_a")
    p.add_argument("track_b")
    p.add_argument("-o", "--output", required=True, help="residual report JSON")
    p.add_argument("-c", "--config", default=None,
                   help="radar JSON for bin conversions")
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HypothesisCapError as exc:
        return _fail("hypothesis_cap", str(exc), EXIT_GUARD)
    except SearchError as exc:
        return _fail("search_error", str(exc))
    except _INPUT_ERRORS as exc:
        return _fail("invalid_input", str(exc))


if __name__ == "__main__":
    sys.exit(main())
