"""Stable on-disk formats: IQ buffers, track CSV, detection JSON.

IQ files are little-endian interleaved 32-bit float (I, Q) pairs with
a JSON sidecar carrying the sampling metadata; write -> read -> write
is byte-identical.
"""
import csv
import json
from pathlib import Path

import numpy as np

from .geometry import MeasurementTrack
from .orbits import KeplerianElements
from .search import Detection
from .signals import SignalBuffer

TRACK_COLUMNS = ["t_s", "alpha_deg", "delta_deg", "rho_m", "rhodot_mps"]


class FormatError(ValueError):
    """File does not conform to one of the defined formats."""


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def write_iq(path, buffer: SignalBuffer, carrier_freq_hz: float) -> None:
    """Write an IQ file plus its JSON sidecar."""
    path = Path(path)
    samples = buffer.samples.astype(np.complex64)
    interleaved = np.empty(2 * samples.size, dtype="<f4")
    interleaved[0::2] = samples.real
    interleaved[1::2] = samples.imag
    interleaved.tofile(path)
    meta = {
        "sample_rate_hz": buffer.sample_rate,
        "carrier_freq_hz": carrier_freq_hz,
        "epoch_s": buffer.epoch,
        "n_samples": int(samples.size),
    }
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_iq(path):
    """Read an IQ file and its sidecar.

    Returns:
        (SignalBuffer, metadata dict).

    Raises:
        FormatError: On missing sidecar or length mismatch.
    """
    path = Path(path)
    sidecar = _sidecar(path)
    if not sidecar.exists():
        raise FormatError(f"missing IQ sidecar: {sidecar}")
    try:
        meta = json.loads(sidecar.read_text())
        raw = np.fromfile(path, dtype="<f4")
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable IQ file {path}: {exc}") from exc
    for key in ("sample_rate_hz", "carrier_freq_hz", "epoch_s", "n_samples"):
        if key not in meta:
            raise FormatError(f"IQ sidecar missing field {key}")
    if raw.size != 2 * meta["n_samples"]:
        raise FormatError(
            f"IQ file length {raw.size // 2} does not match sidecar {meta['n_samples']}")
    samples = raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)
    return SignalBuffer(samples=samples, sample_rate=float(meta["sample_rate_hz"]),
                        epoch=float(meta["epoch_s"])), meta


def write_track_csv(path, track: MeasurementTrack) -> None:
    """Write a measurement track as CSV plus a JSON header sidecar."""
    path = Path(path)
    alpha_deg = track.alpha_deg if track.alpha_deg is not None \
        else np.degrees(track.alpha)
    delta_deg = track.delta_deg if track.delta_deg is not None \
        else np.degrees(track.delta)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACK_COLUMNS)
        for k in range(track.t.size):
            writer.writerow([repr(float(track.t[k])),
                             repr(float(alpha_deg[k])),
                             repr(float(delta_deg[k])),
                             repr(float(track.rho[k])),
                             repr(float(track.rhod[k]))])
    meta = {"dt_s": track.dt, "n_samples": int(track.t.size),
            "t_start_s": float(track.t[0])}
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_track_csv(path) -> MeasurementTrack:
    """Read a track CSV back into a MeasurementTrack.

    Raises:
        FormatError: On a malformed header or ragged rows.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [row for row in reader]
    except (OSError, StopIteration) as exc:
        raise FormatError(f"unreadable track file {path}: {exc}") from exc
    if header != TRACK_COLUMNS:
        raise FormatError(f"unexpected track header {header}")
    try:
        data = np.array([[float(x) for x in row] for row in rows], dtype=float)
    except ValueError as exc:
        raise FormatError(f"non-numeric track row in {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(TRACK_COLUMNS):
        raise FormatError(f"ragged track rows in {path}")
    t = data[:, 0]
    if t.size > 1:
        spacing = np.diff(t)
        if np.any(spacing <= 0):
            raise FormatError(f"non-monotonic time column in {path}")
        dt = float(np.median(spacing))
    else:
        dt = 0.0
    return MeasurementTrack(t=t, alpha=np.radians(data[:, 1]),
                            delta=np.radians(data[:, 2]), rho=data[:, 3],
                            rhod=data[:, 4], dt=dt,
                            alpha_deg=data[:, 1], delta_deg=data[:, 2])


def elements_to_dict(el: KeplerianElements) -> dict:
    return {"a_m": el.a, "e": el.e, "i_rad": el.i, "raan_rad": el.raan,
            "argp_rad": el.argp, "nu_rad": el.nu}


def detection_to_dict(d: Detection) -> dict:
    return {
        "snr_db": d.snr_db,
        "r_eci_m": [float(x) for x in d.r],
        "v_eci_mps": [float(x) for x in d.v],
        "elements": elements_to_dict(d.elements),
        "epoch_s": d.epoch,
        "mode": d.mode,
    }


def write_detections_json(path, detections) -> None:
    """Serialize a detection list to JSON."""
    payload = [detection_to_dict(d) for d in detections]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_detections_json(path) -> list:
    """Load a detection list written by write_detections_json."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable detections file {path}: {exc}") from exc
    if not isinstance(payload, list):
        raise FormatError("detections file must hold a JSON array")
    return payload
