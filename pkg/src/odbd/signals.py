"""Complex-baseband synthesis and orbit matched filtering.

The reference is a band-limited noise stand-in for a broadcast FM
transmitter. Echoes are synthesized with time-varying path delay
(cubic interpolation on a 4x oversampled reference) and a carrier
phase tied to the total path length, so monostatic and bistatic
geometries share one Doppler convention.
"""
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .geometry import GeodeticSite, SlantSeries, TopocentricDirection, direction_unit

C_LIGHT = 299792458.0


class SignalError(ValueError):
    """Invalid signal-processing input."""


class DelaySupportError(SignalError):
    """A track's delay leaves the reference buffer's valid support."""


@dataclass(frozen=True)
class RadarConfig:
    """Radar waveform and geometry configuration.

    Attributes:
        carrier_freq: Carrier frequency (Hz).
        sample_rate: Complex sample rate (Hz).
        bandwidth: Reference signal bandwidth (Hz), <= sample_rate.
        cpi: Coherent processing interval length (s); cpi*sample_rate
            must be an integer sample count.
        tx_site: Transmitter site for bistatic geometry, None for
            monostatic.
        c: Propagation speed (m/s).
    """
    carrier_freq: float
    sample_rate: float
    bandwidth: float
    cpi: float
    tx_site: GeodeticSite | None = None
    c: float = C_LIGHT

    def __post_init__(self):
        if self.carrier_freq <= 0 or self.sample_rate <= 0 or self.cpi <= 0:
            raise SignalError("carrier, sample rate, and cpi must be positive")
        if self.bandwidth > self.sample_rate:
            raise SignalError("bandwidth exceeds sample rate")
        n = self.cpi * self.sample_rate
        if abs(n - round(n)) > 1e-6:
            raise SignalError("cpi * sample_rate must be an integer sample count")

    @property
    def lam(self) -> float:
        return self.c / self.carrier_freq

    @property
    def n_cpi_samples(self) -> int:
        return int(round(self.cpi * self.sample_rate))

    @property
    def bistatic(self) -> bool:
        return self.tx_site is not None


@dataclass(frozen=True)
class SignalBuffer:
    """Uniformly sampled complex baseband sequence."""
    samples: np.ndarray
    sample_rate: float
    epoch: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "samples",
                           np.asarray(self.samples, dtype=np.complex128))

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.epoch + np.arange(self.samples.size) / self.sample_rate


def synthesize_reference(cfg: RadarConfig, seed: int, duration: float | None = None,
                         epoch: float | None = None) -> SignalBuffer:
    """Band-limited unit-power complex Gaussian reference signal.

    Deterministic for a given seed. Spectral content outside
    +-bandwidth/2 is removed with an FFT brick wall, then the buffer
    is normalized to unit average power.

    Args:
        cfg: Radar configuration.
        seed: RNG seed.
        duration: Buffer length (s), defaults to one CPI.
        epoch: Start time (s), defaults to -cpi/2 so the CPI is
            centred on t = 0.
    """
    if duration is None:
        duration = cfg.cpi
    if epoch is None:
        epoch = -cfg.cpi / 2.0
    n = int(round(duration * cfg.sample_rate))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    spec = np.fft.fft(x)
    freqs = np.fft.fftfreq(n, d=1.0 / cfg.sample_rate)
    spec[np.abs(freqs) > cfg.bandwidth / 2.0] = 0.0
    x = np.fft.ifft(spec)
    x /= np.sqrt(np.mean(np.abs(x) ** 2))
    return SignalBuffer(samples=x, sample_rate=cfg.sample_rate, epoch=epoch)


class ReferenceInterpolator:
    """Fractional-delay sampler over a 4x band-limited oversampled reference.

    Oversampling is exact FFT zero-padding; between oversampled nodes a
    Catmull-Rom cubic is used, which reproduces nodal values exactly.
    """

    def __init__(self, ref: SignalBuffer, factor: int = 4):
        self.sample_rate = ref.sample_rate
        self.epoch = ref.epoch
        self.factor = factor
        n = len(ref)
        spec = np.fft.fft(ref.samples)
        up = np.zeros(n * factor, dtype=np.complex128)
        half = n // 2
        up[:half] = spec[:half]
        up[-(n - half):] = spec[half:]
        self._fine = np.fft.ifft(up) * factor
        self._fine_rate = ref.sample_rate * factor

    def __call__(self, t: np.ndarray) -> np.ndarray:
        """Sample the reference at arbitrary times within its support."""
        x = (np.asarray(t, dtype=float) - self.epoch) * self._fine_rate
        # Snap grid-aligned requests so exact sample lookups stay exact.
        xr = np.round(x)
        x = np.where(np.abs(x - xr) < 1e-6, xr, x)
        n = self._fine.size
        if np.any(x < 0.0) or np.any(x > n - 1):
            raise DelaySupportError("requested time outside reference support")
        i = np.floor(x).astype(np.int64)
        f = x - i
        # FFT oversampling implies periodic extension; wrap the stencil.
        p0 = self._fine[(i - 1) % n]
        p1 = self._fine[i]
        p2 = self._fine[(i + 1) % n]
        p3 = self._fine[(i + 2) % n]
        # Catmull-Rom cubic in the fractional offset f.
        return (p1
                + 0.5 * f * (p2 - p0
                             + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3
                                    + f * (3.0 * (p1 - p2) + p3 - p0))))


@dataclass(frozen=True)
class PathTrack:
    """Polynomial total-path-length model over a CPI.

    delay_coeffs and phase_coeffs are ascending polynomial coefficients
    of the path length (m) in track time t - epoch; they are identical
    for physical tracks and only differ for the degenerate fixed-bin
    model used by the classic delay-Doppler filter.
    """
    delay_coeffs: np.ndarray
    phase_coeffs: np.ndarray
    epoch: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "delay_coeffs",
                           np.asarray(self.delay_coeffs, dtype=float))
        object.__setattr__(self, "phase_coeffs",
                           np.asarray(self.phase_coeffs, dtype=float))

    def delay_path(self, t):
        return npoly.polyval(np.asarray(t, dtype=float) - self.epoch,
                             self.delay_coeffs)

    def phase_path(self, t):
        return npoly.polyval(np.asarray(t, dtype=float) - self.epoch,
                             self.phase_coeffs)

    def truncated(self, order: int) -> "PathTrack":
        """Drop polynomial terms above the given degree on both paths."""
        return PathTrack(delay_coeffs=self.delay_coeffs[:order + 1],
                         phase_coeffs=self.phase_coeffs[:order + 1],
                         epoch=self.epoch)

    @classmethod
    def from_slant(cls, ss: SlantSeries, factor: float = 2.0,
                   epoch: float = 0.0) -> "PathTrack":
        """Monostatic path 2*rho(t) from one slant series (factor=1 one-way)."""
        coeffs = factor * np.array([ss.rho, ss.rhod, ss.rhodd / 2.0, ss.rhoddd / 6.0])
        return cls(delay_coeffs=coeffs, phase_coeffs=coeffs.copy(), epoch=epoch)

    @classmethod
    def from_bistatic(cls, ss_rx: SlantSeries, ss_tx: SlantSeries,
                      epoch: float = 0.0) -> "PathTrack":
        """Bistatic path rho_tx(t) + rho_rx(t)."""
        coeffs = np.array([ss_rx.rho + ss_tx.rho,
                           ss_rx.rhod + ss_tx.rhod,
                           (ss_rx.rhodd + ss_tx.rhodd) / 2.0,
                           (ss_rx.rhoddd + ss_tx.rhoddd) / 6.0])
        return cls(delay_coeffs=coeffs, phase_coeffs=coeffs.copy(), epoch=epoch)

    @classmethod
    def from_delay_doppler(cls, tau: float, f_D: float, lam: float,
                           c: float = C_LIGHT) -> "PathTrack":
        """Fixed-bin model: constant delay, linear Doppler phase."""
        return cls(delay_coeffs=np.array([c * tau]),
                   phase_coeffs=np.array([c * tau, -f_D * lam]))


class CallablePath:
    """Adapter exposing one path-length callable as delay and phase."""

    def __init__(self, fn):
        self._fn = fn

    def delay_path(self, t):
        return np.asarray(self._fn(np.asarray(t, dtype=float)), dtype=float)

    phase_path = delay_path


def synthesize_echo(ref, track, cfg: RadarConfig, amplitude: float = 1.0,
                    noise_power: float = 0.0, seed: int = 0,
                    epoch: float | None = None,
                    n_samples: int | None = None) -> SignalBuffer:
    """Surveillance signal containing a delayed, phase-rotated echo.

    surv(t) = amplitude * ref(t - path(t)/c) * exp(-j 2 pi f_c path(t)/c)
    plus complex white noise of the given per-sample power.

    Args:
        ref: SignalBuffer or prebuilt ReferenceInterpolator.
        track: Object with delay_path(t)/phase_path(t) in metres
            (PathTrack or CallablePath).
        cfg: Radar configuration.
        amplitude: Echo amplitude.
        noise_power: Additive complex noise power per sample.
        seed: Noise RNG seed.
        epoch: Surveillance start time, default -cpi/2.
        n_samples: Buffer length, default one CPI.

    Raises:
        DelaySupportError: If the delayed track leaves the reference
            buffer's support.
    """
    if not isinstance(ref, ReferenceInterpolator):
        ref = ReferenceInterpolator(ref)
    if epoch is None:
        epoch = -cfg.cpi / 2.0
    if n_samples is None:
        n_samples = cfg.n_cpi_samples
    t = epoch + np.arange(n_samples) / cfg.sample_rate
    tau = track.delay_path(t) / cfg.c
    echo = amplitude * ref(t - tau) * np.exp(
        -2j * np.pi * cfg.carrier_freq / cfg.c * track.phase_path(t))
    if noise_power > 0.0:
        rng = np.random.default_rng(seed)
        echo = echo + math.sqrt(noise_power / 2.0) * (
            rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples))
    return SignalBuffer(samples=echo, sample_rate=cfg.sample_rate, epoch=epoch)


@dataclass(frozen=True)
class DelayDopplerMap:
    """|chi|^2 surface over delay and Doppler bins."""
    power: np.ndarray
    delays: np.ndarray
    dopplers: np.ndarray

    def peak(self):
        """(delay, doppler, power) of the map maximum."""
        i, j = np.unravel_index(int(np.argmax(self.power)), self.power.shape)
        return float(self.delays[i]), float(self.dopplers[j]), float(self.power[i, j])


def caf(surv: SignalBuffer, ref: SignalBuffer, delays, dopplers,
        method: str = "direct") -> DelayDopplerMap:
    """Classic cross-ambiguity surface on a delay/Doppler bin grid.

    chi(tau, f) = sum_n s[n] d*(t_n - tau) exp(-j 2 pi f t_n) with the
    reference shifted by whole samples (delays must sit on the
    1/sample_rate grid) and zero-filled outside its support.

    Args:
        surv, ref: Equal-rate signal buffers.
        delays: Delay bin centres (s).
        dopplers: Doppler bin centres (Hz); for the fft method these
            must sit on the k/T fft grid of the surveillance buffer.
        method: "direct" (baseline) or "fft" (batched, must match the
            direct form).
    """
    if surv.sample_rate != ref.sample_rate:
        raise SignalError("sample rates differ")
    delays = np.asarray(delays, dtype=float)
    dopplers = np.asarray(dopplers, dtype=float)
    fs = surv.sample_rate
    n = len(surv)
    t = surv.times
    s = surv.samples
    dconj = np.conj(ref.samples)

    def shifted_product(tau):
        # Index of ref sample aligned with surv sample k for this delay.
        shift = (surv.epoch - ref.epoch - tau) * fs
        k = int(round(shift))
        if abs(shift - k) > 1e-6:
            raise SignalError("delay does not sit on the sample grid")
        z = np.zeros(n, dtype=np.complex128)
        lo = max(0, -k)
        hi = min(n, len(ref) - k)
        if hi > lo:
            z[lo:hi] = s[lo:hi] * dconj[lo + k:hi + k]
        return z

    power = np.empty((delays.size, dopplers.size))
    if method == "direct":
        kernel = np.exp(-2j * np.pi * np.outer(dopplers, t))
        for i, tau in enumerate(delays):
            power[i] = np.abs(kernel @ shifted_product(tau)) ** 2
    elif method == "fft":
        T = n / fs
        bins = dopplers * T
        m = np.round(bins).astype(int)
        if np.any(np.abs(bins - m) > 1e-6):
            raise SignalError("fft method requires Doppler bins on the k/T grid")
        phase = np.exp(-2j * np.pi * dopplers * surv.epoch)
        for i, tau in enumerate(delays):
            spec = np.fft.fft(shifted_product(tau))
            power[i] = np.abs(spec[m % n] * phase) ** 2
    else:
        raise SignalError(f"unknown caf method: {method}")
    return DelayDopplerMap(power=power, delays=delays, dopplers=dopplers)


def matched_filter_orbit(surv: SignalBuffer, ref, track, cfg: RadarConfig) -> complex:
    """Single-channel matched-filter statistic for one path track.

    chi = sum_n s[n] d*(t_n - path(t_n)/c) exp(+j 2 pi f_c path(t_n)/c),
    the exact conjugate of the echo model, so a noise-free matched
    track yields amplitude * sum |d|^2.
    """
    if not isinstance(ref, ReferenceInterpolator):
        ref = ReferenceInterpolator(ref)
    t = surv.times
    tau = track.delay_path(t) / cfg.c
    kernel = np.conj(ref(t - tau)) * np.exp(
        2j * np.pi * cfg.carrier_freq / cfg.c * track.phase_path(t))
    return complex(np.sum(surv.samples * kernel))


@dataclass(frozen=True)
class ArrayGeometry:
    """Element positions (N, 3) in a sensor-local ECI-aligned frame (m)."""
    positions: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[0] < 1 or pos.shape[1] != 3:
            raise SignalError("element positions must be an (N, 3) array")
        object.__setattr__(self, "positions", pos)

    @property
    def n_elements(self) -> int:
        return self.positions.shape[0]


def wavevector(direction: TopocentricDirection, lam: float) -> np.ndarray:
    """Wavevector of magnitude 2 pi / lambda along the arrival direction."""
    if lam <= 0:
        raise SignalError(f"wavelength must be positive, got {lam}")
    return 2.0 * np.pi / lam * direction_unit(direction)


def _direction_units(direction, t: np.ndarray) -> np.ndarray:
    if isinstance(direction, TopocentricDirection):
        return np.broadcast_to(direction_unit(direction), (t.size, 3))
    units = np.asarray(direction(t), dtype=float)
    if units.shape != (t.size, 3):
        raise SignalError("direction callable must return unit vectors of shape (n, 3)")
    return units


def beamform(elements, geom: ArrayGeometry, direction, lam: float) -> SignalBuffer:
    """Far-field beamformed sum with per-sample steering.

    s(t) = sum_n s_n(t) exp(-j k(t) . u_n). `direction` is either a
    fixed TopocentricDirection or a callable t -> (n, 3) unit vectors.
    """
    if len(elements) != geom.n_elements:
        raise SignalError("element count does not match geometry")
    first = elements[0]
    for e in elements[1:]:
        if len(e) != len(first) or e.sample_rate != first.sample_rate:
            raise SignalError("element buffers must share length and rate")
    t = first.times
    units = _direction_units(direction, t)
    k = 2.0 * np.pi / lam * units
    out = np.zeros(len(first), dtype=np.complex128)
    for buf, u in zip(elements, geom.positions):
        out += buf.samples * np.exp(-1j * (k @ u))
    return SignalBuffer(samples=out, sample_rate=first.sample_rate, epoch=first.epoch)


def matched_filter_orbit_array(elements, geom: ArrayGeometry, ref, track,
                               direction, cfg: RadarConfig) -> complex:
    """Array matched filter: beamform along the hypothesis, then filter.

    With a single element this reduces exactly to matched_filter_orbit.
    """
    summed = beamform(elements, geom, direction, cfg.lam)
    return matched_filter_orbit(summed, ref, track, cfg)
